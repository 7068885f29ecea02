#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace boltzinv {

// Signed axis permutation acting on lattice vectors: (S x)_d = sign[d] x[perm[d]].
struct SignedPermutation {
  std::array<int, 3> perm{0, 1, 2};
  std::array<int, 3> sign{1, 1, 1};

  template <class V>
  V apply(const V& x) const {
    V y = x;
    for (int d = 0; d < 3; ++d) y[d] = sign[d] * x[perm[d]];
    return y;
  }
  template <class V>
  V apply_inverse(const V& y) const {
    V x = y;
    for (int d = 0; d < 3; ++d) x[perm[d]] = sign[d] * y[d];
    return x;
  }
  // (S z)^alpha = sign * z^beta; returns beta and the sign.
  std::array<int, 3> monomial_image(const std::array<int, 3>& alpha, int& out_sign) const;
};

// Orbits of the 48-element symmetry group of a cell-centred n^3 lattice.
// Representatives have centred odd coordinates q0 >= q1 >= q2 > 0.
struct OrbitMap {
  int n = 0;
  std::vector<std::size_t> reps;          // flat node index of each representative
  std::vector<int> rep_of;                // per node: position in reps
  std::vector<SignedPermutation> op;      // per node: node = op(rep)

  // Flat index of S^{-1}(node j) for the operator attached to node i.
  std::size_t pull_back(std::size_t i, std::size_t j) const;
};

OrbitMap octahedral_orbits(int n);

}  // namespace boltzinv
