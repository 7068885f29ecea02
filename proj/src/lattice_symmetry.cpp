#include "boltzinv/lattice_symmetry.hpp"

#include <algorithm>
#include <map>

#include "boltzinv/common.hpp"

namespace boltzinv {

std::array<int, 3> SignedPermutation::monomial_image(const std::array<int, 3>& alpha,
                                                     int& out_sign) const {
  std::array<int, 3> beta{};
  out_sign = 1;
  for (int d = 0; d < 3; ++d) {
    beta[perm[d]] = alpha[d];
    if (sign[d] < 0 && (alpha[d] % 2) == 1) out_sign = -out_sign;
  }
  return beta;
}

namespace {

std::array<int, 3> centred(int n, std::size_t i) {
  const std::size_t nn = static_cast<std::size_t>(n);
  const int p0 = static_cast<int>(i / (nn * nn)), p1 = static_cast<int>((i / nn) % nn),
            p2 = static_cast<int>(i % nn);
  return {2 * p0 - (n - 1), 2 * p1 - (n - 1), 2 * p2 - (n - 1)};
}

std::size_t flat_of(int n, const std::array<int, 3>& q) {
  const std::size_t nn = static_cast<std::size_t>(n);
  auto p = [n](int x) { return static_cast<std::size_t>((x + n - 1) / 2); };
  return (p(q[0]) * nn + p(q[1])) * nn + p(q[2]);
}

}  // namespace

std::size_t OrbitMap::pull_back(std::size_t i, std::size_t j) const {
  return flat_of(n, op[i].apply_inverse(centred(n, j)));
}

OrbitMap octahedral_orbits(int n) {
  if (n < 2 || n % 2 != 0) throw InvalidArgument("octahedral_orbits: n must be even");
  OrbitMap m;
  m.n = n;
  const std::size_t total = static_cast<std::size_t>(n) * n * n;
  m.rep_of.resize(total);
  m.op.resize(total);
  std::map<std::array<int, 3>, int> index;
  for (std::size_t i = 0; i < total; ++i) {
    const auto q = centred(n, i);
    std::array<int, 3> order{0, 1, 2};
    // Stable sort by decreasing magnitude, so ties keep axis order.
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return std::abs(q[a]) > std::abs(q[b]); });
    std::array<int, 3> rep{std::abs(q[order[0]]), std::abs(q[order[1]]), std::abs(q[order[2]])};
    SignedPermutation s;
    for (int k = 0; k < 3; ++k) {
      // q[order[k]] = sign * rep[k]  =>  perm[order[k]] = k.
      s.perm[order[k]] = k;
      s.sign[order[k]] = q[order[k]] < 0 ? -1 : 1;
    }
    auto [it, fresh] = index.try_emplace(rep, static_cast<int>(m.reps.size()));
    if (fresh) m.reps.push_back(flat_of(n, rep));
    m.rep_of[i] = it->second;
    m.op[i] = s;
  }
  return m;
}

}  // namespace boltzinv
