#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "boltzinv/pseudo_inverse.hpp"

namespace boltzinv {

// Smooth test functions orthogonal to the invariants: sqrt(M) times random
// cubic polynomials alternating with Gaussian bumps at random centres.
std::vector<GridFunction> probe_family(const DiscreteLinearizedOperator& op, std::size_t count,
                                       std::uint64_t seed);

// Only the polynomial members, every one resolved on the grid. Member k equals
// member k of probe_family for even k.
std::vector<GridFunction> polynomial_family(const DiscreteLinearizedOperator& op, std::size_t count,
                                            std::uint64_t seed);

// Smallest C >= 0 with lhs >= rhs - C |f|^2_{L2(nu)} over the family, where for
// gamma >= 0 lhs = <w L f, w f>, rhs = |w f|^2_{L2(nu)} / 2, and for gamma < 0
// lhs = <nu^-1 w L f, w f>, rhs = |w f|^2 / 2, with w = M^(-q/2). Weighted sums
// run over |v - u| <= trusted_fraction R.
HypoReport weighted_hypocoercivity_probe(const DiscreteLinearizedOperator& op, double q,
                                         std::span<const GridFunction> family,
                                         double trusted_fraction = 0.8);

struct ChiSplitRow {
  double r = 0;
  double low_bound_const = 0;     // max |<Theta w K_low f, w f>| / |f|^2_{L2(nu)}
  double high_small_factor = 0;   // max |<Theta w K_high f, w f>| / |w f|^2
  double partition_error = 0;     // max |low + high - full| / |full|
};

struct ChiSplitTable {
  double q = 0;
  std::vector<ChiSplitRow> rows;
  bool high_factor_nonincreasing = true;  // within the noise allowance
  double noise = 0.1;
};

ChiSplitTable chi_split_probe(const DiscreteLinearizedOperator& op, std::span<const double> r_values,
                              double q, std::span<const GridFunction> family,
                              double trusted_fraction = 0.8, double noise = 0.1);

struct DecayProfile {
  double q = 0;
  double gamma = 0;
  std::vector<double> shell_radii;  // outer radius of each (possibly merged) shell
  std::vector<double> W;
  double plateau_ratio = 0;
  double trusted_radius = 0;
  bool finite = true;
  std::vector<std::string> warnings;
};

// Shell maxima of |f| / envelope over |v - center| <= radius, split into `shells`
// equal-width shells; shells without nodes are merged outward.
DecayProfile shell_profile(const GridFunction& f, const std::function<double(std::size_t)>& envelope,
                           const Vec3& center, double radius, int shells = 16);

// W(s) for f against Theta_gamma M^(q/2) on [0, trusted_fraction R].
DecayProfile decay_profile(const DiscreteLinearizedOperator& op, const GridFunction& f, double q,
                           double trusted_fraction = 0.8);

}  // namespace boltzinv
