#pragma once

#include <cstdint>
#include <vector>

#include "boltzinv/hilbert.hpp"

namespace boltzinv {

// Consistency checks shared by the CLI scenarios and the test suites. Each
// returns the measured quantities; thresholds are applied by the caller.

struct RouteCrossCheck {
  int pairs = 0;
  double max_relative = 0;  // closed form against the planar 2-D quadrature
  double seconds = 0;
};
// Hard-sphere gain kernel: closed form against the planar-integral route.
RouteCrossCheck k2_route_crosscheck(const FluidState& s, int pairs, std::uint64_t seed);

struct EnvelopeSample {
  double gamma = 0;
  Vec3 v, v1;
  double k1 = 0, k1_bar = 0, k2 = 0, k2_bar = 0;
  bool pass = true;
};

struct EnvelopeCheck {
  double gamma = 0;
  double b0 = 0;
  int pairs = 0;
  int k1_violations = 0;
  int k2_violations = 0;
  double max_ratio_k1 = 0;  // max k1 / k1_bar
  double max_ratio_k2 = 0;
  double k2_bar_l1 = 0;            // integral of k2_bar over R^3
  double k2_bar_tail_fraction = 0; // share beyond |z| = 10 sqrt(T)
};
// Samples pairs around u and compares both kernels with their envelopes.
// Pass `samples` to keep every evaluated pair.
EnvelopeCheck envelope_check(double gamma, const FluidState& s, int pairs, std::uint64_t seed,
                             double slack, std::vector<EnvelopeSample>* samples = nullptr);

struct LemmaFCheck {
  int triples = 0;
  int case3 = 0;
  double max_ratio = 0;           // grid max of f over the claimed bound
  double max_location_error = 0;  // relative, case 3 only
};
// Random admissible (gamma, b0, a); grid maximum of x^b0 (x^2+a^2)^((gamma-1)/2) on (0, 100a].
LemmaFCheck lemma_f_check(int triples, std::uint64_t seed);

struct NullResidual {
  std::array<double, 5> ratio{};  // |L phi_a|_2 / |phi_a|_2 on |v - u| <= fraction R
  double worst = 0;
};
NullResidual null_residual(const DiscreteLinearizedOperator& op, double interior_fraction = 0.5);

// max |<Lf,g> - <f,Lg>| / (|f| |g|) over random pairs.
double self_adjoint_defect(const DiscreteLinearizedOperator& op, int pairs, std::uint64_t seed);

struct OracleCheck {
  int functions = 0;
  double max_relative = 0;  // |K f - K_mf f|_2 / |K_mf f|_2
  double seconds = 0;
};
// Assembled K against the independent matrix-free quadrature on random cubics
// times sqrt(M).
OracleCheck oracle_check(const DiscreteLinearizedOperator& op, int count, std::uint64_t seed);

struct GammaInvariantCheck {
  double equilibrium_relative = 0;  // |Gamma(sqrt M, sqrt M)| / |gain part|
  std::vector<double> moment_ratios;  // max_a |<Gamma(f,f), phi_a>| / |Gamma(f,f)| per f
  double worst_moment_ratio = 0;
  double seconds = 0;
};
// Gamma(sqrt M, sqrt M) and the invariant moments of Gamma(f, f) for random
// cubics times sqrt(M).
GammaInvariantCheck gamma_invariant_check(const DiscreteLinearizedOperator& op, int count,
                                          std::uint64_t seed, CollisionQuadratureOptions opt = {});

}  // namespace boltzinv
