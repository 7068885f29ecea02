#pragma once

#include <array>

#include "boltzinv/common.hpp"

namespace boltzinv {

struct FluidState {
  double rho = 1.0;
  Vec3 u{};
  double T = 1.0;

  // Throws InvalidArgument unless rho, T > 0 and everything is finite.
  void validate() const;
  double sqrt_T() const { return std::sqrt(T); }
};

struct WeightSpec {
  double q = 0.5;
  double gamma = 1.0;
  double k_gamma = 0.0;

  void validate() const;
  // Polynomial order large enough for the decay theorem at this gamma.
  bool k_gamma_admissible() const;
};

double log_maxwellian(const FluidState& s, const Vec3& v);
double maxwellian_eval(const FluidState& s, const Vec3& v);
double sqrt_maxwellian(const FluidState& s, const Vec3& v);

// (1+|v|)^k * M(v)^(-q/2), evaluated in log space.
double weight_eval(const FluidState& s, const WeightSpec& w, const Vec3& v);

// Envelope prefactor: 1 for gamma >= 0, 1/nu for gamma < 0.
double theta_gamma(double gamma, double nu_v);

// The five orthonormal collision invariants (mass, momentum, energy) of the
// linearized operator at a given state.
class PsiBasis {
 public:
  explicit PsiBasis(const FluidState& s);
  double operator()(int alpha, const Vec3& v) const;
  std::array<double, 5> all(const Vec3& v) const;
  const FluidState& state() const { return s_; }

 private:
  FluidState s_;
};

inline PsiBasis psi_basis(const FluidState& s) { return PsiBasis(s); }

}  // namespace boltzinv
