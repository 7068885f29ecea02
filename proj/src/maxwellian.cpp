#include "boltzinv/maxwellian.hpp"

namespace boltzinv {

void FluidState::validate() const {
  if (!(std::isfinite(rho) && rho > 0)) throw InvalidArgument("fluid state: rho must be positive and finite");
  if (!(std::isfinite(T) && T > 0)) throw InvalidArgument("fluid state: T must be positive and finite");
  if (!finite(u)) throw InvalidArgument("fluid state: u must be finite");
}

void WeightSpec::validate() const {
  if (!(q > 0 && q < 1)) throw InvalidArgument("weight: q must lie in (0,1)");
  if (!(gamma > -1.5 && gamma <= 1)) throw InvalidArgument("weight: gamma must lie in (-3/2,1]");
  if (!(std::isfinite(k_gamma) && k_gamma >= 0)) throw InvalidArgument("weight: k_gamma must be >= 0");
}

bool WeightSpec::k_gamma_admissible() const {
  return gamma >= 0 ? k_gamma > (3.0 - gamma) / 2.0 : k_gamma > (3.0 - 2.0 * gamma) / 2.0;
}

double log_maxwellian(const FluidState& s, const Vec3& v) {
  if (!finite(v)) throw InvalidArgument("maxwellian: non-finite velocity");
  return std::log(s.rho) - 1.5 * std::log(2.0 * kPi * s.T) - norm2(v - s.u) / (2.0 * s.T);
}

double maxwellian_eval(const FluidState& s, const Vec3& v) {
  s.validate();
  return std::exp(log_maxwellian(s, v));
}

double sqrt_maxwellian(const FluidState& s, const Vec3& v) {
  return std::exp(0.5 * log_maxwellian(s, v));
}

double weight_eval(const FluidState& s, const WeightSpec& w, const Vec3& v) {
  s.validate();
  w.validate();
  return std::exp(w.k_gamma * std::log1p(norm(v)) - 0.5 * w.q * log_maxwellian(s, v));
}

double theta_gamma(double gamma, double nu_v) {
  if (!(nu_v > 0)) throw InvalidArgument("theta_gamma: collision frequency must be positive");
  return gamma >= 0 ? 1.0 : 1.0 / nu_v;
}

PsiBasis::PsiBasis(const FluidState& s) : s_(s) { s_.validate(); }

std::array<double, 5> PsiBasis::all(const Vec3& v) const {
  const Vec3 c = v - s_.u;
  const double sm = sqrt_maxwellian(s_, v);
  const double a = sm / std::sqrt(s_.rho);
  const double b = sm / std::sqrt(s_.rho * s_.T);
  return {a, c.x * b, c.y * b, c.z * b, (norm2(c) / s_.T - 3.0) * sm / std::sqrt(6.0 * s_.rho)};
}

double PsiBasis::operator()(int alpha, const Vec3& v) const {
  if (alpha < 0 || alpha > 4) throw InvalidArgument("psi_basis: index must be 0..4");
  return all(v)[alpha];
}

}  // namespace boltzinv
