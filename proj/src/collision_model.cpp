#include "boltzinv/collision_model.hpp"

#include <algorithm>
#include <boost/math/special_functions/bessel.hpp>
#include <limits>
#include <vector>

namespace boltzinv {

void CollisionModel::validate() const {
  if (!(gamma > -3.0 && gamma <= 1.0)) throw InvalidArgument("collision model: gamma must lie in (-3,1]");
  if (!(beta0 > 0 && std::isfinite(beta0))) throw InvalidArgument("collision model: beta0 must be positive");
  if (!(epsilon > 0 && epsilon < 1)) throw InvalidArgument("collision model: epsilon must lie in (0,1)");
  if (!admissible_b0(gamma).phi1.contains(b0))
    throw InvalidArgument("collision model: b0 outside the admissible set for this gamma");
}

double CollisionModel::cosine_coefficient() const {
  return angular == AngularFamily::NormalizedCosine ? 1.0 / (2.0 * kPi) : beta0;
}

CollisionModel make_model(double gamma, std::optional<double> b0, double epsilon) {
  CollisionModel m;
  m.gamma = gamma;
  m.epsilon = epsilon;
  m.b0 = b0 ? *b0 : admissible_b0(gamma).default_b0;
  m.validate();
  return m;
}

std::string to_string(AngularFamily f) {
  return f == AngularFamily::NormalizedCosine ? "normalized-cosine" : "hard-sphere-beta0";
}

AngularFamily angular_family_from_string(const std::string& s) {
  if (s == "normalized-cosine") return AngularFamily::NormalizedCosine;
  if (s == "hard-sphere-beta0") return AngularFamily::HardSphereBeta0;
  throw InvalidArgument("unknown angular family: " + s);
}

double angular_beta(const CollisionModel& m, double theta) {
  if (!(theta >= 0 && theta <= kPi)) throw InvalidArgument("angular_beta: theta must lie in [0,pi]");
  return m.cosine_coefficient() * std::fabs(std::cos(theta));
}

double bessel_i0_scaled(double x) {
  if (x < 0) throw InvalidArgument("bessel_i0_scaled: negative argument");
  if (x <= 50.0) return boost::math::cyl_bessel_i(0, x) * std::exp(-x);
  // Hankel asymptotic series; terms decay fast for x > 50.
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 30; ++k) {
    term *= (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum / std::sqrt(2.0 * kPi * x);
}

// ---------------------------------------------------------------------------
// collision frequency

namespace {

// (1 - exp(-x)) / x with the removable singularity filled in.
double shell_factor(double x) { return x < 1e-12 ? 1.0 - 0.5 * x : -std::expm1(-x) / x; }

// Integral over s >= 0 of s^(2+gamma) exp(-(s-w)^2/2) shell_factor(2 s w):
// the angle-averaged Gaussian seen at distance s from a point at peculiar speed w.
double nu_radial_integral(double gamma, double w, int order) {
  const double span = 9.0;
  const double lo = std::max(0.0, w - span), hi = w + span;
  auto f = [&](double s) {
    return std::pow(s, 2.0 + gamma) * std::exp(-0.5 * (s - w) * (s - w)) * shell_factor(2.0 * s * w);
  };
  CompensatedSum acc;
  double start = lo;
  if (lo == 0.0) {
    // Graded first panel s = p x^3 smooths the s^(2+gamma) endpoint behaviour.
    const double p = std::min(0.5, hi);
    const auto& g = gauss_legendre(order);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = 0.5 * (g.nodes[i] + 1.0);
      const double s = p * x * x * x;
      acc.add(0.5 * g.weights[i] * 3.0 * p * x * x * f(s));
    }
    start = p;
  }
  const int panels = std::max(1, static_cast<int>(std::ceil((hi - start) / 1.5)));
  std::vector<double> breaks(panels + 1);
  for (int k = 0; k <= panels; ++k) breaks[k] = start + (hi - start) * k / panels;
  const auto rule = composite_gauss(breaks, order);
  for (std::size_t i = 0; i < rule.size(); ++i) acc.add(rule.weights[i] * f(rule.nodes[i]));
  return acc.value();
}

}  // namespace

double collision_frequency_radial(const CollisionModel& m, const FluidState& s, double speed) {
  m.validate();
  s.validate();
  if (!(speed >= 0 && std::isfinite(speed))) throw InvalidArgument("collision_frequency: bad speed");
  const double w = speed / s.sqrt_T();
  const double coarse = nu_radial_integral(m.gamma, w, 24);
  const double fine = nu_radial_integral(m.gamma, w, 48);
  if (!(std::fabs(fine - coarse) <= 1e-8 * std::fabs(fine)))
    throw NumericalError("collision_frequency: radial quadrature did not converge (coarse " +
                         std::to_string(coarse) + ", fine " + std::to_string(fine) + ")");
  const double pref = m.angular_mass() * s.rho * 4.0 * kPi * std::pow(2.0 * kPi, -1.5) *
                      std::pow(s.T, 0.5 * m.gamma);
  return pref * fine;
}

double collision_frequency(const CollisionModel& m, const FluidState& s, const Vec3& v) {
  if (!finite(v)) throw InvalidArgument("collision_frequency: non-finite velocity");
  return collision_frequency_radial(m, s, norm(v - s.u));
}

// ---------------------------------------------------------------------------
// kernels

KernelEvaluator::KernelEvaluator(const CollisionModel& m, const FluidState& s, K2Route route)
    : m_(m), s_(s), route_(route) {
  m_.validate();
  s_.validate();
  if (route_ == K2Route::Closed && m_.gamma != 1.0)
    throw InvalidArgument("kernel_k2: closed form requires gamma = 1");
  const double g = std::pow(2.0 * kPi * s_.T, -1.5);
  coef_ = m_.cosine_coefficient();
  k1_pref_ = m_.angular_mass() * s_.rho * g;
  k2_pref_ = 4.0 * s_.rho * g;
}

double KernelEvaluator::k1_frame(const Vec3& c, const Vec3& c1) const {
  const double a2 = norm2(c1 - c);
  double ag;
  if (a2 == 0.0) {
    if (m_.gamma < 0) throw SingularPoint("kernel_k1: coincident points with gamma < 0");
    ag = m_.gamma == 0 ? 1.0 : 0.0;
  } else {
    ag = std::pow(a2, 0.5 * m_.gamma);
  }
  return k1_pref_ * std::exp(-(norm2(c) + norm2(c1)) / (4.0 * s_.T)) * ag;
}

double KernelEvaluator::k2_frame(const Vec3& c, const Vec3& c1) const {
  const Vec3 z = c1 - c;
  const double a2 = norm2(z);
  if (a2 == 0.0) throw SingularPoint("kernel_k2: coincident points");
  const Vec3 mid = 0.5 * (c + c1);
  const double mz = dot(mid, z);
  const double b2 = std::max(0.0, norm2(mid) - mz * mz / a2);
  return k2_invariants(std::sqrt(a2), norm2(c1) - norm2(c), std::sqrt(b2));
}

KernelEvaluator::Pair KernelEvaluator::frame(const Vec3& c, const Vec3& c1) const {
  return {k1_frame(c, c1), k2_frame(c, c1)};
}

double KernelEvaluator::k2_invariants(double a, double delta, double b) const {
  if (!(a > 0)) throw SingularPoint("kernel_k2: coincident points");
  const double T = s_.T;
  const double expo = -a * a / (8.0 * T) - delta * delta / (8.0 * T * a * a);
  // exp underflows below this; the planar factor grows at most polynomially.
  if (expo < -740.0) return 0.0;
  const bool closed = route_ == K2Route::Closed || (route_ == K2Route::Automatic && m_.gamma == 1.0);
  if (closed) return 4.0 * coef_ * s_.rho / std::sqrt(2.0 * kPi * T) / a * std::exp(expo);
  return k2_pref_ / (a * a) * std::exp(expo) * planar_integral(a, b);
}

double KernelEvaluator::planar_integral(double a, double b) const {
  switch (route_) {
    case K2Route::Closed:
      return planar_closed(a);
    case K2Route::Planar2D:
      return planar_2d(a, b);
    case K2Route::Bessel:
      return planar_bessel(a, b);
    case K2Route::Automatic:
      return m_.gamma == 1.0 ? planar_closed(a) : planar_bessel(a, b);
  }
  return 0.0;
}

double KernelEvaluator::planar_closed(double a) const { return 2.0 * kPi * s_.T * coef_ * a; }

double KernelEvaluator::planar_bessel(double a, double b) const {
  const double T = s_.T, st = std::sqrt(T);
  const double span = 8.5 * st;
  const double lo = std::max(0.0, b - span), hi = b + span;
  const double e = 0.5 * (m_.gamma - 1.0);

  // Breaks: geometric grading at the scale a of the (a^2+s^2) factor, the
  // Gaussian centre b, and panels no wider than 3 sqrt(T).
  double breaks_buf[64];
  int nb = 0;
  breaks_buf[nb++] = lo;
  if (e != 0.0) {
    for (double p = a; p < hi && p < 8.0 * st && nb < 24; p *= 2.0)
      if (p > lo) breaks_buf[nb++] = p;
  }
  if (b > lo && b < hi) breaks_buf[nb++] = b;
  breaks_buf[nb++] = hi;
  std::sort(breaks_buf, breaks_buf + nb);

  const auto& g = gauss_legendre(10);
  double sum = 0.0;
  const double inv2T = 0.5 / T, bT = b / T;
  for (int p = 0; p + 1 < nb; ++p) {
    const double pa = breaks_buf[p], pb = breaks_buf[p + 1];
    if (pb <= pa) continue;
    const int sub = std::max(1, static_cast<int>(std::ceil((pb - pa) / (3.0 * st))));
    const double w = (pb - pa) / sub;
    for (int q = 0; q < sub; ++q) {
      const double x0 = pa + q * w, half = 0.5 * w, mid = x0 + half;
      double panel = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double s = mid + half * g.nodes[i];
        const double d = s - b;
        double v = s * std::exp(-d * d * inv2T) * bessel_i0_scaled(s * bT);
        if (e != 0.0) v *= std::pow(a * a + s * s, e);
        panel += g.weights[i] * v;
      }
      sum += half * panel;
    }
  }
  return 2.0 * kPi * coef_ * a * sum;
}

double KernelEvaluator::planar_2d(double a, double b) const {
  // Polar coordinates centred on the Gaussian peak; the angular factor is
  // evaluated at the distance to the displacement axis.
  const double T = s_.T, e = 0.5 * (m_.gamma - 1.0);
  const auto radial = gauss_legendre(64, 0.0, 10.0 * std::sqrt(T));
  const auto angular = gauss_legendre(32, 0.0, 2.0 * kPi);
  CompensatedSum acc;
  for (std::size_t i = 0; i < radial.size(); ++i) {
    const double r = radial.nodes[i];
    const double gauss = std::exp(-r * r / (2.0 * T)) * r * radial.weights[i];
    for (std::size_t j = 0; j < angular.size(); ++j) {
      const double s2 = r * r + b * b - 2.0 * r * b * std::cos(angular.nodes[j]);
      acc.add(gauss * angular.weights[j] * std::pow(a * a + std::max(0.0, s2), e));
    }
  }
  return coef_ * a * acc.value();
}

double kernel_k1(const CollisionModel& m, const FluidState& s, const Vec3& v, const Vec3& v1) {
  if (!finite(v) || !finite(v1)) throw InvalidArgument("kernel_k1: non-finite velocity");
  return KernelEvaluator(m, s).k1_frame(v - s.u, v1 - s.u);
}

double kernel_k2(const CollisionModel& m, const FluidState& s, const Vec3& v, const Vec3& v1,
                 K2Route route) {
  if (!finite(v) || !finite(v1)) throw InvalidArgument("kernel_k2: non-finite velocity");
  return KernelEvaluator(m, s, route).k2_frame(v - s.u, v1 - s.u);
}

// ---------------------------------------------------------------------------
// envelopes and admissibility

FBound lemma_f_bound(double gamma, double b0, double a) {
  if (!(gamma > -3.0 && gamma <= 1.0)) throw InvalidArgument("lemma_f_bound: gamma must lie in (-3,1]");
  if (!(b0 >= 0 && b0 <= 1.0 - gamma)) throw InvalidArgument("lemma_f_bound: b0 must lie in [0,1-gamma]");
  if (!(a > 0 && std::isfinite(a))) throw InvalidArgument("lemma_f_bound: a must be positive");
  FBound r;
  const double expo = b0 + gamma - 1.0;
  if (gamma == 1.0) {
    r.lemma_case = 1;  // f identically 1
    r.c0 = 1.0;
    r.max_location = 0.0;
  } else if (b0 == 0.0) {
    r.lemma_case = 2;  // decreasing, sup at x -> 0+
    r.c0 = 1.0;
    r.max_location = 0.0;
  } else if (expo == 0.0) {
    r.lemma_case = 4;  // increasing, sup 1 at x -> infinity
    r.c0 = 1.0;
    r.max_location = std::numeric_limits<double>::infinity();
  } else {
    r.lemma_case = 3;
    const double d = 1.0 - gamma - b0;
    r.c0 = std::pow(b0, 0.5 * b0) * std::pow(1.0 - gamma, 0.5 * (gamma - 1.0)) / std::pow(d, 0.5 * expo);
    r.max_location = std::sqrt(b0 * a * a / d);
  }
  r.max_value = r.c0 * std::pow(a, expo);
  return r;
}

double envelope_constant_c1(const CollisionModel& m) {
  const double c0 = lemma_f_bound(m.gamma, m.b0, 1.0).c0;
  return 8.0 * kPi * m.cosine_coefficient() * std::max(1.0, c0 * (3.0 - m.b0) / (2.0 - m.b0));
}

KernelEnvelopes kernel_envelopes(const CollisionModel& m, const FluidState& s, const Vec3& z) {
  m.validate();
  s.validate();
  const double r2 = norm2(z);
  if (!(r2 > 0)) throw InvalidArgument("kernel_envelopes: z must be nonzero");
  const double base = s.rho * std::pow(2.0 * kPi * s.T, -1.5) * std::exp(-r2 / (8.0 * s.T));
  const double r = std::sqrt(r2);
  KernelEnvelopes e;
  e.k1_bar = m.angular_mass() * base * std::pow(r, m.gamma);
  e.k2_bar = envelope_constant_c1(m) * base * (1.0 + s.T) *
             std::exp(norm2(s.u) / (2.0 * m.epsilon * s.T)) * std::pow(r, -(2.0 - m.b0 - m.gamma));
  return e;
}

bool Interval::contains(double x) const {
  const bool above = lo_closed ? x >= lo : x > lo;
  const bool below = hi_closed ? x <= hi : x < hi;
  return above && below;
}

bool Interval::empty() const {
  if (lo < hi) return false;
  return !(lo == hi && lo_closed && hi_closed);
}

Admissibility admissible_b0(double gamma, bool require_l2) {
  if (!(gamma > -3.0 && gamma <= 1.0)) throw InvalidArgument("admissible_b0: gamma must lie in (-3,1]");
  Admissibility a;
  if (gamma > -1.0)
    a.phi1 = {0.0, 1.0 - gamma, true, true};
  else
    a.phi1 = {-gamma - 1.0, 2.0, false, false};

  if (gamma > -1.5) {
    // Intersect with the open half-line b0 > -gamma + 1/2.
    Interval i = a.phi1;
    const double l2_lo = -gamma + 0.5;
    if (l2_lo >= i.lo) {
      i.lo = l2_lo;
      i.lo_closed = false;
    }
    if (!i.empty()) a.phi12 = i;
  }
  if (require_l2 && !a.phi12)
    throw InvalidArgument("admissible_b0: empty admissibility set (L2 route needs gamma > -3/2)");

  if (gamma > -1.0)
    a.default_b0 = 1.0 - gamma;
  else if (gamma > -1.5)
    a.default_b0 = 0.5 * (-gamma + 0.5 + 2.0);
  else
    a.default_b0 = a.phi1.midpoint();
  return a;
}

}  // namespace boltzinv
