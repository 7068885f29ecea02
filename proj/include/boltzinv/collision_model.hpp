#pragma once

#include <optional>
#include <string>

#include "boltzinv/maxwellian.hpp"
#include "boltzinv/quadrature.hpp"

namespace boltzinv {

enum class AngularFamily {
  NormalizedCosine,  // beta = |cos theta| / (2 pi)
  HardSphereBeta0,   // beta = beta0 |cos theta| with caller-supplied beta0
};

struct CollisionModel {
  double gamma = 1.0;
  AngularFamily angular = AngularFamily::NormalizedCosine;
  double beta0 = 1.0 / (2.0 * kPi);
  double b0 = 0.0;
  double epsilon = 0.5;

  void validate() const;
  // Coefficient c in beta(theta) = c |cos theta|.
  double cosine_coefficient() const;
  // Integral of beta over the unit sphere.
  double angular_mass() const { return 2.0 * kPi * cosine_coefficient(); }
};

// Model with the default envelope exponent for this gamma (see admissible_b0).
CollisionModel make_model(double gamma, std::optional<double> b0 = std::nullopt,
                          double epsilon = 0.5);

std::string to_string(AngularFamily f);
AngularFamily angular_family_from_string(const std::string& s);

double angular_beta(const CollisionModel& m, double theta);

double collision_frequency(const CollisionModel& m, const FluidState& s, const Vec3& v);

// Collision frequency as a function of the peculiar speed |v - u| only.
double collision_frequency_radial(const CollisionModel& m, const FluidState& s, double speed);

enum class K2Route {
  Automatic,  // closed form at gamma = 1, Bessel-reduced planar integral otherwise
  Closed,     // gamma = 1 only
  Bessel,     // planar integral with the angle done analytically
  Planar2D,   // direct polar quadrature of the planar integral
};

double kernel_k1(const CollisionModel& m, const FluidState& s, const Vec3& v, const Vec3& v1);
double kernel_k2(const CollisionModel& m, const FluidState& s, const Vec3& v, const Vec3& v1,
                 K2Route route = K2Route::Automatic);

// Cached evaluator for the loss and gain kernels. All inputs are peculiar
// velocities c = v - u, in which frame both kernels are isotropic.
class KernelEvaluator {
 public:
  KernelEvaluator(const CollisionModel& m, const FluidState& s,
                  K2Route route = K2Route::Automatic);

  struct Pair {
    double k1 = 0;
    double k2 = 0;
    double value() const { return k1 - k2; }
  };

  Pair frame(const Vec3& c, const Vec3& c1) const;
  double k1_frame(const Vec3& c, const Vec3& c1) const;
  double k2_frame(const Vec3& c, const Vec3& c1) const;

  // Gain kernel from its invariants: a = |c1 - c|, delta = |c1|^2 - |c|^2,
  // b = distance of (c + c1)/2 from the line spanned by c1 - c.
  double k2_invariants(double a, double delta, double b) const;
  // Planar integral over y perpendicular to the displacement (in the rest frame).
  double planar_integral(double a, double b) const;

  const CollisionModel& model() const { return m_; }
  const FluidState& state() const { return s_; }

 private:
  double planar_closed(double a) const;
  double planar_bessel(double a, double b) const;
  double planar_2d(double a, double b) const;

  CollisionModel m_;
  FluidState s_;
  K2Route route_;
  double k1_pref_;
  double k2_pref_;
  double coef_;
};

struct KernelEnvelopes {
  double k1_bar = 0;
  double k2_bar = 0;
};

KernelEnvelopes kernel_envelopes(const CollisionModel& m, const FluidState& s, const Vec3& z);
double envelope_constant_c1(const CollisionModel& m);

struct FBound {
  double c0 = 1;
  double max_location = 0;  // 0 stands for the limit x -> 0+, infinity for x -> inf
  double max_value = 1;
  int lemma_case = 1;
};

// Sup of f(x) = x^b0 (x^2 + a^2)^((gamma-1)/2) over x > 0, with its constant c0.
FBound lemma_f_bound(double gamma, double b0, double a);

struct Interval {
  double lo = 0, hi = 0;
  bool lo_closed = true, hi_closed = true;

  bool contains(double x) const;
  bool empty() const;
  double midpoint() const { return 0.5 * (lo + hi); }
};

struct Admissibility {
  Interval phi1;
  std::optional<Interval> phi12;  // present when the L2 route is available
  double default_b0 = 0;
};

// Admissible envelope exponents. With require_l2 the L2 sub-interval must be
// non-empty, otherwise InvalidArgument.
Admissibility admissible_b0(double gamma, bool require_l2 = false);

// Exponentially scaled modified Bessel function exp(-x) I0(x), x >= 0.
double bessel_i0_scaled(double x);

}  // namespace boltzinv
