#include <doctest.h>

#include <boost/math/quadrature/gauss.hpp>

#include "boltzinv/maxwellian.hpp"

using namespace boltzinv;

namespace {

// Tensor composite Gauss-Legendre over the cube u +- 12 sqrt(T); independent of the library rules.
template <class F>
double cube_integral(const FluidState& s, F&& f) {
  using G = boost::math::quadrature::gauss<double, 20>;
  const double L = 12.0 * s.sqrt_T();
  constexpr int kPanels = 8;
  auto axis = [&](int a, auto&& inner) {
    double sum = 0;
    for (int p = 0; p < kPanels; ++p) {
      const double lo = s.u[a] - L + 2 * L * p / kPanels, hi = lo + 2 * L / kPanels;
      sum += G::integrate([&](double x) { return inner(x); }, lo, hi);
    }
    return sum;
  };
  return axis(0, [&](double x) {
    return axis(1, [&](double y) { return axis(2, [&](double z) { return f(Vec3{x, y, z}); }); });
  });
}

const FluidState kState{1.7, {0.3, -0.4, 0.2}, 0.8};

}  // namespace

TEST_CASE("maxwellian moments reproduce the state") {
  const auto& s = kState;
  const double mass = cube_integral(s, [&](const Vec3& v) { return maxwellian_eval(s, v); });
  CHECK(mass == doctest::Approx(s.rho).epsilon(1e-12));
  for (int a = 0; a < 3; ++a) {
    const double mom = cube_integral(s, [&](const Vec3& v) { return v[a] * maxwellian_eval(s, v); });
    CHECK(mom / mass == doctest::Approx(s.u[a]).epsilon(1e-12));
  }
  const double energy =
      cube_integral(s, [&](const Vec3& v) { return norm2(v - s.u) * maxwellian_eval(s, v); });
  CHECK(energy / (3.0 * mass) == doctest::Approx(s.T).epsilon(1e-12));
}

TEST_CASE("mass inside a 7 sqrt(T) box") {
  const FluidState s{1.0, {}, 2.0};
  const double L = 7.0 * s.sqrt_T();
  using G = boost::math::quadrature::gauss<double, 30>;
  auto line = [&](double x) { return maxwellian_eval(s, {x, 0, 0}) / maxwellian_eval(s, {}); };
  double one_d = 0;
  for (int p = 0; p < 4; ++p) one_d += G::integrate(line, -L + p * L / 2, -L + (p + 1) * L / 2);
  const double mass = maxwellian_eval(s, {}) * std::pow(one_d, 3);
  CHECK(std::fabs(mass - s.rho) <= 1e-9 * s.rho + 1e-11);
}

TEST_CASE("square root and log forms agree") {
  const Vec3 v{1.0, 2.0, -0.5};
  const double m = maxwellian_eval(kState, v);
  CHECK(sqrt_maxwellian(kState, v) * sqrt_maxwellian(kState, v) == doctest::Approx(m).epsilon(1e-14));
  CHECK(std::exp(log_maxwellian(kState, v)) == doctest::Approx(m).epsilon(1e-14));
  // Far tail stays finite in log space.
  CHECK(std::isfinite(log_maxwellian(kState, {1e3, 0, 0})));
  CHECK(maxwellian_eval(kState, {1e3, 0, 0}) == 0.0);
}

TEST_CASE("invalid states are rejected") {
  CHECK_THROWS_AS(FluidState({1.0, {}, 0.0}).validate(), InvalidArgument);
  CHECK_THROWS_AS(FluidState({-1.0, {}, 1.0}).validate(), InvalidArgument);
  CHECK_THROWS_AS(FluidState({1.0, {NAN, 0, 0}, 1.0}).validate(), InvalidArgument);
  CHECK_THROWS_AS(maxwellian_eval(FluidState{1.0, {}, -2.0}, {}), InvalidArgument);
  CHECK_THROWS_AS(log_maxwellian(FluidState{}, {INFINITY, 0, 0}), InvalidArgument);
}

TEST_CASE("invariant basis is orthonormal in L2(dv)") {
  const PsiBasis psi(kState);
  for (int a = 0; a < 5; ++a)
    for (int b = a; b < 5; ++b) {
      const double g = cube_integral(kState, [&](const Vec3& v) { return psi(a, v) * psi(b, v); });
      CHECK(g == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-11).scale(1.0));
    }
  CHECK_THROWS_AS(psi(5, {}), InvalidArgument);
}

TEST_CASE("weight and envelope prefactor") {
  const WeightSpec w{0.5, 1.0, 2.0};
  const Vec3 v{1.0, -1.0, 0.5};
  const double expect = std::pow(1.0 + norm(v), 2.0) * std::pow(maxwellian_eval(kState, v), -0.25);
  CHECK(weight_eval(kState, w, v) == doctest::Approx(expect).epsilon(1e-13));
  CHECK(theta_gamma(0.5, 3.0) == 1.0);
  CHECK(theta_gamma(-1.0, 4.0) == doctest::Approx(0.25));
  CHECK_THROWS_AS(theta_gamma(-1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(weight_eval(kState, WeightSpec{1.2, 1.0, 0.0}, v), InvalidArgument);
  CHECK(WeightSpec{0.5, 1.0, 1.5}.k_gamma_admissible());
  CHECK_FALSE(WeightSpec{0.5, 1.0, 0.5}.k_gamma_admissible());
  CHECK(WeightSpec{0.5, -1.0, 2.6}.k_gamma_admissible());
  CHECK_FALSE(WeightSpec{0.5, -1.0, 2.4}.k_gamma_admissible());
}
