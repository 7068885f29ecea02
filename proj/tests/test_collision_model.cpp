#include <doctest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/quadrature/trapezoidal.hpp>
#include <boost/math/tools/minima.hpp>

#include "boltzinv/checks.hpp"
#include "boltzinv/quadrature.hpp"

using namespace boltzinv;

namespace {

// Hard-sphere collision frequency in closed form (rho = 1, T = 1, unit angular mass).
double nu_hard_sphere(double s) {
  if (s == 0) return 2.0 * std::sqrt(2.0 / kPi);
  return std::sqrt(2.0 / kPi) * std::exp(-0.5 * s * s) + (s + 1.0 / s) * std::erf(s / std::sqrt(2.0));
}

// Integral of (k2 - k1)(c, c1) psi(c1) over c1 in spherical coordinates around c.
double apply_kernel(const KernelEvaluator& k, const Vec3& c, const std::function<double(const Vec3&)>& psi) {
  std::vector<double> breaks;
  for (double b = 0; b <= 14.0; b += 1.0) breaks.push_back(b);
  const auto radial = composite_gauss(breaks, 16);
  const auto& polar = gauss_legendre(32);
  const auto azimuth = periodic_trapezoid(24);
  const Frame f = frame_along(c);
  CompensatedSum acc;
  for (std::size_t i = 0; i < radial.size(); ++i) {
    const double r = radial.nodes[i];
    for (std::size_t j = 0; j < polar.size(); ++j) {
      const double t = polar.nodes[j], sn = std::sqrt(1 - t * t);
      for (std::size_t l = 0; l < azimuth.size(); ++l) {
        const double ph = azimuth.nodes[l];
        const Vec3 c1 = c + r * (t * f.e3 + sn * std::cos(ph) * f.e1 + sn * std::sin(ph) * f.e2);
        acc.add(radial.weights[i] * polar.weights[j] * azimuth.weights[l] * r * r *
                -k.frame(c, c1).value() * psi(c1));
      }
    }
  }
  return acc.value();
}

}  // namespace

TEST_CASE("hard-sphere collision frequency matches the closed form") {
  const auto m = make_model(1.0);
  const FluidState s;
  for (double sp : {0.0, 0.1, 0.5, 1.0, 2.0, 3.5, 6.0, 10.0})
    CHECK(collision_frequency_radial(m, s, sp) == doctest::Approx(nu_hard_sphere(sp)).epsilon(1e-10));
  // Value at rest, frozen: 2 sqrt(2/pi).
  CHECK(collision_frequency(m, s, {}) == doctest::Approx(1.5957691216057308).epsilon(1e-12));
}

TEST_CASE("collision frequency scaling") {
  const FluidState s{2.0, {1.0, 0.0, 0.0}, 3.0};
  // gamma = 0 gives rho times the angular mass everywhere.
  CHECK(collision_frequency(make_model(0.0), s, {4.0, 1.0, 0.0}) == doctest::Approx(2.0).epsilon(1e-10));
  // Temperature scaling T^(gamma/2) at fixed reduced speed.
  const auto m = make_model(-1.0);
  const double a = collision_frequency_radial(m, FluidState{}, 1.3);
  const double b = collision_frequency_radial(m, FluidState{1.0, {}, 4.0}, 2.6);
  CHECK(b == doctest::Approx(a * 0.5).epsilon(1e-10));
}

TEST_CASE("gain kernel routes agree at gamma = 1") {
  const auto m = make_model(1.0);
  const FluidState s{1.0, {0.2, 0.0, -0.1}, 1.3};
  CounterRng rng(7, 1);
  for (int k = 0; k < 30; ++k) {
    const Vec3 v{rng.normal(), rng.normal(), rng.normal()}, v1{rng.normal(), 2 * rng.normal(), rng.normal()};
    const double c = kernel_k2(m, s, v, v1, K2Route::Closed);
    CHECK(kernel_k2(m, s, v, v1, K2Route::Planar2D) == doctest::Approx(c).epsilon(1e-7));
    CHECK(kernel_k2(m, s, v, v1, K2Route::Bessel) == doctest::Approx(c).epsilon(1e-9));
  }
  CHECK_THROWS_AS(kernel_k2(make_model(0.0), s, {}, {1, 0, 0}, K2Route::Closed), InvalidArgument);
  CHECK_THROWS_AS(kernel_k2(m, s, {1, 2, 3}, {1, 2, 3}), SingularPoint);
  CHECK_THROWS_AS(kernel_k1(make_model(-1.0), s, {1, 2, 3}, {1, 2, 3}), SingularPoint);
}

TEST_CASE("planar integral routes for soft and intermediate kernels") {
  // Oracle: integral over the plane of exp(-|y - b e|^2 / 2T) (a^2 + |y|^2)^e in polar
  // coordinates around the axis, periodic trapezoid in angle and tanh-sinh in radius.
  auto oracle = [](double g, double a, double b) {
    const double e = 0.5 * (g - 1.0);
    auto ang = [&](double s) {
      return boost::math::quadrature::trapezoidal(
          [&](double p) { return std::exp(-(s * s + b * b - 2 * s * b * std::cos(p)) / 2.0); }, 0.0,
          2 * kPi, 1e-14);
    };
    auto f = [&](double s) { return s * std::pow(a * a + s * s, e) * ang(s); };
    boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate(f, 0.0, a) + ts.integrate(f, a, b + a + 12.0);
  };
  for (double g : {0.5, 0.0, -1.0, -1.4}) {
    const auto m = make_model(g);
    const KernelEvaluator bessel(m, FluidState{}, K2Route::Bessel), planar(m, FluidState{}, K2Route::Planar2D);
    const double scale = m.cosine_coefficient();
    for (double a : {0.2, 1.0, 3.0})
      for (double b : {0.0, 0.7, 2.5}) {
        const double ref = scale * oracle(g, a, b) * a;
        INFO("gamma = " << g << " a = " << a << " b = " << b);
        CHECK(bessel.planar_integral(a, b) == doctest::Approx(ref).epsilon(1e-9));
        CHECK(planar.planar_integral(a, b) == doctest::Approx(ref).epsilon(1e-3));
      }
  }
}

TEST_CASE("kernels annihilate the collision invariants") {
  // K psi = nu psi for psi = sqrt(M) {1, c, |c|^2}, the defining identity of the split.
  for (double g : {1.0, 0.0, -1.0}) {
    const auto m = make_model(g);
    const FluidState s;
    const KernelEvaluator k(m, s);
    const Vec3 c{0.7, -0.3, 0.5};
    const double nu = collision_frequency(m, s, c);
    const std::function<double(const Vec3&)> psis[] = {
        [&](const Vec3& x) { return sqrt_maxwellian(s, x); },
        [&](const Vec3& x) { return x.x * sqrt_maxwellian(s, x); },
        [&](const Vec3& x) { return norm2(x) * sqrt_maxwellian(s, x); },
    };
    for (const auto& psi : psis) {
      INFO("gamma = " << g);
      CHECK(apply_kernel(k, c, psi) == doctest::Approx(nu * psi(c)).epsilon(2e-5));
    }
  }
}

TEST_CASE("envelopes dominate the kernels") {
  const FluidState s;
  for (double g : {1.0, 0.0, -1.0, -1.4}) {
    const EnvelopeCheck e = envelope_check(g, s, 2000, 42, 1e-12);
    INFO("gamma = " << g);
    CHECK(e.k1_violations == 0);
    CHECK(e.k2_violations == 0);
    CHECK(e.max_ratio_k1 <= 1.0 + 1e-12);
    CHECK(std::isfinite(e.k2_bar_l1));
    if (g >= 0) {
      // Radial integrand is 4 pi z exp(-z^2/8) here, so the tail share is exp(-100/8).
      CHECK(e.k2_bar_tail_fraction == doctest::Approx(std::exp(-12.5)).epsilon(1e-8));
    } else {
      CHECK(e.k2_bar_tail_fraction < 1e-5);
    }
  }
  // Loss envelope L1 norm at gamma = 1: (2 pi)^(-3/2) 4 pi * 32.
  const auto m = make_model(1.0);
  const double l1 = boost::math::quadrature::exp_sinh<double>().integrate(
      [&](double z) { return z * z > 0 ? 4 * kPi * z * z * kernel_envelopes(m, s, {0, z, 0}).k1_bar : 0.0; });
  CHECK(l1 == doctest::Approx(std::pow(2 * kPi, -1.5) * 4 * kPi * 32).epsilon(1e-10));
  CHECK(l1 == doctest::Approx(25.531).epsilon(1e-4));
}

TEST_CASE("envelope function bound") {
  // gamma = 0, b0 = 1/2, a = 1: sup of sqrt(x / (x^2 + 1)) is 1/sqrt(2) at x = 1.
  const FBound f = lemma_f_bound(0.0, 0.5, 1.0);
  CHECK(f.lemma_case == 3);
  CHECK(f.c0 == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(f.max_location == doctest::Approx(1.0).epsilon(1e-15));
  // Independent maximization for a few triples.
  for (auto [g, b0, a] : {std::tuple{-1.0, 1.2, 0.3}, std::tuple{0.5, 0.25, 4.0}, std::tuple{-2.5, 3.0, 1.7}}) {
    const FBound fb = lemma_f_bound(g, b0, a);
    auto h = [&](double x) { return -std::pow(x, b0) * std::pow(x * x + a * a, 0.5 * (g - 1.0)); };
    const auto [x, y] = boost::math::tools::brent_find_minima(h, 1e-6 * a, 100.0 * a, 60);
    CHECK(-y == doctest::Approx(fb.max_value).epsilon(1e-12));
    CHECK(x == doctest::Approx(fb.max_location).epsilon(1e-6));
  }
  CHECK(lemma_f_bound(1.0, 0.0, 2.0).lemma_case == 1);
  CHECK(lemma_f_bound(-0.5, 0.0, 2.0).lemma_case == 2);
  CHECK(lemma_f_bound(-0.5, 1.5, 2.0).lemma_case == 4);
  CHECK_THROWS_AS(lemma_f_bound(0.0, 1.5, 1.0), InvalidArgument);
  CHECK_THROWS_AS(lemma_f_bound(0.0, 0.5, 0.0), InvalidArgument);

  const LemmaFCheck lc = lemma_f_check(20, 42);
  CHECK(lc.max_ratio <= 1.0 + 1e-9);
  CHECK(lc.max_location_error <= 1e-6);
  CHECK(lc.case3 > 0);
}

TEST_CASE("admissible envelope exponents") {
  const auto a0 = admissible_b0(0.0);
  CHECK(a0.phi1.contains(0.0));
  CHECK(a0.phi1.contains(1.0));
  REQUIRE(a0.phi12);
  CHECK_FALSE(a0.phi12->contains(0.5));
  CHECK(a0.phi12->contains(0.75));
  CHECK(a0.default_b0 == 1.0);

  const auto a14 = admissible_b0(-1.4);
  CHECK_FALSE(a14.phi1.contains(0.39));
  CHECK(a14.phi1.contains(1.0));
  REQUIRE(a14.phi12);
  CHECK(a14.phi12->lo == doctest::Approx(1.9));
  CHECK(a14.phi12->contains(a14.default_b0));

  CHECK_FALSE(admissible_b0(-2.0).phi12);
  CHECK_THROWS_WITH_AS(admissible_b0(-2.0, true), doctest::Contains("empty admissibility set"), InvalidArgument);
  CHECK_THROWS_AS(admissible_b0(1.5), InvalidArgument);
  CHECK_THROWS_AS(make_model(0.0, 2.0), InvalidArgument);
}

TEST_CASE("scaled Bessel function") {
  for (double x : {0.0, 0.3, 5.0, 49.9, 50.1, 80.0, 300.0})
    CHECK(bessel_i0_scaled(x) == doctest::Approx(boost::math::cyl_bessel_i(0, x) * std::exp(-x)).epsilon(1e-13));
  CHECK_THROWS_AS(bessel_i0_scaled(-1.0), InvalidArgument);
}

TEST_CASE("angular family") {
  const auto m = make_model(1.0);
  CHECK(m.angular_mass() == doctest::Approx(1.0));
  CHECK(angular_beta(m, 0.0) == doctest::Approx(1.0 / (2 * kPi)));
  CHECK(angular_beta(m, kPi / 2) == doctest::Approx(0.0).scale(1.0));
  CollisionModel hs = m;
  hs.angular = AngularFamily::HardSphereBeta0;
  hs.beta0 = 0.25;
  CHECK(hs.angular_mass() == doctest::Approx(0.5 * kPi));
  CHECK(angular_family_from_string(to_string(hs.angular)) == AngularFamily::HardSphereBeta0);
  CHECK_THROWS_AS(angular_family_from_string("isotropic"), InvalidArgument);
  CHECK_THROWS_AS(angular_beta(m, 4.0), InvalidArgument);
}
