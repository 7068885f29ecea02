#include <doctest.h>

#include "boltzinv/probes.hpp"

using namespace boltzinv;

namespace {

const FluidState kState;

std::vector<double> values(const GridFunction& f) { return {f.values().begin(), f.values().end()}; }

const DiscreteLinearizedOperator& op_for(double gamma) {
  static const auto hard = assemble(make_model(1.0), kState, build_grid(kState, 6.0, 8));
  static const auto soft = assemble(make_model(-1.0), kState, build_grid(kState, 6.0, 8));
  return gamma == 1.0 ? hard : soft;
}

// Weighted constant written with dense vectors; mirrors the definition, not the code.
double weighted_constant(const DiscreteLinearizedOperator& op, double q, const std::vector<GridFunction>& fam,
                         double fraction) {
  const Eigen::Index N = static_cast<Eigen::Index>(op.size());
  const Eigen::Map<const Eigen::VectorXd> nu(op.nu.data(), N);
  Eigen::MatrixXd L = op.K;
  L.diagonal() += nu;
  Eigen::VectorXd w2 = Eigen::VectorXd::Zero(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const Vec3 v = op.grid->node(i);
    if (norm(v - op.state.u) <= fraction * op.grid->half_width()) w2[i] = std::pow(maxwellian_eval(op.state, v), -q);
  }
  const Eigen::VectorXd theta =
      op.model.gamma < 0 ? Eigen::VectorXd(nu.cwiseInverse()) : Eigen::VectorXd(Eigen::VectorXd::Ones(N));
  const Eigen::VectorXd rhs_w = op.model.gamma < 0 ? w2 : Eigen::VectorXd(w2.cwiseProduct(nu));
  double C = 0;
  for (const auto& g : fam) {
    const Eigen::Map<const Eigen::VectorXd> f(g.values().data(), N);
    const double lhs = (theta.cwiseProduct(w2).cwiseProduct(L * f)).dot(f);
    const double rhs = rhs_w.cwiseProduct(f).dot(f);
    C = std::max(C, (0.5 * rhs - lhs) / nu.cwiseProduct(f).dot(f));
  }
  return C;
}

}  // namespace

TEST_CASE("probe family") {
  const auto& op = op_for(1.0);
  const auto a = probe_family(op, 6, 42), b = probe_family(op, 6, 42), c = probe_family(op, 6, 43);
  REQUIRE(a.size() == 6);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(values(a[k]) == values(b[k]));
    CHECK(values(a[k]) != values(c[k]));
    CHECK(l2_norm(a[k]) > 0.0);
    for (const auto& phi : op.phi) CHECK(std::fabs(inner_product(a[k], phi)) <= 1e-13 * l2_norm(a[k]));
  }
  // A longer family extends the shorter one.
  CHECK(values(probe_family(op, 8, 42)[5]) == values(a[5]));
}

TEST_CASE("polynomial family") {
  const auto& op = op_for(1.0);
  const auto mixed = probe_family(op, 4, 42);
  const auto poly = polynomial_family(op, 4, 42);
  REQUIRE(poly.size() == 4);
  CHECK(values(poly[0]) == values(mixed[0]));
  CHECK(values(poly[2]) == values(mixed[2]));
  CHECK(values(poly[1]) != values(mixed[1]));
  for (const auto& f : poly) {
    for (const auto& phi : op.phi) CHECK(std::fabs(inner_product(f, phi)) <= 1e-13 * l2_norm(f));
    // Cubic times sqrt(M): even after projection it is negligible at the box corner.
    CHECK(std::fabs(f[0]) <= 1e-6 * f.max_abs());
  }
}

TEST_CASE("weighted hypocoercivity constant") {
  for (double gamma : {1.0, -1.0}) {
    INFO("gamma = " << gamma);
    const auto& op = op_for(gamma);
    const auto fam = probe_family(op, 10, 42);
    for (double q : {0.3, 0.5, 0.7}) {
      const HypoReport r = weighted_hypocoercivity_probe(op, q, fam, 0.8);
      CHECK(r.family_size == 10);
      CHECK(r.restricted);
      CHECK(r.trusted_radius == doctest::Approx(4.8));
      CHECK(std::isfinite(r.C_weighted));
      CHECK(r.C_weighted >= 0.0);
      CHECK(r.C_weighted == doctest::Approx(std::max(0.0, weighted_constant(op, q, fam, 0.8))).epsilon(1e-9).scale(1e-12));
    }
    // Scale invariance of the constant.
    std::vector<GridFunction> scaled;
    for (const auto& f : fam) scaled.push_back(3.0 * f);
    CHECK(weighted_hypocoercivity_probe(op, 0.5, scaled).C_weighted ==
          doctest::Approx(weighted_hypocoercivity_probe(op, 0.5, fam).C_weighted).epsilon(1e-12));
  }
  const auto& op = op_for(1.0);
  const auto fam = probe_family(op, 2, 1);
  CHECK_THROWS_AS(weighted_hypocoercivity_probe(op, 1.0, fam), InvalidArgument);
  CHECK_THROWS_AS(weighted_hypocoercivity_probe(op, 0.5, std::span<const GridFunction>{}), InvalidArgument);
  CHECK_THROWS_AS(weighted_hypocoercivity_probe(op, 0.5, fam, 0.0), InvalidArgument);
}

TEST_CASE("chi split table") {
  const auto& op = op_for(1.0);
  const auto fam = probe_family(op, 6, 42);
  const std::vector<double> radii{1.0, 2.0, 3.0, 4.0};
  const auto t = chi_split_probe(op, radii, 0.5, fam);
  REQUIRE(t.rows.size() == 4);
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    CHECK(t.rows[k].r == radii[k]);
    CHECK(t.rows[k].partition_error <= 1e-12);
    CHECK(std::isfinite(t.rows[k].low_bound_const));
    CHECK(std::isfinite(t.rows[k].high_small_factor));
  }
  // Larger cutoff radius moves kernel mass into the low part.
  CHECK(t.rows.back().high_small_factor <= t.rows.front().high_small_factor);
  CHECK(t.noise == 0.1);
}

TEST_CASE("shell profile") {
  const auto g = build_grid(kState, 6.0, 12);
  const auto env = sample(g, [](const Vec3& v) { return std::exp(-0.25 * norm2(v)); });
  auto envelope = [&](std::size_t i) { return env[i]; };
  // f equal to the envelope: flat profile.
  const auto flat = shell_profile(env, envelope, {}, 4.8, 8);
  CHECK(flat.finite);
  CHECK(flat.plateau_ratio == doctest::Approx(1.0));
  for (double w : flat.W) CHECK(w == doctest::Approx(1.0));

  // Ratio growing linearly with the radius: W is the shell maximum.
  GridFunction f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = env[i] * (1.0 + norm(g->node(i)));
  const auto grow = shell_profile(f, envelope, {}, 4.8, 8);
  double expect_max = 0, expect_min = 1e300;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double s = norm(g->node(i));
    if (s <= 4.8) {
      expect_max = std::max(expect_max, 1.0 + s);
      expect_min = std::min(expect_min, 1.0 + s);
    }
  }
  CHECK(grow.W.back() == doctest::Approx(expect_max));
  CHECK(grow.plateau_ratio == doctest::Approx(expect_max / expect_min));
  for (std::size_t k = 1; k < grow.W.size(); ++k) CHECK(grow.W[k] > grow.W[k - 1]);

  // The innermost nodes sit at radius 0.87, so fine shells near the origin are merged.
  const auto fine = shell_profile(env, envelope, {}, 4.8, 32);
  CHECK_FALSE(fine.warnings.empty());
  CHECK(fine.W.size() < 32);
  CHECK(fine.shell_radii.back() == doctest::Approx(4.8));

  auto zero = [](std::size_t) { return 0.0; };
  CHECK_FALSE(shell_profile(env, zero, {}, 4.8, 8).finite);
  CHECK_THROWS_AS(shell_profile(env, envelope, {}, 0.1, 8), InvalidArgument);
  CHECK_THROWS_AS(shell_profile(env, envelope, {}, 4.8, 0), InvalidArgument);
}

TEST_CASE("decay profile against the Maxwellian envelope") {
  const auto& op = op_for(1.0);
  // f = M^(q/2) exactly gives W = 1 on every shell.
  const double q = 0.5;
  const auto f = sample(op.grid, [&](const Vec3& v) { return std::pow(maxwellian_eval(kState, v), 0.5 * q); });
  const auto p = decay_profile(op, f, q);
  CHECK(p.finite);
  CHECK(p.q == q);
  CHECK(p.gamma == 1.0);
  CHECK(p.trusted_radius == doctest::Approx(0.8 * 6.0));
  CHECK(p.plateau_ratio == doctest::Approx(1.0));

  // Soft potentials divide by nu in the envelope.
  const auto& soft = op_for(-1.0);
  GridFunction g(soft.grid);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = f[i] / soft.nu[i];
  CHECK(decay_profile(soft, g, q).plateau_ratio == doctest::Approx(1.0));
  CHECK_THROWS_AS(decay_profile(op, f, 0.0), InvalidArgument);
  CHECK_THROWS_AS(decay_profile(op, GridFunction(build_grid(kState, 6.0, 10)), q), InvalidArgument);
}
