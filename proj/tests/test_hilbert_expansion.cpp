#include <doctest.h>

#include "boltzinv/hilbert.hpp"

using namespace boltzinv;

namespace {

const FluidState kState;

const DiscreteLinearizedOperator& hard_sphere_n8() {
  static const auto op = assemble(make_model(1.0), kState, build_grid(kState, 6.0, 8));
  return op;
}

const PseudoInverse& hard_sphere_inverse() {
  static const PseudoInverse inv(hard_sphere_n8());
  return inv;
}

// rho = 1 + 0.1 sin x1 at rest with T = 1: not an Euler solution.
AnalyticFluidField density_wave() {
  AnalyticFluidField f;
  f.id = "density_wave";
  f.jet = [](double, const Vec3& x) {
    FieldJet j;
    j.rho = 1.0 + 0.1 * std::sin(x.x);
    j.d_rho[1] = 0.1 * std::cos(x.x);
    return j;
  };
  return f;
}

double max_diff(const GridFunction& a, const GridFunction& b) { return (a - b).max_abs(); }

// A cheap collision rule; the algebraic properties below do not depend on its accuracy.
CollisionQuadratureOptions coarse_rule() {
  CollisionQuadratureOptions o;
  o.radial_order = 3;
  o.polar_order = 2;
  o.azimuth_count = 4;
  o.omega_polar = 3;
  o.omega_azimuth = 4;
  return o;
}

}  // namespace

TEST_CASE("Burnett functions") {
  const auto g = build_grid(kState, 6.0, 12);
  const auto phi = discrete_null_basis(kState, g);
  // Orthogonality holds in the continuum; the midpoint rule at h = 1 leaves a few 1e-6.
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const auto A = burnett_A(kState, g, i, j);
      CHECK(max_diff(A, burnett_A(kState, g, j, i)) == 0.0);
      for (const auto& p : phi) CHECK(std::fabs(inner_product(A, p)) <= 1e-5);
    }
    const auto B = burnett_B(kState, g, i);
    for (const auto& p : phi) CHECK(std::fabs(inner_product(B, p)) <= 1e-5);
  }
  // Traceless A at an arbitrary velocity, and the closed form at one point.
  const FluidState s{1.3, {0.2, -0.4, 0.1}, 1.7};
  const Vec3 v{0.9, 0.3, -1.2};
  const auto b = burnett(s, v);
  CHECK(b.A[0][0] + b.A[1][1] + b.A[2][2] == doctest::Approx(0.0).scale(1e-15));
  const Vec3 c = v - s.u;
  const double sm = sqrt_maxwellian(s, v);
  CHECK(b.A[0][2] == doctest::Approx(c.x * c.z / s.T * sm).epsilon(1e-14));
  CHECK(b.B[1] == doctest::Approx(c.y / (2 * std::sqrt(s.T)) * (norm2(c) / s.T - 5) * sm).epsilon(1e-14));
  CHECK_THROWS_AS(burnett_A(kState, g, 3, 0), InvalidArgument);
  CHECK_THROWS_AS(burnett_B(kState, g, -1), InvalidArgument);
}

TEST_CASE("fluid fields and Euler residuals") {
  const Vec3 x{0.3, -0.7, 1.1};
  CHECK(euler_residual(constant_field({1.2, {0.1, 0.2, 0.3}, 0.9}), 0.4, x).max_abs() == 0.0);
  CHECK(euler_residual(shear_field(0.2), 0.4, x).max_abs() <= 1e-15);
  CHECK(euler_residual(thermal_field(0.1), 0.4, x).max_abs() <= 1e-15);

  const auto r = euler_residual(density_wave(), 0.0, x);
  CHECK(r.mass == 0.0);
  CHECK(r.momentum.x == doctest::Approx(0.1 * std::cos(x.x)).epsilon(1e-14));
  CHECK(r.momentum.y == 0.0);
  CHECK(r.energy == 0.0);

  const auto th = thermal_field(0.1).state(0.0, {2.0, 0.0, 0.0});
  CHECK(th.T == doctest::Approx(1.2));
  CHECK(th.rho * th.T == doctest::Approx(1.0));
  CHECK(shear_field(0.5).state(0.0, {0.0, 2.0, 0.0}).u.x == doctest::Approx(1.0));

  CHECK(field_by_id("shear", {{"alpha", 0.3}}).params.at("alpha") == 0.3);
  CHECK(field_by_id("constant", {{"T", 2.0}}).state(0, {}).T == 2.0);
  CHECK_THROWS_AS(field_by_id("vortex", {}), InvalidArgument);
  CHECK_THROWS_AS(shear_field(std::nan("")), InvalidArgument);
  CHECK_THROWS_AS(thermal_field(-0.5).state(0.0, {3.0, 0.0, 0.0}), InvalidArgument);
}

TEST_CASE("sampled field bounds") {
  const std::vector<std::pair<double, Vec3>> pts{{0.0, {0.0, 0.0, 0.0}}, {0.0, {0.0, 1.0, 0.0}}};
  const auto c = sampled_field_bounds(constant_field(kState), pts);
  CHECK(c[0] == doctest::Approx(3.0));
  CHECK(c[1] == doctest::Approx(3.0));
  CHECK(c[2] == doctest::Approx(3.0));
  const auto s = sampled_field_bounds(shear_field(0.1), pts);
  CHECK(s[0] == doctest::Approx(3.0));
  CHECK(s[1] == doctest::Approx(3.1));
  CHECK(s[2] == doctest::Approx(3.1));
  CHECK_THROWS_AS(sampled_field_bounds(shear_field(0.1), {}), InvalidArgument);
}

TEST_CASE("first-order source") {
  const auto g = build_grid(kState, 6.0, 12);
  const double alpha = 0.2;
  const auto shear = g1_source(shear_field(alpha), 0.0, {}, g);
  CHECK_FALSE(shear.general_form);
  CHECK(shear.warnings.empty());
  CHECK(max_diff(shear.g, -alpha * burnett_A(kState, g, 0, 1)) <= 1e-15);

  // Both forms agree on Euler solutions up to the grid projection.
  for (const auto& field : {shear_field(alpha), thermal_field(0.1)}) {
    INFO(field.id);
    const auto a = g1_simplified(field, 0.0, {}, g), b = g1_general(field, 0.0, {}, g);
    CHECK(max_diff(a, b) <= 1e-5 * a.max_abs());
  }
  // The thermal source is the heat-flux function alone.
  CHECK(max_diff(g1_simplified(thermal_field(0.1), 0.0, {}, g), -0.1 * burnett_B(kState, g, 0)) <= 1e-15);
  CHECK(g1_simplified(constant_field(kState), 0.0, {}, g).max_abs() == 0.0);

  const auto wave = g1_source(density_wave(), 0.0, {}, g);
  CHECK(wave.general_form);
  CHECK_FALSE(wave.warnings.empty());
  for (const auto& p : discrete_null_basis(kState, g)) CHECK(std::fabs(inner_product(wave.g, p)) <= 1e-14);
  CHECK_FALSE(g1_source(density_wave(), 0.0, {}, g, 1.0).general_form);
}

TEST_CASE("fluid part lies in the null space") {
  const auto g = build_grid(kState, 6.0, 12);
  const auto f = fluid_part(kState, {0.3, {0.1, -0.2, 0.05}, 0.7}, g);
  const auto phi = discrete_null_basis(kState, g);
  GridFunction proj(g);
  for (const auto& p : phi) proj += inner_product(f, p) * p;
  CHECK(max_diff(proj, f) <= 1e-7 * f.max_abs());
  CHECK(fluid_part(kState, {}, g).max_abs() == 0.0);
}

TEST_CASE("first-order kinetic part") {
  const auto& inv = hard_sphere_inverse();
  const auto& op = inv.op();
  const auto lv = f1_kinetic(inv, shear_field(0.2), 0.0, {});
  CHECK(lv.n == 1);
  CHECK(lv.field_id == "shear");
  CHECK(lv.solve.residual_norm <= 1e-10);
  CHECK_FALSE(lv.fluid);
  const auto g1 = g1_simplified(shear_field(0.2), 0.0, {}, op.grid);
  CHECK(max_diff(apply_L(op, lv.kinetic), project_complement(op, g1)) <= 1e-10 * g1.max_abs());
  for (const auto& p : op.phi) CHECK(std::fabs(inner_product(lv.kinetic, p)) <= 1e-12);
  for (std::size_t i = 0; i < lv.F.size(); ++i)
    REQUIRE(lv.F[i] == doctest::Approx(lv.kinetic[i] * sqrt_maxwellian(kState, op.grid->node(i))));

  auto with_fluid = shear_field(0.2);
  with_fluid.fluid = [](int, double, const Vec3&) { return FluidCoefficients{0.1, {}, 0.0}; };
  const auto lf = f1_kinetic(inv, with_fluid, 0.0, {});
  REQUIRE(lf.fluid);
  CHECK(max_diff(lf.kinetic, lv.kinetic) == 0.0);

  CHECK_THROWS_AS(f1_kinetic(inv, shear_field(0.2), 0.0, {0.0, 1.0, 0.0}), InvalidArgument);
}

TEST_CASE("isotropy report") {
  const auto& inv = hard_sphere_inverse();
  const auto A = burnett_A(kState, inv.op().grid, 0, 1);
  const auto same = isotropy_check(inv, BurnettKind::A, 0, 1, &A);
  REQUIRE_FALSE(same.shells.empty());
  CHECK(same.max_spread == 0.0);
  for (const auto& s : same.shells) CHECK(s.mean_ratio == doctest::Approx(1.0));
  CHECK(same.growth_constant == doctest::Approx(1.0 / (1.0 + same.shells.front().radius)));

  const auto solved = isotropy_check(inv, BurnettKind::B, 2);
  REQUIRE_FALSE(solved.shells.empty());
  CHECK(std::isfinite(solved.max_spread));
  // L is positive on the complement, so the solution has the sign of B.
  for (const auto& s : solved.shells) CHECK(s.mean_ratio > 0.0);
  CHECK(solved.growth_slope > 0.0);
}

TEST_CASE("quadratic collision term") {
  const auto g = build_grid(kState, 6.0, 8);
  const auto m = make_model(1.0);
  const auto opt = coarse_rule();
  const auto M = sample(g, [](const Vec3& v) { return sqrt_maxwellian(kState, v); });
  const auto eq = gamma_split(m, kState, M, M, opt);
  // Q(M, M) = 0 and the loss is nu sqrt(M) up to the coarse radial rule.
  CHECK(eq.total().max_abs() <= 1e-5 * eq.gain.max_abs());
  for (std::size_t i = 0; i < g->size(); i += 17)
    CHECK(eq.loss[i] == doctest::Approx(collision_frequency(m, kState, g->node(i)) * M[i]).epsilon(1e-2).scale(1e-12));

  const auto a = burnett_A(kState, g, 0, 1), b = burnett_B(kState, g, 2);
  const auto ab = gamma_split(m, kState, a, b, opt);
  const auto scaled = gamma_bilinear(m, kState, 2.0 * a, -3.0 * b, opt);
  CHECK(max_diff(scaled, -6.0 * ab.total()) <= 1e-12 * ab.gain.max_abs());
  const auto sum = gamma_bilinear(m, kState, a + M, b, opt);
  CHECK(max_diff(sum, ab.total() + gamma_bilinear(m, kState, M, b, opt)) <= 1e-12 * ab.gain.max_abs());
  const auto zero = gamma_split(m, kState, GridFunction(g), b, opt);
  CHECK(zero.gain.max_abs() == 0.0);
  CHECK(zero.loss.max_abs() == 0.0);
  CHECK_THROWS_AS(gamma_bilinear(m, kState, a, GridFunction(build_grid(kState, 6.0, 6))), InvalidArgument);
}

TEST_CASE("source terms from a kinetic stencil") {
  const auto g = build_grid(kState, 6.0, 12);
  const double delta = 1e-3;
  const auto A = burnett_A(kState, g, 0, 1);
  KineticStencil st;
  st.delta = delta;
  for (int k = 0; k < 3; ++k)
    for (int p = 0; p < 2; ++p) {
      st.x_pm[k][p] = GridFunction(g);
      st.states[k][p] = kState;
    }
  // f = x2 A_12 near the origin.
  st.x_pm[1][0] = -delta * A;
  st.x_pm[1][1] = delta * A;
  const auto src = source_terms(constant_field(kState), 0.0, {}, st);
  // F_u = -d/dx2 <A_12, f> e_1 with <A_12, A_12> = T^2 rho.
  CHECK(src.F_u.x == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(src.F_u.y == doctest::Approx(0.0).scale(1e-12));
  CHECK(src.F_u.z == doctest::Approx(0.0).scale(1e-12));
  CHECK(src.G_theta == doctest::Approx(0.0).scale(1e-12));

  st.delta = 0.0;
  CHECK_THROWS_AS(source_terms(constant_field(kState), 0.0, {}, st), InvalidArgument);
}

TEST_CASE("level-one stencil and its decay profile") {
  const auto& inv = hard_sphere_inverse();
  const auto& op = inv.op();
  const auto field = thermal_field(0.1);
  const auto st = level1_stencil(op.model, field, 0.0, {}, op.grid, inv);
  CHECK(st.delta == doctest::Approx(1e-3));
  // Steady field: the time neighbours reuse the centre; only x1 moves the state.
  CHECK(st.assembled_operators == 2);
  CHECK(max_diff(st.t_pm[0].kinetic, st.center.kinetic) == 0.0);
  CHECK(max_diff(st.x_pm[1][1].kinetic, st.center.kinetic) == 0.0);
  CHECK(st.x_pm[0][1].state.T == doctest::Approx(1.0 + 0.1 * st.delta));

  const auto p0 = decay_check_Fn(st.center, kState, 0.5, 0);
  CHECK(p0.finite);
  CHECK(p0.q == 0.5);
  const auto p1 = decay_check_Fn(st.center, kState, 0.5, 1, &st);
  CHECK(p1.finite);
  CHECK_THROWS_AS(decay_check_Fn(st.center, kState, 0.5, 1), InvalidArgument);
  CHECK_THROWS_AS(decay_check_Fn(st.center, kState, 1.5, 0), InvalidArgument);
  CHECK_THROWS_AS(decay_check_Fn(st.center, kState, 0.5, 2, &st), InvalidArgument);
}

TEST_CASE("derivative decay check") {
  const auto& inv = hard_sphere_inverse();
  const auto& op = inv.op();
  auto heat = [](const FluidState& s, const GridPtr& g) { return burnett_B(s, g, 0); };
  const auto rep = derivative_decay_check(op.model, thermal_field(0.1), 0.0, {}, heat, 0.6, 0.4, 1e-3, op.grid,
                                          0, {}, &inv);
  CHECK(rep.axis == 0);
  CHECK(rep.delta == 1e-3);
  CHECK(rep.max_abs > 0.0);
  CHECK(rep.derivative.finite);
  CHECK(rep.base.finite);
  CHECK(rep.base.q == 0.6);
  // Along x2 the state does not change.
  const auto flat = derivative_decay_check(op.model, thermal_field(0.1), 0.0, {}, heat, 0.6, 0.4, 1e-3,
                                           op.grid, 1, {}, &inv);
  CHECK(flat.max_abs == 0.0);
  CHECK_THROWS_AS(derivative_decay_check(op.model, thermal_field(0.1), 0.0, {}, heat, 0.4, 0.6, 1e-3, op.grid),
                  InvalidArgument);
}
