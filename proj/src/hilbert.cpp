#include "boltzinv/hilbert.hpp"

#include <algorithm>
#include <map>
#include <memory>

namespace boltzinv {

namespace {

void require_grid(const GridFunction& f, const GridPtr& g, const char* who) {
  if (!(f.grid() == *g)) throw InvalidArgument(std::string(who) + ": grid mismatch");
}

GridFunction times_sqrt_maxwellian(const GridFunction& f, const FluidState& s) {
  GridFunction out(f.grid_ptr());
  const auto& g = f.grid();
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] * sqrt_maxwellian(s, g.node(i));
  return out;
}

GridFunction complement(const GridFunction& f, const FluidState& s) {
  const auto phi = discrete_null_basis(s, f.grid_ptr());
  GridFunction out = f;
  for (const auto& p : phi) {
    const double c = inner_product(out, p);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= c * p[i];
  }
  return out;
}

bool same_state(const FluidState& a, const FluidState& b) {
  return a.rho == b.rho && a.u == b.u && a.T == b.T;
}

}  // namespace

GridFunction g1_simplified(const AnalyticFluidField& field, double t, const Vec3& x, const GridPtr& g) {
  const FluidState s = field.state(t, x);
  const FieldJet j = field.jet(t, x);
  return sample(g, [&](const Vec3& v) {
    const BurnettValues b = burnett(s, v);
    double out = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int k = 0; k < 3; ++k) out -= j.d_u[k + 1][i] * b.A[i][k];
      out -= j.d_T[i + 1] / s.sqrt_T() * b.B[i];
    }
    return out;
  });
}

GridFunction g1_general(const AnalyticFluidField& field, double t, const Vec3& x, const GridPtr& g) {
  const FluidState s = field.state(t, x);
  const FieldJet j = field.jet(t, x);
  const GridFunction X = sample(g, [&](const Vec3& v) {
    const Vec3 c = v - s.u;
    auto D = [&](auto get) {
      double d = get(0);
      for (int k = 0; k < 3; ++k) d += v[k] * get(k + 1);
      return d;
    };
    const double Drho = D([&](int a) { return j.d_rho[a]; });
    const double DT = D([&](int a) { return j.d_T[a]; });
    Vec3 Du{};
    for (int i = 0; i < 3; ++i) Du[i] = D([&](int a) { return j.d_u[a][i]; });
    return (Drho / s.rho + dot(Du, c) / s.T + DT / (2.0 * s.T) * (norm2(c) / s.T - 3.0)) *
           sqrt_maxwellian(s, v);
  });
  return -1.0 * complement(X, s);
}

G1Source g1_source(const AnalyticFluidField& field, double t, const Vec3& x, const GridPtr& g,
                   double residual_threshold) {
  G1Source out;
  out.residual = euler_residual(field, t, x);
  if (out.residual.max_abs() <= residual_threshold) {
    out.g = g1_simplified(field, t, x, g);
  } else {
    out.general_form = true;
    out.warnings.push_back("Euler residual " + std::to_string(out.residual.max_abs()) +
                           " above threshold; using the general form of g1");
    out.g = g1_general(field, t, x, g);
  }
  return out;
}

GridFunction fluid_part(const FluidState& s, const FluidCoefficients& k, const GridPtr& g) {
  return sample(g, [&](const Vec3& v) {
    const Vec3 c = v - s.u;
    return (k.rho_n / s.rho + dot(k.u_n, c) / s.T + k.theta_n / (6.0 * s.T) * (norm2(c) / s.T - 3.0)) *
           sqrt_maxwellian(s, v);
  });
}

ExpansionLevel f1_kinetic(const PseudoInverse& inv, const AnalyticFluidField& field, double t,
                          const Vec3& x) {
  const auto& op = inv.op();
  const FluidState s = field.state(t, x);
  if (!same_state(s, op.state))
    throw InvalidArgument("f1_kinetic: operator was not assembled at the field state");
  G1Source src = g1_source(field, t, x, op.grid);
  ExpansionLevel lv;
  lv.n = 1;
  lv.t = t;
  lv.x = x;
  lv.field_id = field.id;
  lv.state = s;
  lv.residual = src.residual;
  lv.warnings = std::move(src.warnings);
  auto [kin, rep] = inv.solve(src.g);
  lv.kinetic = std::move(kin);
  lv.solve = rep;
  GridFunction f = lv.kinetic;
  if (field.fluid) {
    lv.fluid = fluid_part(s, field.fluid(1, t, x), op.grid);
    f += *lv.fluid;
  }
  lv.F = times_sqrt_maxwellian(f, s);
  return lv;
}

IsotropyReport isotropy_check(const PseudoInverse& inv, BurnettKind which, int i, int j,
                              const GridFunction* given) {
  const auto& op = inv.op();
  const auto& g = *op.grid;
  const FluidState& s = op.state;
  const GridFunction A = which == BurnettKind::A ? burnett_A(s, op.grid, i, j) : burnett_B(s, op.grid, i);
  GridFunction f = given ? *given : inv.solve(A).first;
  require_grid(f, op.grid, "isotropy_check");

  // Exact lattice spheres: |v - u|^2 in units of (h/2)^2 when the grid is centred at u.
  const bool centred = g.center() == s.u;
  const double unit = 0.25 * g.h() * g.h();
  std::map<long long, std::vector<std::size_t>> spheres;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double r2 = norm2(g.node(k) - s.u);
    const long long key = centred ? std::llround(r2 / unit) : std::llround(std::sqrt(r2) / (0.25 * g.h()));
    spheres[key].push_back(k);
  }
  IsotropyReport rep;
  if (!centred) rep.warnings.push_back("grid not centred at u; using radial bins of width h/4");
  const double st = s.sqrt_T(), trusted = 0.8 * g.half_width();
  double sxy = 0, sxx = 0;
  for (const auto& [key, nodes] : spheres) {
    const double radius = centred ? std::sqrt(key * unit) : key * 0.25 * g.h();
    if (radius > trusted) continue;
    double amax = 0;
    for (auto k : nodes) amax = std::max(amax, std::fabs(A[k]));
    if (amax == 0) continue;
    std::vector<double> ratios;
    for (auto k : nodes)
      if (std::fabs(A[k]) > 0.05 * amax) ratios.push_back(f[k] / A[k]);
    if (ratios.empty()) continue;
    IsotropyShell sh;
    sh.radius = radius;
    sh.nodes = static_cast<int>(ratios.size());
    const auto [mn, mx] = std::minmax_element(ratios.begin(), ratios.end());
    double mean = 0;
    for (double r : ratios) mean += r;
    mean /= ratios.size();
    sh.mean_ratio = mean;
    sh.spread = mean != 0 ? (*mx - *mn) / std::fabs(mean) : 0.0;
    rep.shells.push_back(sh);
    if (radius >= 0.5 * st && radius <= 3.0 * st) rep.max_spread = std::max(rep.max_spread, sh.spread);
    const double x1 = 1.0 + radius;
    rep.growth_constant = std::max(rep.growth_constant, std::fabs(mean) / x1);
    sxy += std::fabs(mean) * x1;
    sxx += x1 * x1;
  }
  if (rep.shells.empty()) rep.warnings.push_back("no admissible shells");
  rep.growth_slope = sxx > 0 ? sxy / sxx : 0.0;
  return rep;
}

GammaParts gamma_split(const CollisionModel& m, const FluidState& s, const GridFunction& fi,
                       const GridFunction& fj, CollisionQuadratureOptions opt) {
  fi.require_same_grid(fj, "gamma_bilinear");
  if (fi.max_abs() == 0.0 || fj.max_abs() == 0.0)
    return {GridFunction(fi.grid_ptr()), GridFunction(fi.grid_ptr())};
  const CollisionQuadrature q(m, s, opt);
  const MaxwellianInterpolator pi(fi, s), pj(fj, s);
  const auto& g = fi.grid();
  const double mass = m.angular_mass();
  GammaParts out{GridFunction(fi.grid_ptr()), GridFunction(fi.grid_ptr())};
  const long long N = static_cast<long long>(g.size());
#pragma omp parallel
  {
    std::vector<CollisionQuadrature::V1Point> v1s;
    std::vector<CollisionQuadrature::OmegaPoint> oms;
#pragma omp for schedule(dynamic, 16)
    for (long long n = 0; n < N; ++n) {
      const Vec3 v = g.node(n);
      q.v1_points(v, v1s);
      CompensatedSum gain, loss;
      for (const auto& a : v1s) {
        loss.add(a.weight * pj.ratio(a.v1));
        q.omega_points(v, a.v1, oms);
        double inner = 0.0;
        for (const auto& o : oms) {
          const double r1 = pi.ratio(o.v_post);
          if (r1 != 0.0) inner += o.weight * r1 * pj.ratio(o.v1_post);
        }
        gain.add(a.weight * inner);
      }
      out.gain[n] = sqrt_maxwellian(s, v) * gain.value();
      out.loss[n] = fi[n] * mass * loss.value();
    }
  }
  return out;
}

GridFunction gamma_bilinear(const CollisionModel& m, const FluidState& s, const GridFunction& fi,
                            const GridFunction& fj, CollisionQuadratureOptions opt) {
  return gamma_split(m, s, fi, fj, opt).total();
}

SourceTerms source_terms(const AnalyticFluidField& field, double t, const Vec3& x,
                         const KineticStencil& st) {
  if (!(st.delta > 0)) throw InvalidArgument("source_terms: stencil step must be positive");
  const FluidState c = field.state(t, x);
  const auto& g = st.x_pm[0][0].grid_ptr();
  for (const auto& axis : st.x_pm)
    for (const auto& f : axis)
      if (!f.same_grid(st.x_pm[0][0])) throw InvalidArgument("source_terms: stencil grids differ");
  // Moments <A_ij, f> and <B_j, f> at each stencil point.
  struct Moments {
    std::array<std::array<double, 3>, 3> A{};
    std::array<double, 3> B{};
  };
  auto moments = [&](const GridFunction& f, const FluidState& s) {
    Moments mo;
    CompensatedSum a[3][3], b[3];
    for (std::size_t n = 0; n < f.size(); ++n) {
      if (f[n] == 0.0) continue;
      const BurnettValues bv = burnett(s, g->node(n));
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) a[i][j].add(bv.A[i][j] * f[n]);
        b[i].add(bv.B[i] * f[n]);
      }
    }
    const double h3 = g->cell_weight();
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) mo.A[i][j] = a[i][j].value() * h3;
      mo.B[i] = b[i].value() * h3;
    }
    return mo;
  };
  SourceTerms out;
  double divG = 0.0;
  for (int j = 0; j < 3; ++j) {
    std::array<Moments, 2> mo;
    std::array<double, 2> flux{};
    for (int p = 0; p < 2; ++p) {
      const FluidState& s = st.states[j][p];
      mo[p] = moments(st.x_pm[j][p], s);
      double ua = 0;
      for (int i = 0; i < 3; ++i) ua += s.u[i] * mo[p].A[i][j];
      flux[p] = 2.0 * std::pow(s.T, 1.5) * mo[p].B[j] + 2.0 * s.T * ua;
    }
    for (int i = 0; i < 3; ++i)
      out.F_u[i] -= (st.states[j][1].T * mo[1].A[i][j] - st.states[j][0].T * mo[0].A[i][j]) / (2.0 * st.delta);
    divG += (flux[1] - flux[0]) / (2.0 * st.delta);
  }
  out.G_theta = -divG - 2.0 * dot(c.u, out.F_u);
  return out;
}

Level1Stencil level1_stencil(const CollisionModel& m, const AnalyticFluidField& field, double t,
                             const Vec3& x, const GridPtr& g, const PseudoInverse& center,
                             StencilOptions opt) {
  const FluidState sc = field.state(t, x);
  Level1Stencil st;
  st.delta = opt.delta > 0 ? opt.delta : 1e-3 * std::min(1.0, sc.sqrt_T());
  const double d = st.delta;

  std::vector<std::unique_ptr<DiscreteLinearizedOperator>> ops;
  std::vector<std::unique_ptr<PseudoInverse>> invs;
  auto level_at = [&](double tp, const Vec3& xp) {
    FluidState sp;
    try {
      sp = field.state(tp, xp);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("stencil point (t=" + std::to_string(tp) + "): " + e.what());
    }
    if (same_state(sp, center.op().state)) return f1_kinetic(center, field, tp, xp);
    for (const auto& inv : invs)
      if (same_state(sp, inv->op().state)) return f1_kinetic(*inv, field, tp, xp);
    ops.push_back(std::make_unique<DiscreteLinearizedOperator>(assemble(m, sp, g, opt.assembly)));
    invs.push_back(std::make_unique<PseudoInverse>(*ops.back()));
    ++st.assembled_operators;
    return f1_kinetic(*invs.back(), field, tp, xp);
  };

  st.center = f1_kinetic(center, field, t, x);
  st.t_pm[0] = level_at(t - d, x);
  st.t_pm[1] = level_at(t + d, x);
  for (int k = 0; k < 3; ++k) {
    Vec3 e{};
    e[k] = d;
    st.x_pm[k][0] = level_at(t, x - e);
    st.x_pm[k][1] = level_at(t, x + e);
  }
  return st;
}

Level2Result f2_kinetic(const PseudoInverse& center, const AnalyticFluidField& field, double t,
                        const Vec3& x, const Level1Stencil& st, CollisionQuadratureOptions gamma_opt) {
  const auto& op = center.op();
  const FluidState sc = field.state(t, x);
  if (!same_state(sc, op.state)) throw InvalidArgument("f2_kinetic: centre operator state mismatch");
  const auto& g = *op.grid;
  const double d2 = 2.0 * st.delta;

  GridFunction G2(op.grid);
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Vec3 v = g.node(n);
    double dF = st.t_pm[1].F[n] - st.t_pm[0].F[n];
    for (int k = 0; k < 3; ++k) dF += v[k] * (st.x_pm[k][1].F[n] - st.x_pm[k][0].F[n]);
    G2[n] = dF / d2 / sqrt_maxwellian(sc, v);
  }
  GridFunction f1 = st.center.kinetic;
  if (st.center.fluid) f1 += *st.center.fluid;

  Level2Result out;
  out.g2 = -1.0 * project_complement(op, G2);
  out.g2 += gamma_bilinear(op.model, sc, f1, f1, gamma_opt);

  ExpansionLevel& lv = out.level;
  lv.n = 2;
  lv.t = t;
  lv.x = x;
  lv.field_id = field.id;
  lv.state = sc;
  lv.residual = st.center.residual;
  auto [kin, rep] = center.solve(out.g2);
  lv.kinetic = std::move(kin);
  lv.solve = rep;
  GridFunction f2 = lv.kinetic;
  if (field.fluid) {
    lv.fluid = fluid_part(sc, field.fluid(2, t, x), op.grid);
    f2 += *lv.fluid;
  }
  lv.F = times_sqrt_maxwellian(f2, sc);

  KineticStencil ks;
  ks.delta = st.delta;
  for (int k = 0; k < 3; ++k)
    for (int p = 0; p < 2; ++p) {
      ks.x_pm[k][p] = st.x_pm[k][p].kinetic;
      ks.states[k][p] = st.x_pm[k][p].state;
    }
  out.sources = source_terms(field, t, x, ks);
  return out;
}

DecayProfile decay_check_Fn(const ExpansionLevel& level, const FluidState& s, double q, int m,
                            const Level1Stencil* stencil, double trusted_fraction) {
  if (!(q > 0 && q < 1)) throw InvalidArgument("decay_check_Fn: q must lie in (0,1)");
  if (m != 0 && m != 1) throw InvalidArgument("decay_check_Fn: derivative order must be 0 or 1");
  const auto& gp = level.kinetic.grid_ptr();
  const auto& g = *gp;
  GridFunction target(gp);
  if (m == 0) {
    target = times_sqrt_maxwellian(level.kinetic, level.state);
  } else {
    if (!stencil) throw InvalidArgument("decay_check_Fn: m = 1 needs the (t, x) stencil");
    if (level.n != 1) throw InvalidArgument("decay_check_Fn: the stencil holds level 1 only");
    auto kin_F = [](const ExpansionLevel& l) { return times_sqrt_maxwellian(l.kinetic, l.state); };
    auto take_max = [&](const ExpansionLevel& a, const ExpansionLevel& b) {
      const GridFunction fa = kin_F(a), fb = kin_F(b);
      for (std::size_t n = 0; n < g.size(); ++n)
        target[n] = std::max(target[n], std::fabs(fb[n] - fa[n]) / (2.0 * stencil->delta));
    };
    take_max(stencil->t_pm[0], stencil->t_pm[1]);
    for (int k = 0; k < 3; ++k) take_max(stencil->x_pm[k][0], stencil->x_pm[k][1]);
  }
  auto env = [&](std::size_t n) { return std::exp(0.5 * (1.0 + q) * log_maxwellian(s, g.node(n))); };
  DecayProfile p = shell_profile(target, env, s.u, trusted_fraction * g.half_width());
  p.q = q;
  return p;
}

DerivativeDecayReport derivative_decay_check(
    const CollisionModel& m, const AnalyticFluidField& field, double t, const Vec3& x,
    const std::function<GridFunction(const FluidState&, const GridPtr&)>& g_of_state, double q0,
    double q1, double delta, const GridPtr& g, int axis, AssemblyOptions opt,
    const PseudoInverse* center) {
  if (!(q1 > 0 && q1 < q0 && q0 < 1)) throw InvalidArgument("derivative check: need 0 < q1 < q0 < 1");
  if (!(delta > 0)) throw InvalidArgument("derivative check: delta must be positive");
  if (axis < 0 || axis > 2) throw InvalidArgument("derivative check: axis must be 0..2");
  const FluidState sc = field.state(t, x);

  std::array<GridFunction, 2> f;
  for (int p = 0; p < 2; ++p) {
    Vec3 xp = x;
    xp[axis] += (p == 0 ? -delta : delta);
    const FluidState sp = field.state(t, xp);
    if (center && same_state(sp, center->op().state)) {
      f[p] = center->solve(g_of_state(sp, g)).first;
      continue;
    }
    const auto op = assemble(m, sp, g, opt);
    f[p] = PseudoInverse(op).solve(g_of_state(sp, g)).first;
  }
  std::unique_ptr<DiscreteLinearizedOperator> own_op;
  std::unique_ptr<PseudoInverse> own_inv;
  if (!center || !same_state(sc, center->op().state)) {
    own_op = std::make_unique<DiscreteLinearizedOperator>(assemble(m, sc, g, opt));
    own_inv = std::make_unique<PseudoInverse>(*own_op);
    center = own_inv.get();
  }
  const auto& cop = center->op();
  const GridFunction base = center->solve(g_of_state(sc, g)).first;

  DerivativeDecayReport rep;
  rep.delta = delta;
  rep.axis = axis;
  GridFunction D = (1.0 / (2.0 * delta)) * (f[1] - f[0]);
  rep.max_abs = D.max_abs();
  const double radius = 0.8 * g->half_width();
  auto env = [&](double q) {
    return [&, q](std::size_t n) {
      return theta_gamma(m.gamma, cop.nu[n]) * std::exp(0.5 * q * log_maxwellian(sc, g->node(n)));
    };
  };
  rep.derivative = shell_profile(D, env(q1), sc.u, radius);
  rep.derivative.q = q1;
  rep.derivative.gamma = m.gamma;
  rep.base = shell_profile(base, env(q0), sc.u, radius);
  rep.base.q = q0;
  rep.base.gamma = m.gamma;
  return rep;
}

}  // namespace boltzinv
