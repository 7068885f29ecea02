#include <omp.h>

#include <algorithm>
#include <chrono>
#include <list>
#include <memory>

#include "boltzinv/report.hpp"

namespace boltzinv {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

bool same_state(const FluidState& a, const FluidState& b) {
  return a.rho == b.rho && a.u == b.u && a.T == b.T;
}

// Worst |<g, phi_a>| / |g| over the discrete invariants.
double moment_leak(const DiscreteLinearizedOperator& op, const GridFunction& g) {
  const double n = l2_norm(g);
  if (n == 0) return 0;
  double worst = 0;
  for (const auto& p : op.phi) worst = std::max(worst, std::fabs(inner_product(g, p)));
  return worst / n;
}

struct Solved {
  std::unique_ptr<DiscreteLinearizedOperator> op;
  std::unique_ptr<PseudoInverse> inv;
};

class Context {
 public:
  Context(const RunConfig& c, RunReport& r, fs::path d)
      : cfg(c), rep(r), dir(std::move(d)), model(make_model(c.gamma, c.b0, c.epsilon)) {
    assembly.threads = c.threads;
    rep.section("model") = {{"gamma", model.gamma},
                            {"angular_family", to_string(model.angular)},
                            {"beta0", model.beta0},
                            {"b0", model.b0},
                            {"epsilon", model.epsilon}};
  }

  // Operator and factorization at state s on the grid centred at s.u (cached).
  Solved& solved(const FluidState& s) {
    for (auto& e : cache_)
      if (same_state(e.op->state, s)) return e;
    const GridPtr g = build_grid(s, cfg.c_R, cfg.n);
    Solved e;
    e.op = std::make_unique<DiscreteLinearizedOperator>(assemble(model, s, g, assembly));
    rep.wall_time("assemble_" + std::to_string(cache_.size()), e.op->stats.seconds);
    rep.section("assembly").push_back(to_json(e.op->stats));
    if (cfg.dump_operator && cache_.empty()) {
      save_operator_snapshot(*e.op, (dir / "operator.bin").string());
      save_grid_function(e.op->nu_function(), (dir / "nu.bin").string());
    }
    e.inv = std::make_unique<PseudoInverse>(*e.op);
    rep.wall_time("factorize_" + std::to_string(cache_.size()), e.inv->factor_seconds());
    cache_.push_back(std::move(e));
    return cache_.back();
  }

  const RunConfig& cfg;
  RunReport& rep;
  fs::path dir;
  CollisionModel model;
  AssemblyOptions assembly;

 private:
  std::list<Solved> cache_;
};

void kernels(Context& cx) {
  const auto& c = cx.cfg;
  const auto& s = c.state;
  {
    CsvWriter nu(cx.dir / "nu_profile.csv", {"speed", "nu"});
    const double top = c.c_R * s.sqrt_T();
    for (int k = 0; k <= 96; ++k) {
      const double sp = top * k / 96.0;
      nu << sp << collision_frequency_radial(cx.model, s, sp);
      nu.end_row();
    }
  }

  const RouteCrossCheck rc = k2_route_crosscheck(s, c.route_pairs, c.seed);
  cx.rep.check("k2_closed_vs_planar", rc.max_relative <= 1e-6, rc.max_relative, 1e-6);
  cx.rep.check("k2_crosscheck_seconds", rc.seconds <= 30.0, rc.seconds, 30.0);

  CsvWriter out(cx.dir / "kernel_checks.csv",
                {"gamma", "pair", "v_x", "v_y", "v_z", "v1_x", "v1_y", "v1_z", "k1", "k1_bar", "k2", "k2_bar", "pass"});
  Json env = Json::array();
  for (double gamma : c.envelope_gammas) {
    std::vector<EnvelopeSample> samples;
    const EnvelopeCheck e = envelope_check(gamma, s, c.envelope_pairs, c.seed, 1e-12, &samples);
    int k = 0;
    for (const auto& p : samples) {
      out << p.gamma << static_cast<double>(k++) << p.v.x << p.v.y << p.v.z << p.v1.x << p.v1.y << p.v1.z
          << p.k1 << p.k1_bar << p.k2 << p.k2_bar << std::string(p.pass ? "1" : "0");
      out.end_row();
    }
    const std::string tag = "gamma=" + std::to_string(gamma);
    cx.rep.check("k1_envelope_violations " + tag, e.k1_violations == 0, e.k1_violations, 0);
    cx.rep.check("k2_envelope_violations " + tag, e.k2_violations == 0, e.k2_violations, 0);
    cx.rep.check("k2_envelope_l1_finite " + tag, std::isfinite(e.k2_bar_l1) && e.k2_bar_l1 > 0, e.k2_bar_l1,
                 std::numeric_limits<double>::infinity());
    cx.rep.check("k2_envelope_tail " + tag, e.k2_bar_tail_fraction <= 1e-8, e.k2_bar_tail_fraction, 1e-8);
    env.push_back({{"gamma", gamma},
                   {"b0", e.b0},
                   {"pairs", e.pairs},
                   {"max_ratio_k1", e.max_ratio_k1},
                   {"max_ratio_k2", e.max_ratio_k2},
                   {"k2_bar_l1", e.k2_bar_l1},
                   {"tail_fraction", e.k2_bar_tail_fraction}});
  }
  cx.rep.section("envelopes") = env;

  const LemmaFCheck lf = lemma_f_check(c.lemma_triples, c.seed);
  cx.rep.check("envelope_function_bound", lf.max_ratio <= 1.0 + 1e-9, lf.max_ratio, 1.0 + 1e-9);
  cx.rep.check("envelope_function_argmax", lf.max_location_error <= 1e-6, lf.max_location_error, 1e-6);
  cx.rep.section("envelope_function") = {{"triples", lf.triples}, {"case3", lf.case3}};
}

void hypo(Context& cx) {
  const auto& c = cx.cfg;
  // The L2 route of the envelope needs a non-empty admissible set of b0.
  admissible_b0(c.gamma, true);
  Solved& so = cx.solved(c.state);
  const auto& op = *so.op;

  const HypoReport lam = hypocoercivity_lambda(*so.inv);
  cx.rep.wall_time("eigen_solve", lam.wall_time);
  cx.rep.check("lambda_positive", lam.lambda > 0, lam.lambda, 0.0);
  cx.rep.section("lambda") = to_json(lam);

  const auto t0 = Clock::now();
  const auto family = probe_family(op, c.family_size, c.seed);
  CsvWriter out(cx.dir / "hypo.csv",
                {"q", "lambda", "C_weighted", "r", "low_bound_const", "high_small_factor", "partition_error"});
  Json probes = Json::array();
  for (double q : c.q) {
    const HypoReport w = weighted_hypocoercivity_probe(op, q, family, c.trusted_fraction);
    const ChiSplitTable t = chi_split_probe(op, c.chi_radii, q, family, c.trusted_fraction);
    const std::string tag = "q=" + std::to_string(q);
    cx.rep.check("weighted_C_finite " + tag, std::isfinite(w.C_weighted), w.C_weighted,
                 std::numeric_limits<double>::infinity());
    cx.rep.check("chi_high_factor_nonincreasing " + tag, t.high_factor_nonincreasing,
                 t.rows.empty() ? 0.0 : t.rows.back().high_small_factor, t.noise);
    for (const auto& r : t.rows) {
      out << q << lam.lambda << w.C_weighted << r.r << r.low_bound_const << r.high_small_factor << r.partition_error;
      out.end_row();
    }
    Json e = to_json(w);
    e["chi_split"] = to_json(t);
    probes.push_back(e);
  }
  cx.rep.section("weighted_probes") = probes;
  cx.rep.wall_time("weighted_probes", since(t0));
}

void decay(Context& cx) {
  const auto& c = cx.cfg;
  Solved& so = cx.solved(c.state);
  const auto& op = *so.op;
  const double q = c.q.front();
  CsvWriter out(cx.dir / "decay_profile.csv", {"source", "shell_s", "W"});
  Json profiles = Json::object();
  const std::pair<std::string, GridFunction> sources[] = {
      {"A12", burnett_A(c.state, op.grid, 0, 1)},
      {"B1", burnett_B(c.state, op.grid, 0)},
  };
  for (const auto& [name, g] : sources) {
    auto [f, sr] = so.inv->solve(g);
    const DecayProfile p = decay_profile(op, f, q, c.trusted_fraction);
    for (std::size_t k = 0; k < p.W.size(); ++k) {
      out << name << p.shell_radii[k] << p.W[k];
      out.end_row();
    }
    cx.rep.check("decay_finite " + name, p.finite, p.plateau_ratio, std::numeric_limits<double>::infinity());
    if (c.gamma >= 0)
      cx.rep.check("decay_plateau " + name, p.finite && p.plateau_ratio <= c.plateau_threshold, p.plateau_ratio,
                   c.plateau_threshold);
    else
      cx.rep.note("decay_plateau " + name, p.plateau_ratio,
                  p.plateau_ratio <= c.soft_plateau_threshold ? "within soft threshold" : "above soft threshold");
    Json e = to_json(p);
    e["solve"] = to_json(sr);
    profiles[name] = e;
  }
  cx.rep.section("decay") = profiles;

  if (c.gamma == 1.0) {
    const IsotropyReport iso = isotropy_check(*so.inv, BurnettKind::A, 0, 1);
    cx.rep.check("isotropy_spread", iso.max_spread <= 0.05, iso.max_spread, 0.05);
    cx.rep.check("isotropy_growth_finite", std::isfinite(iso.growth_constant), iso.growth_constant,
                 std::numeric_limits<double>::infinity());
    cx.rep.section("isotropy") = to_json(iso);
  }
}

// Axis along which the field state changes fastest at (t, x).
int steepest_axis(const AnalyticFluidField& field, double t, const Vec3& x) {
  const FieldJet j = field.jet(t, x);
  int best = 0;
  double mag = -1;
  for (int k = 0; k < 3; ++k) {
    const double m = std::fabs(j.d_rho[k + 1]) + norm(j.d_u[k + 1]) + std::fabs(j.d_T[k + 1]);
    if (m > mag) {
      mag = m;
      best = k;
    }
  }
  return best;
}

void hilbert(Context& cx) {
  const auto& c = cx.cfg;
  const AnalyticFluidField field = field_by_id(c.field, c.field_params);
  const FluidState sc = field.state(c.t, c.x);
  Solved& so = cx.solved(sc);
  const auto& op = *so.op;
  const double q = c.q.front();
  const auto t0 = Clock::now();

  const G1Source g1 = g1_source(field, c.t, c.x, op.grid);
  cx.rep.check("g1_moments", moment_leak(op, g1.g) <= 1e-3, moment_leak(op, g1.g), 1e-3);

  StencilOptions so_opt;
  so_opt.assembly = cx.assembly;
  const Level1Stencil st = level1_stencil(cx.model, field, c.t, c.x, op.grid, *so.inv, so_opt);
  const Level2Result l2 = f2_kinetic(*so.inv, field, c.t, c.x, st);
  cx.rep.check("g2_moments", moment_leak(op, l2.g2) <= 1e-3, moment_leak(op, l2.g2), 1e-3);
  const ExpansionLevel levels[] = {st.center, l2.level};
  save_expansion_levels(levels, cx.dir);

  std::vector<std::pair<double, Vec3>> points{{c.t, c.x}};
  for (int k = 0; k < 3; ++k) {
    Vec3 e{};
    e[k] = st.delta;
    points.push_back({c.t, c.x - e});
    points.push_back({c.t, c.x + e});
  }
  points.push_back({c.t - st.delta, c.x});
  points.push_back({c.t + st.delta, c.x});
  const auto bounds = sampled_field_bounds(field, points);

  CsvWriter out(cx.dir / "hilbert_levels.csv", {"level", "derivative_order", "q", "shell_s", "W"});
  Json lv = Json::array();
  auto record = [&](const ExpansionLevel& l, int m, const DecayProfile& p) {
    for (std::size_t k = 0; k < p.W.size(); ++k) {
      out << static_cast<double>(l.n) << static_cast<double>(m) << p.q << p.shell_radii[k] << p.W[k];
      out.end_row();
    }
  };
  const bool constant = c.field == "constant";
  for (const auto& l : levels) {
    const DecayProfile p = decay_check_Fn(l, sc, q, 0, nullptr, c.trusted_fraction);
    record(l, 0, p);
    const std::string tag = "F" + std::to_string(l.n);
    const double pk = l2_norm(project_P(op, l.kinetic)), kn = l2_norm(l.kinetic);
    cx.rep.check(tag + "_kinetic_projection", pk <= 1e-8 * kn, kn > 0 ? pk / kn : 0.0, 1e-8);
    if (constant) {
      cx.rep.check(tag + "_zero_on_constant_field", l.kinetic.max_abs() == 0.0, l.kinetic.max_abs(), 0.0);
    } else {
      cx.rep.check(tag + "_decay_finite", p.finite, p.plateau_ratio, std::numeric_limits<double>::infinity());
      if (c.gamma >= 0)
        cx.rep.check(tag + "_decay_plateau", p.finite && p.plateau_ratio <= c.plateau_threshold, p.plateau_ratio,
                     c.plateau_threshold);
    }
    Json e{{"n", l.n}, {"solve", to_json(l.solve)}, {"decay", to_json(p)}, {"warnings", l.warnings}};
    lv.push_back(e);
  }
  const DecayProfile d1 = decay_check_Fn(st.center, sc, q, 1, &st, c.trusted_fraction);
  record(st.center, 1, d1);
  cx.rep.check("F1_derivative_finite", d1.finite, d1.plateau_ratio, std::numeric_limits<double>::infinity());
  lv[0]["derivative_decay"] = to_json(d1);

  Json rep{{"field", c.field},
           {"state", to_json(sc)},
           {"euler_residual", to_json(g1.residual)},
           {"g1_general_form", g1.general_form},
           {"g1_warnings", g1.warnings},
           {"stencil_delta", st.delta},
           {"stencil_operators", st.assembled_operators},
           {"field_bounds", bounds},
           {"source_terms", {{"F_u", Json::array({l2.sources.F_u.x, l2.sources.F_u.y, l2.sources.F_u.z})},
                             {"G_theta", l2.sources.G_theta}}},
           {"levels", lv}};

  // x-derivative of L^-1 A12 of the local state against the q_derivative envelope.
  const int axis = steepest_axis(field, c.t, c.x);
  auto a12 = [](const FluidState& s, const GridPtr& g) { return burnett_A(s, g, 0, 1); };
  Json fd = Json::array();
  std::vector<double> maxima;
  for (double delta : c.fd_deltas) {
    const DerivativeDecayReport d =
        derivative_decay_check(cx.model, field, c.t, c.x, a12, q, c.q_derivative, delta, op.grid, axis,
                               cx.assembly, so.inv.get());
    maxima.push_back(d.max_abs);
    cx.rep.check("derivative_profile_finite delta=" + std::to_string(delta), d.derivative.finite && d.base.finite,
                 d.derivative.plateau_ratio, std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < d.derivative.W.size(); ++k) {
      out << -1.0 << 1.0 << d.derivative.q << d.derivative.shell_radii[k] << d.derivative.W[k];
      out.end_row();
    }
    fd.push_back({{"delta", delta}, {"axis", axis}, {"max_abs", d.max_abs}, {"derivative", to_json(d.derivative)},
                  {"base", to_json(d.base)}});
  }
  // Successive differences of the maxima should shrink like delta^2.
  if (maxima.size() >= 3) {
    const double scale = std::max(1e-300, std::fabs(maxima.back()));
    bool ok = true;
    double worst_order = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 2 < maxima.size(); ++k) {
      const double a = std::fabs(maxima[k] - maxima[k + 1]), b = std::fabs(maxima[k + 1] - maxima[k + 2]);
      if (a <= 1e-9 * scale) continue;  // already at the noise floor
      const double order = std::log(a / std::max(b, 1e-300)) / std::log(c.fd_deltas[k] / c.fd_deltas[k + 1]);
      worst_order = std::min(worst_order, order);
      if (order < 1.5) ok = false;
    }
    cx.rep.check("derivative_second_order_trend", ok, std::isfinite(worst_order) ? worst_order : 2.0, 1.5);
  } else if (maxima.size() == 2) {
    const double change = std::fabs(maxima[0] - maxima[1]) / std::max(1e-300, std::fabs(maxima[1]));
    cx.rep.note("derivative_halving_change", change, "three deltas are needed for an order estimate");
  }
  rep["derivative_checks"] = fd;
  cx.rep.section("hilbert") = rep;
  cx.rep.wall_time("hilbert", since(t0));
}

void bench(Context& cx) {
  const auto& c = cx.cfg;
  const FluidState& s = c.state;
  const int threads = c.threads > 0 ? c.threads : omp_get_max_threads();
  CsvWriter out(cx.dir / "bench.csv", {"n", "entries", "threads", "reps", "assembly_s", "entries_per_s",
                                       "factorize_s", "solve_s", "matrix_free_s"});
  Json rows = Json::array();
  double prev_n = 0, prev_t = 0;
  for (int n : c.bench_n) {
    const GridPtr g = build_grid(s, c.c_R, n);
    std::vector<double> ta, tf, ts, tm;
    const GridFunction rhs = burnett_A(s, g, 0, 1);
    for (int r = 0; r < c.bench_reps; ++r) {
      auto t0 = Clock::now();
      const auto op = assemble(cx.model, s, g, cx.assembly);
      ta.push_back(since(t0));
      t0 = Clock::now();
      const PseudoInverse inv(op);
      tf.push_back(since(t0));
      t0 = Clock::now();
      (void)inv.solve(rhs);
      ts.push_back(since(t0));
      t0 = Clock::now();
      (void)apply_K_matrix_free(cx.model, s, rhs);
      tm.push_back(since(t0));
    }
    const double N = static_cast<double>(g->size());
    const double entries = N * N;
    out << static_cast<double>(n) << entries << static_cast<double>(threads) << static_cast<double>(c.bench_reps)
        << median(ta) << entries / median(ta) << median(tf) << median(ts) << median(tm);
    out.end_row();
    Json row{{"n", n}, {"assembly_s", median(ta)}, {"factorize_s", median(tf)}, {"solve_s", median(ts)},
             {"matrix_free_s", median(tm)}, {"assembly_samples", ta}};
    if (prev_n > 0) {
      const double expected = std::pow(n / prev_n, 6.0), observed = median(ta) / prev_t;
      row["assembly_ratio_vs_n6"] = observed / expected;
    }
    rows.push_back(row);
    prev_n = n;
    prev_t = median(ta);
  }
  cx.rep.section("bench") = rows;

  // Determinism and scaling of the assembly at the smallest size.
  const GridPtr g = build_grid(s, c.c_R, c.bench_n.front());
  AssemblyOptions one = cx.assembly, many = cx.assembly;
  one.threads = 1;
  many.threads = std::max(threads, 2);
  auto t0 = Clock::now();
  const auto a = assemble(cx.model, s, g, one);
  const double t1 = since(t0);
  t0 = Clock::now();
  const auto b = assemble(cx.model, s, g, many);
  const double tn = since(t0);
  const bool identical = a.K == b.K && a.nu == b.nu;
  cx.rep.check("assembly_bit_identical_threads", identical, identical ? 0.0 : (a.K - b.K).cwiseAbs().maxCoeff(), 0.0);
  cx.rep.note("assembly_speedup", t1 / tn,
              std::to_string(many.threads) + " threads vs 1 on " + std::to_string(omp_get_num_procs()) + " processors");

  // Pipeline: assemble, factorize, solves and reports at the configured size.
  t0 = Clock::now();
  Solved& so = cx.solved(s);
  const auto family = probe_family(*so.op, static_cast<std::size_t>(c.pipeline_solves), c.seed);
  for (const auto& f : family) (void)so.inv->solve(f);
  const double pipeline = since(t0);
  cx.rep.wall_time("pipeline", pipeline);
  cx.rep.check("pipeline_seconds", pipeline <= 600.0, pipeline, 600.0);
}

const char* error_kind(const std::exception& e) {
  if (dynamic_cast<const InvalidArgument*>(&e)) return "InvalidArgument";
  if (dynamic_cast<const SolveError*>(&e)) return "SolveError";
  if (dynamic_cast<const SingularOperator*>(&e)) return "SingularOperator";
  if (dynamic_cast<const NumericalError*>(&e)) return "NumericalError";
  if (dynamic_cast<const ResourceError*>(&e)) return "ResourceError";
  if (dynamic_cast<const SingularPoint*>(&e)) return "SingularPoint";
  return "Error";
}

}  // namespace

int run_scenario(const RunConfig& config, Json& manifest) {
  RunReport rep(config);
  const fs::path dir(config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ResourceError("cannot create output directory " + dir.string());

  try {
    config.validate();
  } catch (const std::exception& e) {
    rep.error("config", error_kind(e), e.what());
    rep.write(dir);
    manifest = rep.document();
    return 2;
  }
  if (config.threads > 0) omp_set_num_threads(config.threads);

  const auto t_all = Clock::now();
  Context cx(config, rep, dir);
  using Step = void (*)(Context&);
  const std::pair<const char*, Step> steps[] = {
      {"kernels", kernels}, {"hypo", hypo}, {"decay", decay}, {"hilbert", hilbert}, {"bench", bench}};
  for (const auto& [name, fn] : steps) {
    if (config.scenario != "all" && config.scenario != name) continue;
    const auto t0 = Clock::now();
    try {
      fn(cx);
    } catch (const std::exception& e) {
      rep.error(name, error_kind(e), e.what());
    }
    rep.wall_time(name, since(t0));
    rep.write(dir);  // keep partial results on disk
  }
  rep.wall_time("total", since(t_all));
  rep.write(dir);
  manifest = rep.document();
  return rep.all_pass() ? 0 : 1;
}

int run_scenario(const RunConfig& config) {
  Json m;
  return run_scenario(config, m);
}

}  // namespace boltzinv
