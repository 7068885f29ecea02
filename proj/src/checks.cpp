#include "boltzinv/checks.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/minima.hpp>
#include <chrono>
#include <limits>

namespace boltzinv {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Vec3 gaussian_velocity(CounterRng& rng, const FluidState& s, double spread) {
  const double sd = spread * s.sqrt_T();
  return s.u + Vec3{sd * rng.normal(), sd * rng.normal(), sd * rng.normal()};
}

GridFunction random_values(const GridPtr& g, CounterRng& rng) {
  GridFunction f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = rng.normal();
  return f;
}

}  // namespace

RouteCrossCheck k2_route_crosscheck(const FluidState& s, int pairs, std::uint64_t seed) {
  if (pairs < 1) throw InvalidArgument("route cross-check: pairs must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  const CollisionModel m = make_model(1.0);
  const KernelEvaluator closed(m, s, K2Route::Closed), planar(m, s, K2Route::Planar2D);
  CounterRng rng(seed, 0xc105ed);
  RouteCrossCheck r;
  r.pairs = pairs;
  for (int k = 0; k < pairs; ++k) {
    const Vec3 c = gaussian_velocity(rng, s, 1.5) - s.u;
    const Vec3 c1 = gaussian_velocity(rng, s, 1.5) - s.u;
    const double a = closed.k2_frame(c, c1), b = planar.k2_frame(c, c1);
    const double rel = std::fabs(a - b) / std::max(std::fabs(a), std::fabs(b));
    if (std::isfinite(rel)) r.max_relative = std::max(r.max_relative, rel);
  }
  r.seconds = seconds_since(t0);
  return r;
}

EnvelopeCheck envelope_check(double gamma, const FluidState& s, int pairs, std::uint64_t seed,
                             double slack, std::vector<EnvelopeSample>* samples) {
  if (pairs < 1) throw InvalidArgument("envelope check: pairs must be positive");
  const CollisionModel m = make_model(gamma);
  const KernelEvaluator ke(m, s);
  CounterRng rng(seed, 0xe0e1 + static_cast<std::uint64_t>(std::llround(100 * (gamma + 3))));
  EnvelopeCheck r;
  r.gamma = gamma;
  r.b0 = m.b0;
  r.pairs = pairs;
  for (int k = 0; k < pairs; ++k) {
    const Vec3 v = gaussian_velocity(rng, s, 2.0), v1 = gaussian_velocity(rng, s, 2.0);
    if (v == v1) continue;
    const auto kv = ke.frame(v - s.u, v1 - s.u);
    const auto env = kernel_envelopes(m, s, v - v1);
    EnvelopeSample e{gamma, v, v1, kv.k1, env.k1_bar, kv.k2, env.k2_bar, true};
    if (kv.k1 > env.k1_bar * (1 + slack)) {
      ++r.k1_violations;
      e.pass = false;
    }
    if (kv.k2 > env.k2_bar * (1 + slack)) {
      ++r.k2_violations;
      e.pass = false;
    }
    r.max_ratio_k1 = std::max(r.max_ratio_k1, kv.k1 / env.k1_bar);
    r.max_ratio_k2 = std::max(r.max_ratio_k2, kv.k2 / env.k2_bar);
    if (samples) samples->push_back(e);
  }

  auto radial = [&](double z) {
    if (!(z * z > 0)) return 0.0;
    return 4.0 * kPi * z * z * kernel_envelopes(m, s, {z, 0.0, 0.0}).k2_bar;
  };
  const double cut = 10.0 * s.sqrt_T();
  boost::math::quadrature::tanh_sinh<double> inner;
  boost::math::quadrature::exp_sinh<double> outer;
  const double body = inner.integrate(radial, 0.0, cut);
  const double tail = outer.integrate(radial, cut, std::numeric_limits<double>::infinity());
  r.k2_bar_l1 = body + tail;
  r.k2_bar_tail_fraction = tail / r.k2_bar_l1;
  return r;
}

LemmaFCheck lemma_f_check(int triples, std::uint64_t seed) {
  if (triples < 1) throw InvalidArgument("lemma check: triples must be positive");
  CounterRng rng(seed, 0x1e33a);
  LemmaFCheck r;
  r.triples = triples;
  constexpr int kPoints = 200000;
  for (int k = 0; k < triples; ++k) {
    const double gamma = rng.uniform(-2.9, 1.0);
    const double b0 = rng.uniform(0.0, 1.0 - gamma);
    const double a = std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
    const FBound fb = lemma_f_bound(gamma, b0, a);
    auto f = [&](double x) { return std::pow(x, b0) * std::pow(x * x + a * a, 0.5 * (gamma - 1.0)); };

    // Log-spaced grid on [1e-8 a, 100 a].
    const double lo = std::log(1e-8 * a), hi = std::log(100.0 * a);
    double best = 0, best_x = 0;
    for (int i = 0; i <= kPoints; ++i) {
      const double x = std::exp(lo + (hi - lo) * i / kPoints);
      const double y = f(x);
      if (y > best) {
        best = y;
        best_x = x;
      }
    }
    r.max_ratio = std::max(r.max_ratio, best / fb.max_value);
    if (fb.lemma_case == 3) {
      ++r.case3;
      const double step = (hi - lo) / kPoints;
      const auto [x_star, neg] = boost::math::tools::brent_find_minima(
          [&](double x) { return -f(x); }, best_x * std::exp(-2 * step), best_x * std::exp(2 * step),
          std::numeric_limits<double>::digits);
      r.max_ratio = std::max(r.max_ratio, -neg / fb.max_value);
      r.max_location_error =
          std::max(r.max_location_error, std::fabs(x_star - fb.max_location) / fb.max_location);
    }
  }
  return r;
}

NullResidual null_residual(const DiscreteLinearizedOperator& op, double interior_fraction) {
  const auto& g = *op.grid;
  const double radius = interior_fraction * g.half_width();
  NullResidual r;
  for (int a = 0; a < 5; ++a) {
    const GridFunction Lphi = apply_L(op, op.phi[a]);
    CompensatedSum num, den;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (norm(g.node(i) - op.state.u) > radius) continue;
      num.add(Lphi[i] * Lphi[i]);
      den.add(op.phi[a][i] * op.phi[a][i]);
    }
    r.ratio[a] = std::sqrt(num.value() / den.value());
    r.worst = std::max(r.worst, r.ratio[a]);
  }
  return r;
}

double self_adjoint_defect(const DiscreteLinearizedOperator& op, int pairs, std::uint64_t seed) {
  CounterRng rng(seed, 0x5a1f);
  double worst = 0;
  for (int k = 0; k < pairs; ++k) {
    const GridFunction f = random_values(op.grid, rng), h = random_values(op.grid, rng);
    const double lhs = inner_product(apply_L(op, f), h), rhs = inner_product(f, apply_L(op, h));
    worst = std::max(worst, std::fabs(lhs - rhs) / (l2_norm(f) * l2_norm(h)));
  }
  return worst;
}

OracleCheck oracle_check(const DiscreteLinearizedOperator& op, int count, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  OracleCheck r;
  r.functions = count;
  for (const auto& f : polynomial_family(op, count, seed ^ 0x0ac1e)) {
    const GridFunction a = apply_K(op, f);
    const GridFunction b = apply_K_matrix_free(op.model, op.state, f);
    r.max_relative = std::max(r.max_relative, l2_norm(a - b) / l2_norm(b));
  }
  r.seconds = seconds_since(t0);
  return r;
}

GammaInvariantCheck gamma_invariant_check(const DiscreteLinearizedOperator& op, int count,
                                          std::uint64_t seed, CollisionQuadratureOptions opt) {
  const auto t0 = std::chrono::steady_clock::now();
  GammaInvariantCheck r;
  const GridFunction sm = sample(op.grid, [&](const Vec3& v) { return sqrt_maxwellian(op.state, v); });
  const GammaParts eq = gamma_split(op.model, op.state, sm, sm, opt);
  r.equilibrium_relative = l2_norm(eq.total()) / l2_norm(eq.gain);
  for (const auto& f : polynomial_family(op, count, seed ^ 0x6a33a)) {
    const GridFunction G = gamma_bilinear(op.model, op.state, f, f, opt);
    double worst = 0;
    for (const auto& phi : op.phi) worst = std::max(worst, std::fabs(inner_product(G, phi)));
    const double ratio = worst / l2_norm(G);
    r.moment_ratios.push_back(ratio);
    r.worst_moment_ratio = std::max(r.worst_moment_ratio, ratio);
  }
  r.seconds = seconds_since(t0);
  return r;
}

}  // namespace boltzinv
