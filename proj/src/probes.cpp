#include "boltzinv/probes.hpp"

#include <algorithm>
#include <limits>

namespace boltzinv {

namespace {

void check_q(double q) {
  if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("weight exponent q must lie in (0,1)");
}

// Nodes inside the trusted ball and their squared weights M^(-q).
struct TrustedWeights {
  std::vector<std::size_t> nodes;
  std::vector<double> w2;
  double radius = 0;
};

TrustedWeights trusted_weights(const DiscreteLinearizedOperator& op, double q, double fraction) {
  if (!(fraction > 0 && fraction <= 1)) throw InvalidArgument("trusted fraction must lie in (0,1]");
  const auto& g = *op.grid;
  TrustedWeights t;
  t.radius = fraction * g.half_width();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 v = g.node(i);
    if (norm(v - op.state.u) > t.radius) continue;
    const double w2 = std::exp(-q * log_maxwellian(op.state, v));
    if (!std::isfinite(w2)) throw NumericalError("weight overflow inside the trusted radius");
    t.nodes.push_back(i);
    t.w2.push_back(w2);
  }
  return t;
}

double nu_norm2(const DiscreteLinearizedOperator& op, const GridFunction& f) {
  CompensatedSum s;
  for (std::size_t i = 0; i < f.size(); ++i) s.add(op.nu[i] * f[i] * f[i]);
  return s.value() * op.grid->cell_weight();
}

}  // namespace

namespace {

// sqrt(M) times a random cubic in the scaled peculiar velocity.
GridFunction polynomial_probe(const DiscreteLinearizedOperator& op, CounterRng& rng) {
  const auto& s = op.state;
  const double st = s.sqrt_T();
  double c0 = rng.normal(), c1[3], c2[3][3], c3[3];
  for (int a = 0; a < 3; ++a) {
    c1[a] = rng.normal();
    c3[a] = 0.3 * rng.normal();
    for (int b = 0; b < 3; ++b) c2[a][b] = 0.5 * rng.normal();
  }
  GridFunction f(op.grid);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Vec3 v = op.grid->node(i);
    const Vec3 c = (1.0 / st) * (v - s.u);
    double p = c0;
    for (int a = 0; a < 3; ++a) {
      p += c1[a] * c[a] + c3[a] * c[a] * norm2(c);
      for (int b = 0; b < 3; ++b) p += c2[a][b] * c[a] * c[b];
    }
    f[i] = p * sqrt_maxwellian(s, v);
  }
  return f;
}

}  // namespace

std::vector<GridFunction> probe_family(const DiscreteLinearizedOperator& op, std::size_t count,
                                       std::uint64_t seed) {
  const auto& s = op.state;
  const double st = s.sqrt_T();
  std::vector<GridFunction> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    CounterRng rng(seed, 0x70f00 + k);
    GridFunction f(op.grid);
    if (k % 2 == 0) {
      f = polynomial_probe(op, rng);
    } else {
      const Vec3 centre = s.u + (2.5 * st * std::cbrt(rng.uniform())) * rng.unit_vector();
      const double sigma = rng.uniform(0.5, 1.2) * st;
      const double amp = rng.normal();
      for (std::size_t i = 0; i < f.size(); ++i) {
        const Vec3 v = op.grid->node(i);
        f[i] = amp * std::exp(-norm2(v - centre) / (2.0 * sigma * sigma));
      }
    }
    out.push_back(project_complement(op, f));
  }
  return out;
}

std::vector<GridFunction> polynomial_family(const DiscreteLinearizedOperator& op, std::size_t count,
                                            std::uint64_t seed) {
  std::vector<GridFunction> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    CounterRng rng(seed, 0x70f00 + k);
    out.push_back(project_complement(op, polynomial_probe(op, rng)));
  }
  return out;
}

HypoReport weighted_hypocoercivity_probe(const DiscreteLinearizedOperator& op, double q,
                                         std::span<const GridFunction> family,
                                         double trusted_fraction) {
  check_q(q);
  if (family.empty()) throw InvalidArgument("weighted probe: empty family");
  const auto tw = trusted_weights(op, q, trusted_fraction);
  const bool soft = op.model.gamma < 0;
  const double h3 = op.grid->cell_weight();
  HypoReport rep;
  rep.q = q;
  rep.family_size = family.size();
  rep.restricted = trusted_fraction < 1.0;
  rep.trusted_radius = tw.radius;
  double C = 0;
  for (const auto& f : family) {
    const GridFunction Lf = apply_L(op, f);
    CompensatedSum lhs, rhs;
    for (std::size_t k = 0; k < tw.nodes.size(); ++k) {
      const std::size_t i = tw.nodes[k];
      if (soft) {
        lhs.add(tw.w2[k] * Lf[i] * f[i] / op.nu[i]);
        rhs.add(tw.w2[k] * f[i] * f[i]);
      } else {
        lhs.add(tw.w2[k] * Lf[i] * f[i]);
        rhs.add(tw.w2[k] * op.nu[i] * f[i] * f[i]);
      }
    }
    const double denom = nu_norm2(op, f);
    if (!(denom > 0)) continue;
    const double c = (0.5 * rhs.value() - lhs.value()) * h3 / denom;
    if (!std::isfinite(c)) throw NumericalError("weighted probe: non-finite constant");
    C = std::max(C, c);
  }
  rep.C_weighted = C;
  return rep;
}

ChiSplitTable chi_split_probe(const DiscreteLinearizedOperator& op, std::span<const double> r_values,
                              double q, std::span<const GridFunction> family,
                              double trusted_fraction, double noise) {
  check_q(q);
  if (family.empty()) throw InvalidArgument("chi split probe: empty family");
  const auto tw = trusted_weights(op, q, trusted_fraction);
  const bool soft = op.model.gamma < 0;
  const Eigen::Index N = static_cast<Eigen::Index>(op.size());
  const Eigen::Index m = static_cast<Eigen::Index>(family.size());
  Eigen::MatrixXd F(N, m);
  for (Eigen::Index k = 0; k < m; ++k)
    for (Eigen::Index i = 0; i < N; ++i) F(i, k) = family[k][i];
  const Eigen::MatrixXd KF = op.K * F;

  // Weighted pairing restricted to the trusted ball, with Theta folded in.
  auto pair = [&](const Eigen::MatrixXd& AF, Eigen::Index k) {
    CompensatedSum s;
    for (std::size_t t = 0; t < tw.nodes.size(); ++t) {
      const std::size_t i = tw.nodes[t];
      const double theta = soft ? 1.0 / op.nu[i] : 1.0;
      s.add(theta * tw.w2[t] * AF(i, k) * F(i, k));
    }
    return s.value();
  };
  std::vector<double> wnorm(m), nnorm(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    CompensatedSum s;
    for (std::size_t t = 0; t < tw.nodes.size(); ++t) {
      const std::size_t i = tw.nodes[t];
      s.add(tw.w2[t] * (soft ? 1.0 : op.nu[i]) * F(i, k) * F(i, k));
    }
    wnorm[k] = s.value();
    nnorm[k] = nu_norm2(op, family[k]) / op.grid->cell_weight();
  }

  ChiSplitTable table;
  table.q = q;
  table.noise = noise;
  for (double r : r_values) {
    const KSplit sp = split_K_chi(op, r);
    const Eigen::MatrixXd LF = sp.low * F;
    const Eigen::MatrixXd HF = sp.high * F;
    ChiSplitRow row;
    row.r = r;
    for (Eigen::Index k = 0; k < m; ++k) {
      const double lo = pair(LF, k), hi = pair(HF, k), full = pair(KF, k);
      row.low_bound_const = std::max(row.low_bound_const, std::fabs(lo) / nnorm[k]);
      if (wnorm[k] > 0) row.high_small_factor = std::max(row.high_small_factor, std::fabs(hi) / wnorm[k]);
      if (full != 0) row.partition_error = std::max(row.partition_error, std::fabs(lo + hi - full) / std::fabs(full));
    }
    table.rows.push_back(row);
  }
  for (std::size_t k = 1; k < table.rows.size(); ++k)
    if (table.rows[k].high_small_factor > (1.0 + noise) * table.rows[k - 1].high_small_factor)
      table.high_factor_nonincreasing = false;
  return table;
}

DecayProfile shell_profile(const GridFunction& f, const std::function<double(std::size_t)>& envelope,
                           const Vec3& center, double radius, int shells) {
  if (shells < 1 || !(radius > 0)) throw InvalidArgument("shell profile: bad shell layout");
  const auto& g = f.grid();
  std::vector<double> W(shells, 0.0);
  std::vector<int> count(shells, 0);
  DecayProfile p;
  p.trusted_radius = radius;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double s = norm(g.node(i) - center);
    if (s > radius) continue;
    const int k = std::min(shells - 1, static_cast<int>(s / radius * shells));
    const double e = envelope(i);
    const double w = std::fabs(f[i]) / e;
    if (!std::isfinite(w)) p.finite = false;
    W[k] = std::max(W[k], w);
    ++count[k];
  }
  // Merge empty shells into the next populated one (or the previous one at the end).
  int pending = 0;
  for (int k = 0; k < shells; ++k) {
    const double outer = radius * (k + 1) / shells;
    if (count[k] == 0) {
      ++pending;
      continue;
    }
    if (pending > 0)
      p.warnings.push_back("merged " + std::to_string(pending) + " empty shell(s) below radius " +
                           std::to_string(outer));
    pending = 0;
    p.shell_radii.push_back(outer);
    p.W.push_back(W[k]);
  }
  if (pending > 0) {
    p.warnings.push_back("merged " + std::to_string(pending) + " empty outer shell(s)");
    if (!p.shell_radii.empty()) p.shell_radii.back() = radius;
  }
  if (p.W.empty()) throw InvalidArgument("shell profile: no nodes inside the radius");
  const double wmax = *std::max_element(p.W.begin(), p.W.end());
  double wmin = std::numeric_limits<double>::infinity();
  for (double w : p.W)
    if (w > 1e-12 * wmax) wmin = std::min(wmin, w);
  p.plateau_ratio = wmax > 0 ? wmax / wmin : 1.0;
  if (!std::isfinite(p.plateau_ratio)) p.finite = false;
  return p;
}

DecayProfile decay_profile(const DiscreteLinearizedOperator& op, const GridFunction& f, double q,
                           double trusted_fraction) {
  check_q(q);
  if (!(f.grid() == *op.grid)) throw InvalidArgument("decay profile: grid mismatch");
  const auto& g = *op.grid;
  const double gamma = op.model.gamma;
  auto env = [&](std::size_t i) {
    return theta_gamma(gamma, op.nu[i]) * std::exp(0.5 * q * log_maxwellian(op.state, g.node(i)));
  };
  auto p = shell_profile(f, env, op.state.u, trusted_fraction * g.half_width());
  p.q = q;
  p.gamma = gamma;
  return p;
}

}  // namespace boltzinv
