#include "boltzinv/operator.hpp"

#include <omp.h>

#include <chrono>
#include <fstream>

#include "boltzinv/lattice_symmetry.hpp"

namespace boltzinv {

namespace {

constexpr int kStencilHalf = 2;
constexpr int kStencilWidth = 2 * kStencilHalf + 1;
constexpr int kStencilSize = kStencilWidth * kStencilWidth * kStencilWidth;

constexpr int moment_slot(int a0, int a1, int a2) { return (a0 * 5 + a1) * 5 + a2; }

int thread_count(const AssemblyOptions& opt) {
  return opt.threads > 0 ? opt.threads : omp_get_max_threads();
}

double factorial(int k) {
  double f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Multi-indices of total order <= order.
std::vector<std::array<int, 3>> multi_indices(int order) {
  std::vector<std::array<int, 3>> out;
  for (int a = 0; a <= order; ++a)
    for (int b = 0; a + b <= order; ++b)
      for (int c = 0; a + b + c <= order; ++c) out.push_back({a, b, c});
  return out;
}

// Lattice sum of (k1 - k2)(c, c + z) z^alpha h^3 over z = h m, 0 < |z| < radius.
std::array<double, 125> lattice_moments(const KernelEvaluator& k, const Vec3& c, double h,
                                        int order, double radius) {
  std::array<double, 125> acc{};
  const int m = static_cast<int>(std::ceil(radius / h));
  const double h3 = h * h * h, r2max = radius * radius;
  const auto idx = multi_indices(order);
  double pw[3][5];
  for (int i = -m; i <= m; ++i)
    for (int j = -m; j <= m; ++j)
      for (int l = -m; l <= m; ++l) {
        if (i == 0 && j == 0 && l == 0) continue;
        const Vec3 z{h * i, h * j, h * l};
        if (norm2(z) >= r2max) continue;
        const double kv = k.frame(c, c + z).value() * h3;
        if (kv == 0.0) continue;
        for (int d = 0; d < 3; ++d) {
          pw[d][0] = 1.0;
          for (int p = 1; p <= order; ++p) pw[d][p] = pw[d][p - 1] * z[d];
        }
        for (const auto& a : idx) acc[moment_slot(a[0], a[1], a[2])] += kv * pw[0][a[0]] * pw[1][a[1]] * pw[2][a[2]];
      }
  return acc;
}

// Correction stencil for one row from its moment defects Z (row frame).
std::array<double, kStencilSize> correction_stencil(const std::array<double, 125>& Z, double h,
                                                    int order) {
  std::array<double, kStencilSize> w{};
  for (const auto& a : multi_indices(order)) {
    const double z = Z[moment_slot(a[0], a[1], a[2])] /
                     (factorial(a[0]) * factorial(a[1]) * factorial(a[2]) *
                      std::pow(h, a[0] + a[1] + a[2]));
    if (z == 0.0) continue;
    const auto& s0 = difference_stencil(a[0]);
    const auto& s1 = difference_stencil(a[1]);
    const auto& s2 = difference_stencil(a[2]);
    for (int o0 = 0; o0 < kStencilWidth; ++o0) {
      if (s0[o0] == 0.0) continue;
      for (int o1 = 0; o1 < kStencilWidth; ++o1) {
        if (s1[o1] == 0.0) continue;
        for (int o2 = 0; o2 < kStencilWidth; ++o2)
          w[(o0 * kStencilWidth + o1) * kStencilWidth + o2] += z * s0[o0] * s1[o1] * s2[o2];
      }
    }
  }
  return w;
}

std::array<double, 125> moment_defect(const KernelEvaluator& k, const Vec3& c, double h, int order,
                                      double radius) {
  auto exact = kernel_moments_exact(k, c, order, radius);
  const auto lattice = lattice_moments(k, c, h, order, radius);
  for (int i = 0; i < 125; ++i) exact[i] -= lattice[i];
  return exact;
}

// Copy the strict lower triangle onto the upper one.
void mirror_lower(Eigen::MatrixXd& K, int threads) {
  const long long N = K.rows();
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads)
  for (long long j = 0; j < N; ++j)
    for (long long i = 0; i < j; ++i) K(i, j) = K(j, i);
}

void add_corrections(Eigen::MatrixXd& K, const VelocityGrid& g,
                     const std::vector<std::array<double, kStencilSize>>& coef) {
  const int n = g.n();
  const std::size_t N = g.size();
  for (std::size_t i = 0; i < N; ++i) {
    const auto p = g.index3(i);
    for (int o0 = -kStencilHalf; o0 <= kStencilHalf; ++o0)
      for (int o1 = -kStencilHalf; o1 <= kStencilHalf; ++o1)
        for (int o2 = -kStencilHalf; o2 <= kStencilHalf; ++o2) {
          const int q0 = p[0] + o0, q1 = p[1] + o1, q2 = p[2] + o2;
          if (q0 < 0 || q1 < 0 || q2 < 0 || q0 >= n || q1 >= n || q2 >= n) continue;
          const std::size_t j = g.flat(q0, q1, q2);
          if (j < i) continue;
          const int slot = ((o0 + 2) * kStencilWidth + (o1 + 2)) * kStencilWidth + (o2 + 2);
          if (j == i) {
            K(i, i) += coef[i][slot];
            continue;
          }
          const int mirror = ((2 - o0) * kStencilWidth + (2 - o1)) * kStencilWidth + (2 - o2);
          const double s = 0.5 * (coef[i][slot] + coef[j][mirror]);
          K(i, j) += s;
          K(j, i) += s;
        }
  }
}

void check_capacity(const VelocityGrid& g) {
  if (dense_operator_bytes(g.n()) > memory_cap_bytes())
    throw ResourceError("assemble: dense operator exceeds the memory cap");
}

DiscreteLinearizedOperator prepare(const CollisionModel& m, const FluidState& s, const GridPtr& g) {
  m.validate();
  s.validate();
  if (!g) throw InvalidArgument("assemble: null grid");
  check_capacity(*g);
  DiscreteLinearizedOperator op;
  op.grid = g;
  op.state = s;
  op.model = m;
  op.nu.assign(g->size(), 0.0);
  op.K.setZero(static_cast<Eigen::Index>(g->size()), static_cast<Eigen::Index>(g->size()));
  op.phi = discrete_null_basis(s, g);
  return op;
}

void assemble_generic(DiscreteLinearizedOperator& op, const AssemblyOptions& opt, int threads) {
  const auto& g = *op.grid;
  const KernelEvaluator k(op.model, op.state);
  const long long N = static_cast<long long>(g.size());
  const double h3 = g.cell_weight();
  const double radius = opt.moment_radius * op.state.sqrt_T();
  std::vector<std::array<double, kStencilSize>> coef(g.size());
  std::vector<Vec3> c(g.size());
  for (long long i = 0; i < N; ++i) c[i] = g.node(i) - op.state.u;

#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
  for (long long i = 0; i < N; ++i) {
    op.nu[i] = collision_frequency_radial(op.model, op.state, norm(c[i]));
    for (long long j = i + 1; j < N; ++j) op.K(j, i) = k.frame(c[i], c[j]).value() * h3;
    coef[i] = correction_stencil(moment_defect(k, c[i], g.h(), opt.correction_order, radius), g.h(),
                                 opt.correction_order);
  }
  mirror_lower(op.K, threads);
  add_corrections(op.K, g, coef);
  op.stats.kernel_rows = g.size();
  op.stats.moment_rows = g.size();
}

void assemble_symmetric(DiscreteLinearizedOperator& op, const AssemblyOptions& opt, int threads) {
  const auto& g = *op.grid;
  const KernelEvaluator k(op.model, op.state);
  const OrbitMap orbits = octahedral_orbits(g.n());
  const std::size_t N = g.size(), nreps = orbits.reps.size();
  const double h3 = g.cell_weight();
  const double radius = opt.moment_radius * op.state.sqrt_T();
  std::vector<Vec3> c(N);
  for (std::size_t i = 0; i < N; ++i) c[i] = g.node(i) - op.state.u;

  Eigen::MatrixXd rows(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(nreps));
  std::vector<std::array<double, 125>> Z(nreps);
  std::vector<double> nu_rep(nreps);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long long r = 0; r < static_cast<long long>(nreps); ++r) {
    const std::size_t i = orbits.reps[r];
    for (std::size_t j = 0; j < N; ++j) rows(j, r) = j == i ? 0.0 : k.frame(c[i], c[j]).value() * h3;
    Z[r] = moment_defect(k, c[i], g.h(), opt.correction_order, radius);
    nu_rep[r] = collision_frequency_radial(op.model, op.state, norm(c[i]));
  }

  const auto idx = multi_indices(opt.correction_order);
  std::vector<std::array<double, kStencilSize>> coef(N);
#pragma omp parallel for schedule(static) num_threads(threads)
  for (long long i = 0; i < static_cast<long long>(N); ++i) {
    const int r = orbits.rep_of[i];
    for (std::size_t j = 0; j < N; ++j) op.K(j, i) = rows(orbits.pull_back(i, j), r);
    std::array<double, 125> Zi{};
    for (const auto& a : idx) {
      int sgn = 1;
      const auto b = orbits.op[i].monomial_image(a, sgn);
      Zi[moment_slot(a[0], a[1], a[2])] = sgn * Z[r][moment_slot(b[0], b[1], b[2])];
    }
    coef[i] = correction_stencil(Zi, g.h(), opt.correction_order);
    op.nu[i] = nu_rep[r];
  }
  mirror_lower(op.K, threads);
  add_corrections(op.K, g, coef);
  op.stats.kernel_rows = nreps;
  op.stats.moment_rows = nreps;
  op.stats.symmetric_path = true;
}

}  // namespace

const std::array<double, 5>& difference_stencil(int k) {
  static const std::array<std::array<double, 5>, 5> s{{
      {0.0, 0.0, 1.0, 0.0, 0.0},
      {1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12},
      {-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12},
      {-0.5, 1.0, 0.0, -1.0, 0.5},
      {1.0, -4.0, 6.0, -4.0, 1.0},
  }};
  if (k < 0 || k > 4) throw InvalidArgument("difference_stencil: order must be 0..4");
  return s[k];
}

std::array<double, 125> kernel_moments_exact(const KernelEvaluator& k, const Vec3& c, int order,
                                             double radius) {
  if (order < 0 || order > 4) throw InvalidArgument("kernel moments: order must be 0..4");
  const double st = k.state().sqrt_T();
  const Frame f = frame_along(c);
  const double cn = norm(c);
  std::vector<double> breaks;
  for (double b : {0.0, 0.125, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 20.0}) {
    const double x = b * st;
    if (x < radius) breaks.push_back(x);
  }
  breaks.push_back(radius);
  const auto rr = composite_gauss(breaks, 8);
  const double tb[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
  const auto tt = composite_gauss(tb, 16);
  const auto pp = periodic_trapezoid(12);
  const auto idx = multi_indices(order);

  std::array<double, 125> out{};
  std::vector<CompensatedSum> acc(idx.size());
  const Vec3 cl{0, 0, cn};
  double pw[3][5];
  for (std::size_t ir = 0; ir < rr.size(); ++ir) {
    const double r = rr.nodes[ir];
    for (std::size_t it = 0; it < tt.size(); ++it) {
      const double t = tt.nodes[it], sn = std::sqrt(std::max(0.0, 1.0 - t * t));
      const Vec3 zl{r * sn, 0.0, r * t};
      const double kv = k.k1_frame(cl, cl + zl) - k.k2_invariants(r, r * r + 2.0 * cn * r * t, cn * sn);
      const double w = kv * r * r * rr.weights[ir] * tt.weights[it];
      if (w == 0.0) continue;
      for (std::size_t ip = 0; ip < pp.size(); ++ip) {
        const double ph = pp.nodes[ip];
        const Vec3 z = (r * sn * std::cos(ph)) * f.e1 + (r * sn * std::sin(ph)) * f.e2 + (r * t) * f.e3;
        for (int d = 0; d < 3; ++d) {
          pw[d][0] = 1.0;
          for (int p = 1; p <= order; ++p) pw[d][p] = pw[d][p - 1] * z[d];
        }
        const double wp = w * pp.weights[ip];
        for (std::size_t a = 0; a < idx.size(); ++a)
          acc[a].add(wp * pw[0][idx[a][0]] * pw[1][idx[a][1]] * pw[2][idx[a][2]]);
      }
    }
  }
  for (std::size_t a = 0; a < idx.size(); ++a) out[moment_slot(idx[a][0], idx[a][1], idx[a][2])] = acc[a].value();
  return out;
}

std::array<GridFunction, 5> discrete_null_basis(const FluidState& s, const GridPtr& g) {
  const PsiBasis psi(s);
  std::array<GridFunction, 5> phi;
  for (int a = 0; a < 5; ++a) phi[a] = sample(g, [&](const Vec3& v) { return psi(a, v); });
  // Modified Gram-Schmidt, two sweeps.
  for (int sweep = 0; sweep < 2; ++sweep)
    for (int a = 0; a < 5; ++a) {
      for (int b = 0; b < a; ++b) {
        const double p = inner_product(phi[a], phi[b]);
        for (std::size_t i = 0; i < phi[a].size(); ++i) phi[a][i] -= p * phi[b][i];
      }
      phi[a] *= 1.0 / l2_norm(phi[a]);
    }
  return phi;
}

DiscreteLinearizedOperator assemble(const CollisionModel& m, const FluidState& s, const GridPtr& g,
                                    const AssemblyOptions& opt) {
  if (opt.correction_order < 0 || opt.correction_order > 4)
    throw InvalidArgument("assemble: correction order must be 0..4");
  const auto t0 = std::chrono::steady_clock::now();
  auto op = prepare(m, s, g);
  const int threads = thread_count(opt);
  if (opt.use_symmetry && g->center() == s.u)
    assemble_symmetric(op, opt, threads);
  else
    assemble_generic(op, opt, threads);
  op.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return op;
}

DiscreteLinearizedOperator assemble_reference(const CollisionModel& m, const FluidState& s,
                                              const GridPtr& g, const AssemblyOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  auto op = prepare(m, s, g);
  assemble_generic(op, opt, 1);
  op.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return op;
}

void symmetric_matvec(const Eigen::MatrixXd& A, std::span<const double> x, std::span<double> y) {
  const long long N = A.rows();
  if (static_cast<long long>(x.size()) != N || static_cast<long long>(y.size()) != N)
    throw InvalidArgument("matvec: length mismatch");
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < N; ++i) {
    const double* col = A.col(i).data();
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
    long long j = 0;
    for (; j + 3 < N; j += 4) {
      s0 += col[j] * x[j];
      s1 += col[j + 1] * x[j + 1];
      s2 += col[j + 2] * x[j + 2];
      s3 += col[j + 3] * x[j + 3];
    }
    for (; j < N; ++j) s0 += col[j] * x[j];
    y[i] = (s0 + s1) + (s2 + s3);
  }
}

GridFunction apply_K(const DiscreteLinearizedOperator& op, const GridFunction& f) {
  if (!(f.grid() == *op.grid)) throw InvalidArgument("apply_K: grid mismatch");
  GridFunction out(op.grid);
  symmetric_matvec(op.K, f.values(), out.values());
  return out;
}

GridFunction apply_L(const DiscreteLinearizedOperator& op, const GridFunction& f) {
  GridFunction out = apply_K(op, f);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += op.nu[i] * f[i];
  return out;
}

GridFunction project_P(const DiscreteLinearizedOperator& op, const GridFunction& f) {
  if (!(f.grid() == *op.grid)) throw InvalidArgument("project_P: grid mismatch");
  GridFunction out(op.grid);
  for (const auto& p : op.phi) {
    const double c = inner_product(f, p);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c * p[i];
  }
  return out;
}

GridFunction project_complement(const DiscreteLinearizedOperator& op, const GridFunction& f) {
  return f - project_P(op, f);
}

double chi_cutoff(double s, double r) {
  if (!(r > 0)) throw InvalidArgument("chi_cutoff: r must be positive");
  if (s <= r) return 0.0;
  if (s >= 2.0 * r) return 1.0;
  const double x = (s - r) / r;
  return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

KSplit split_K_chi(const DiscreteLinearizedOperator& op, double r) {
  if (!(r > 0)) throw InvalidArgument("split_K_chi: r must be positive");
  const auto& g = *op.grid;
  const long long N = static_cast<long long>(g.size());
  KSplit out;
  out.low.resize(N, N);
  out.high.resize(N, N);
#pragma omp parallel for schedule(static)
  for (long long j = 0; j < N; ++j) {
    const Vec3 vj = g.node(j);
    for (long long i = 0; i < N; ++i) {
      const double chi = chi_cutoff(norm(g.node(i) - vj), r);
      const double kij = op.K(i, j);
      const double low = (1.0 - chi) * kij;
      out.low(i, j) = low;
      out.high(i, j) = kij - low;
    }
  }
  return out;
}

void save_operator_snapshot(const DiscreteLinearizedOperator& op, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidArgument("cannot open " + path + " for writing");
  write_header(os, *op.grid, PayloadKind::OperatorSnapshot);
  write_reals(os, op.nu);
  const Eigen::Index N = op.K.rows();
  std::vector<double> row;
  for (Eigen::Index i = 0; i < N; ++i) {
    row.clear();
    for (Eigen::Index j = i; j < N; ++j) row.push_back(op.K(i, j));
    write_reals(os, row);
  }
  if (!os) throw InvalidArgument("write failed: " + path);
}

OperatorSnapshot load_operator_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidArgument("cannot open " + path);
  OperatorSnapshot snap;
  snap.header = read_header(is);
  if (snap.header.kind != PayloadKind::OperatorSnapshot) throw InvalidArgument(path + ": not an operator snapshot");
  const std::size_t N = static_cast<std::size_t>(snap.header.n) * snap.header.n * snap.header.n;
  snap.nu = read_reals(is, N);
  snap.K.resize(N, N);
  for (std::size_t i = 0; i < N; ++i) {
    const auto row = read_reals(is, N - i);
    for (std::size_t j = i; j < N; ++j) snap.K(i, j) = snap.K(j, i) = row[j - i];
  }
  return snap;
}

}  // namespace boltzinv
