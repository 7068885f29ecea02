#include "boltzinv/velocity_grid.hpp"

#include <algorithm>
#include <cstdlib>
#include <omp.h>

#include "boltzinv/collision_quadrature.hpp"

namespace boltzinv {

VelocityGrid::VelocityGrid(const Vec3& center, double half_width, int n)
    : center_(center), R_(half_width), n_(n), h_(2.0 * half_width / n) {
  if (!finite(center)) throw InvalidArgument("grid: non-finite center");
  if (!(half_width > 0 && std::isfinite(half_width))) throw InvalidArgument("grid: half width must be positive");
  if (n < 2) throw InvalidArgument("grid: need at least two points per axis");
}

bool VelocityGrid::inside_box(const Vec3& v) const {
  for (int a = 0; a < 3; ++a)
    if (std::fabs(v[a] - center_[a]) > R_) return false;
  return true;
}

std::size_t memory_cap_bytes() {
  if (const char* env = std::getenv("BOLTZINV_MEM_CAP_BYTES")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0') return static_cast<std::size_t>(v);
    throw InvalidArgument("BOLTZINV_MEM_CAP_BYTES must be a byte count");
  }
  return std::size_t{2} << 30;
}

GridPtr build_grid(const FluidState& s, double c_R, int n) {
  s.validate();
  if (n % 2 != 0) throw InvalidArgument("build_grid: n must be even");
  if (n < 8 || n > 48) throw InvalidArgument("build_grid: n must lie in [8,48]");
  if (!(c_R >= 4.0)) throw InvalidArgument("build_grid: c_R must be at least 4");
  const std::size_t need = dense_operator_bytes(n);
  if (need > memory_cap_bytes())
    throw ResourceError("build_grid: dense operator needs " + std::to_string(need) +
                        " bytes, above the cap of " + std::to_string(memory_cap_bytes()));
  return std::make_shared<const VelocityGrid>(s.u, c_R * s.sqrt_T(), n);
}

// ---------------------------------------------------------------------------

GridFunction::GridFunction(GridPtr g, double fill) : grid_(std::move(g)) {
  if (!grid_) throw InvalidArgument("grid function: null grid");
  values_.assign(grid_->size(), fill);
}

GridFunction::GridFunction(GridPtr g, std::vector<double> values)
    : grid_(std::move(g)), values_(std::move(values)) {
  if (!grid_) throw InvalidArgument("grid function: null grid");
  if (values_.size() != grid_->size()) throw InvalidArgument("grid function: length does not match grid");
}

bool GridFunction::same_grid(const GridFunction& o) const {
  return grid_ && o.grid_ && (grid_ == o.grid_ || *grid_ == *o.grid_);
}

void GridFunction::require_same_grid(const GridFunction& o, const char* who) const {
  if (!same_grid(o)) throw InvalidArgument(std::string(who) + ": grid mismatch");
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
  require_same_grid(o, "grid function +=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
  require_same_grid(o, "grid function -=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

GridFunction& GridFunction::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

double GridFunction::max_abs() const {
  double m = 0;
  for (double v : values_) m = std::max(m, std::fabs(v));
  return m;
}

bool GridFunction::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

GridFunction sample(const GridPtr& g, const std::function<double(const Vec3&)>& fn) {
  GridFunction f(g);
  for (std::size_t i = 0; i < g->size(); ++i) f[i] = fn(g->node(i));
  return f;
}

double inner_product(const GridFunction& f, const GridFunction& g, const GridFunction* w) {
  f.require_same_grid(g, "inner_product");
  if (w) f.require_same_grid(*w, "inner_product (weight)");
  CompensatedSum acc;
  for (std::size_t i = 0; i < f.size(); ++i) acc.add(w ? f[i] * g[i] * (*w)[i] : f[i] * g[i]);
  return acc.value() * f.grid().cell_weight();
}

double l2_norm(const GridFunction& f) { return std::sqrt(inner_product(f, f)); }

double euclidean_norm(const GridFunction& f, std::optional<double> radius) {
  CompensatedSum acc;
  const auto& g = f.grid();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (radius && norm(g.node(i) - g.center()) > *radius) continue;
    acc.add(f[i] * f[i]);
  }
  return std::sqrt(acc.value());
}

double trilinear(const GridFunction& f, const Vec3& v) {
  const auto& g = f.grid();
  if (!g.inside_box(v)) return 0.0;
  const int n = g.n();
  int i0[3];
  double t[3];
  for (int a = 0; a < 3; ++a) {
    const double xi = (v[a] - (g.center()[a] - g.half_width())) / g.h() - 0.5;
    i0[a] = std::clamp(static_cast<int>(std::floor(xi)), 0, n - 2);
    t[a] = xi - i0[a];
  }
  double out = 0.0;
  for (int dx = 0; dx < 2; ++dx)
    for (int dy = 0; dy < 2; ++dy)
      for (int dz = 0; dz < 2; ++dz) {
        const double w = (dx ? t[0] : 1 - t[0]) * (dy ? t[1] : 1 - t[1]) * (dz ? t[2] : 1 - t[2]);
        out += w * f[g.flat(i0[0] + dx, i0[1] + dy, i0[2] + dz)];
      }
  return out;
}

double tricubic(const GridFunction& f, const Vec3& v) {
  const auto& g = f.grid();
  if (!g.inside_box(v)) return 0.0;
  const int n = g.n();
  if (n < 4) return trilinear(f, v);
  int i0[3];
  double w[3][4];
  for (int a = 0; a < 3; ++a) {
    const double xi = (v[a] - (g.center()[a] - g.half_width())) / g.h() - 0.5;
    i0[a] = std::clamp(static_cast<int>(std::floor(xi)) - 1, 0, n - 4);
    const double t = xi - i0[a];  // stencil nodes sit at t = 0, 1, 2, 3
    w[a][0] = -(t - 1) * (t - 2) * (t - 3) / 6.0;
    w[a][1] = t * (t - 2) * (t - 3) / 2.0;
    w[a][2] = -t * (t - 1) * (t - 3) / 2.0;
    w[a][3] = t * (t - 1) * (t - 2) / 6.0;
  }
  double out = 0.0;
  for (int dx = 0; dx < 4; ++dx)
    for (int dy = 0; dy < 4; ++dy) {
      const double wxy = w[0][dx] * w[1][dy];
      const std::size_t base = g.flat(i0[0] + dx, i0[1] + dy, i0[2]);
      double line = 0.0;
      for (int dz = 0; dz < 4; ++dz) line += w[2][dz] * f[base + dz];
      out += wxy * line;
    }
  return out;
}

MaxwellianInterpolator::MaxwellianInterpolator(const GridFunction& f, const FluidState& s,
                                               Interpolation kind)
    : ratio_(f.grid_ptr()), s_(s), kind_(kind) {
  s_.validate();
  const auto& g = f.grid();
  for (std::size_t i = 0; i < f.size(); ++i) ratio_[i] = f[i] / sqrt_maxwellian(s_, g.node(i));
}

double MaxwellianInterpolator::ratio(const Vec3& v) const {
  return kind_ == Interpolation::Cubic ? tricubic(ratio_, v) : trilinear(ratio_, v);
}

double MaxwellianInterpolator::operator()(const Vec3& v) const {
  const double r = ratio(v);
  return r == 0.0 ? 0.0 : r * sqrt_maxwellian(s_, v);
}

// ---------------------------------------------------------------------------
// matrix-free K

namespace {

double matrix_free_at(const CollisionQuadrature& q, const MaxwellianInterpolator& p, const Vec3& v,
                      std::vector<CollisionQuadrature::V1Point>& v1s,
                      std::vector<CollisionQuadrature::OmegaPoint>& oms) {
  q.v1_points(v, v1s);
  CompensatedSum loss, gain;
  for (const auto& a : v1s) {
    loss.add(a.weight * p.ratio(a.v1));
    q.omega_points(v, a.v1, oms);
    double inner = 0.0;
    for (const auto& o : oms) inner += o.weight * p.ratio(o.v_post);
    gain.add(a.weight * inner);
  }
  const double sm = sqrt_maxwellian(q.state(), v);
  return sm * (q.model().angular_mass() * loss.value() - 2.0 * gain.value());
}

}  // namespace

double apply_K_matrix_free(const CollisionModel& m, const FluidState& s, const VelocityGrid& g,
                           const GridFunction& f, std::size_t node) {
  if (!(f.grid() == g)) throw InvalidArgument("apply_K_matrix_free: grid mismatch");
  if (node >= g.size()) throw InvalidArgument("apply_K_matrix_free: node out of range");
  const CollisionQuadrature q(m, s);
  const MaxwellianInterpolator p(f, s);
  std::vector<CollisionQuadrature::V1Point> v1s;
  std::vector<CollisionQuadrature::OmegaPoint> oms;
  return matrix_free_at(q, p, g.node(node), v1s, oms);
}

GridFunction apply_K_matrix_free(const CollisionModel& m, const FluidState& s,
                                 const GridFunction& f) {
  const CollisionQuadrature q(m, s);
  const MaxwellianInterpolator p(f, s);
  GridFunction out(f.grid_ptr());
  const auto& g = f.grid();
  const long long count = static_cast<long long>(g.size());
#pragma omp parallel
  {
    std::vector<CollisionQuadrature::V1Point> v1s;
    std::vector<CollisionQuadrature::OmegaPoint> oms;
#pragma omp for schedule(dynamic, 16)
    for (long long i = 0; i < count; ++i) out[i] = matrix_free_at(q, p, g.node(i), v1s, oms);
  }
  return out;
}

}  // namespace boltzinv
