#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "boltzinv/collision_model.hpp"

namespace boltzinv {

// Uniform cell-midpoint lattice on [center - R, center + R]^3.
class VelocityGrid {
 public:
  VelocityGrid(const Vec3& center, double half_width, int n);

  int n() const { return n_; }
  double half_width() const { return R_; }
  double h() const { return h_; }
  const Vec3& center() const { return center_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }
  double cell_weight() const { return h_ * h_ * h_; }

  std::size_t flat(int ix, int iy, int iz) const {
    return (static_cast<std::size_t>(ix) * n_ + iy) * n_ + iz;
  }
  std::array<int, 3> index3(std::size_t i) const {
    const int iz = static_cast<int>(i % n_);
    const int iy = static_cast<int>((i / n_) % n_);
    return {static_cast<int>(i / (static_cast<std::size_t>(n_) * n_)), iy, iz};
  }
  double coordinate(int axis, int k) const { return center_[axis] - R_ + h_ * (k + 0.5); }
  Vec3 node(std::size_t i) const {
    const auto q = index3(i);
    return {coordinate(0, q[0]), coordinate(1, q[1]), coordinate(2, q[2])};
  }
  bool inside_box(const Vec3& v) const;

  bool operator==(const VelocityGrid& o) const {
    return n_ == o.n_ && R_ == o.R_ && center_ == o.center_;
  }

 private:
  Vec3 center_;
  double R_;
  int n_;
  double h_;
};

using GridPtr = std::shared_ptr<const VelocityGrid>;

// Bytes allowed for one dense operator; BOLTZINV_MEM_CAP_BYTES overrides the default.
std::size_t memory_cap_bytes();
inline std::size_t dense_operator_bytes(int n) {
  const std::size_t m = static_cast<std::size_t>(n) * n * n;
  return 8 * m * m;
}

// Grid of half-width c_R sqrt(T) centred at u.
GridPtr build_grid(const FluidState& s, double c_R = 6.0, int n = 16);

class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(GridPtr g, double fill = 0.0);
  GridFunction(GridPtr g, std::vector<double> values);

  const VelocityGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& storage() { return values_; }

  bool same_grid(const GridFunction& o) const;
  void require_same_grid(const GridFunction& o, const char* who) const;

  GridFunction& operator+=(const GridFunction& o);
  GridFunction& operator-=(const GridFunction& o);
  GridFunction& operator*=(double s);
  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(double s, GridFunction a) { return a *= s; }

  double max_abs() const;
  bool all_finite() const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

GridFunction sample(const GridPtr& g, const std::function<double(const Vec3&)>& fn);

// Discrete L2 pairing sum f g w h^3 with compensated, fixed-order accumulation.
double inner_product(const GridFunction& f, const GridFunction& g,
                     const GridFunction* w = nullptr);
double l2_norm(const GridFunction& f);
// Euclidean norm of the value vector, optionally restricted to |v - center| <= radius.
double euclidean_norm(const GridFunction& f, std::optional<double> radius = std::nullopt);

// Trilinear interpolation, linear extrapolation from the outer cells inside the
// box and zero outside it.
double trilinear(const GridFunction& f, const Vec3& v);
// Tensor-product cubic Lagrange interpolation on a 4x4x4 stencil, shifted
// inward next to the box faces. Zero outside the box.
double tricubic(const GridFunction& f, const Vec3& v);

enum class Interpolation { Linear, Cubic };

// Interpolates f / sqrt(M) and multiplies back by sqrt(M) at the target point.
// The cubic rule is exact for sqrt(M) times cubic polynomials.
class MaxwellianInterpolator {
 public:
  MaxwellianInterpolator(const GridFunction& f, const FluidState& s,
                         Interpolation kind = Interpolation::Cubic);
  double operator()(const Vec3& v) const;
  // Interpolated ratio f / sqrt(M) at v (zero outside the box).
  double ratio(const Vec3& v) const;

 private:
  GridFunction ratio_;
  FluidState s_;
  Interpolation kind_;
};

// Independent quadrature of (K f)(v) at one grid node: the loss part by
// spherical quadrature around v, the gain part through the (omega, v1)
// collision parametrization with f interpolated at the post-collision point.
double apply_K_matrix_free(const CollisionModel& m, const FluidState& s, const VelocityGrid& g,
                           const GridFunction& f, std::size_t node);
// Same for every node, parallel over nodes.
GridFunction apply_K_matrix_free(const CollisionModel& m, const FluidState& s,
                                 const GridFunction& f);

// Binary and CSV persistence.
enum class PayloadKind : std::uint32_t { GridFunction = 0, OperatorSnapshot = 1 };

struct GridHeader {
  int n = 0;
  float R = 0;
  std::array<float, 3> center{};
  PayloadKind kind = PayloadKind::GridFunction;
};

void write_header(std::ostream& os, const VelocityGrid& g, PayloadKind kind);
GridHeader read_header(std::istream& is);
void write_reals(std::ostream& os, std::span<const double> v);
std::vector<double> read_reals(std::istream& is, std::size_t count);

void save_grid_function(const GridFunction& f, const std::string& path);
GridFunction load_grid_function(const std::string& path);
void export_csv(const GridFunction& f, const std::string& path);

}  // namespace boltzinv
