#pragma once

#include <vector>

#include "boltzinv/collision_model.hpp"

namespace boltzinv {

struct CollisionQuadratureOptions {
  int radial_order = 6;     // Gauss points per radial panel
  int polar_order = 4;      // v1 polar points per graded panel
  int azimuth_count = 8;    // v1 azimuth points
  int omega_polar = 6;      // scattering polar points on the hemisphere
  int omega_azimuth = 8;    // scattering azimuth points
  double radial_span = 8.5; // radial cut-off in units of sqrt(T) around |v-u|
};

// Quadrature over (v1, omega) for collision integrals at a fixed target v.
//
// v1 points carry the measure M(v1) |v1-v|^gamma dv1; omega points carry
// 2 beta(theta) d omega over the hemisphere omega . (v1 - v) >= 0 together
// with the post-collision velocities v' and v1'.
class CollisionQuadrature {
 public:
  CollisionQuadrature(const CollisionModel& m, const FluidState& s,
                      CollisionQuadratureOptions opt = {});

  struct V1Point {
    Vec3 v1;
    double weight;
  };
  struct OmegaPoint {
    Vec3 v_post;
    Vec3 v1_post;
    double weight;
  };

  // Fills the v1 points for target v.
  void v1_points(const Vec3& v, std::vector<V1Point>& out) const;
  // Fills the omega points for the pair (v, v1).
  void omega_points(const Vec3& v, const Vec3& v1, std::vector<OmegaPoint>& out) const;

  const CollisionModel& model() const { return m_; }
  const FluidState& state() const { return s_; }

 private:
  CollisionModel m_;
  FluidState s_;
  CollisionQuadratureOptions opt_;
  QuadratureRule theta_omega_;
  QuadratureRule phi_omega_;
  double omega_scale_ = 1.0;  // makes the discrete omega weights sum to the angular mass
  QuadratureRule phi_v1_;
};

}  // namespace boltzinv
