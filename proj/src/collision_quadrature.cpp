#include "boltzinv/collision_quadrature.hpp"

#include <algorithm>

namespace boltzinv {

CollisionQuadrature::CollisionQuadrature(const CollisionModel& m, const FluidState& s,
                                         CollisionQuadratureOptions opt)
    : m_(m), s_(s), opt_(opt) {
  m_.validate();
  s_.validate();
  theta_omega_ = gauss_legendre(opt_.omega_polar, 0.0, 0.5 * kPi);
  phi_omega_ = periodic_trapezoid(opt_.omega_azimuth);
  phi_v1_ = periodic_trapezoid(opt_.azimuth_count);
  double total = 0.0;
  for (std::size_t i = 0; i < theta_omega_.size(); ++i) {
    const double th = theta_omega_.nodes[i];
    total += 2.0 * m_.cosine_coefficient() * std::cos(th) * std::sin(th) * theta_omega_.weights[i] * 2.0 * kPi;
  }
  omega_scale_ = m_.angular_mass() / total;
}

void CollisionQuadrature::v1_points(const Vec3& v, std::vector<V1Point>& out) const {
  out.clear();
  const double T = s_.T, st = std::sqrt(T), gam = m_.gamma;
  const Vec3 c = v - s_.u;
  const double cn = norm(c);
  const Frame f = frame_along(c);
  const double pref = s_.rho * std::pow(2.0 * kPi * T, -1.5);

  // Radial panels around the Gaussian shell |v1 - u| ~ 0 seen from v.
  const double span = opt_.radial_span * st;
  const double lo = std::max(0.0, cn - span), hi = cn + span;
  std::vector<double> rn, rw;
  double start = lo;
  const auto& g = gauss_legendre(opt_.radial_order);
  if (lo == 0.0) {
    const double p = std::min(st, hi);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = 0.5 * (g.nodes[i] + 1.0);
      rn.push_back(p * x * x * x);
      rw.push_back(0.5 * g.weights[i] * 3.0 * p * x * x);
    }
    start = p;
  }
  const int panels = std::max(1, static_cast<int>(std::ceil((hi - start) / (3.0 * st))));
  std::vector<double> breaks(panels + 1);
  for (int k = 0; k <= panels; ++k) breaks[k] = start + (hi - start) * k / panels;
  const auto rest = composite_gauss(breaks, opt_.radial_order);
  rn.insert(rn.end(), rest.nodes.begin(), rest.nodes.end());
  rw.insert(rw.end(), rest.weights.begin(), rest.weights.end());

  const auto& gt = gauss_legendre(opt_.polar_order);
  std::vector<double> tn, tw;
  for (std::size_t ir = 0; ir < rn.size(); ++ir) {
    const double r = rn[ir];
    if (r <= 0) continue;
    const double kappa = r * cn / T;
    const double radial = rw[ir] * r * r * std::pow(r, gam);
    // Polar cosine t of v1 - v against c. M(v1) carries exp(-kappa (t + 1)); panels
    // grow geometrically from t = -1 and stop once that factor is below 1e-17.
    tn.clear();
    tw.clear();
    const double g0 = pref * std::exp(-(r - cn) * (r - cn) / (2.0 * T));
    double a = -1.0;
    double width = kappa > 0.5 ? 0.5 / kappa : 2.0;
    while (a < 1.0) {
      const double b = std::min(1.0, a + width);
      for (std::size_t it = 0; it < gt.size(); ++it) {
        const double t = a + 0.5 * (b - a) * (gt.nodes[it] + 1.0);
        tn.push_back(t);
        tw.push_back(0.5 * (b - a) * gt.weights[it] * g0 * std::exp(-kappa * (t + 1.0)));
      }
      if (kappa * (b + 1.0) > 39.0) break;
      a = b;
      width *= 2.0;
    }
    for (std::size_t it = 0; it < tn.size(); ++it) {
      double t = tn[it];
      const double wt = tw[it];
      t = std::clamp(t, -1.0, 1.0);
      const double sn = std::sqrt(std::max(0.0, 1.0 - t * t));
      for (std::size_t ip = 0; ip < phi_v1_.size(); ++ip) {
        const double ph = phi_v1_.nodes[ip];
        const Vec3 dir = t * f.e3 + (sn * std::cos(ph)) * f.e1 + (sn * std::sin(ph)) * f.e2;
        out.push_back({v + r * dir, radial * wt * phi_v1_.weights[ip]});
      }
    }
  }
  // Points far out in the Gaussian tail contribute nothing at double precision.
  double wmax = 0.0;
  for (const auto& p : out) wmax = std::max(wmax, p.weight);
  std::erase_if(out, [&](const V1Point& p) { return p.weight < 1e-15 * wmax; });
}

void CollisionQuadrature::omega_points(const Vec3& v, const Vec3& v1,
                                       std::vector<OmegaPoint>& out) const {
  out.clear();
  const Vec3 z = v1 - v;
  const double r = norm(z);
  if (r == 0) return;
  const Frame f = frame_along(z);
  const double coef = m_.cosine_coefficient();
  for (std::size_t i = 0; i < theta_omega_.size(); ++i) {
    const double th = theta_omega_.nodes[i];
    const double ct = std::cos(th), st = std::sin(th);
    // Both hemispheres give the same post-collision pair, hence the factor 2.
    const double w_theta = 2.0 * coef * ct * st * theta_omega_.weights[i] * omega_scale_;
    for (std::size_t j = 0; j < phi_omega_.size(); ++j) {
      const double ph = phi_omega_.nodes[j];
      const Vec3 omega = ct * f.e3 + (st * std::cos(ph)) * f.e1 + (st * std::sin(ph)) * f.e2;
      const Vec3 shift = (r * ct) * omega;
      out.push_back({v + shift, v1 - shift, w_theta * phi_omega_.weights[j]});
    }
  }
}

}  // namespace boltzinv
