#include <algorithm>

#include "boltzinv/hilbert.hpp"

namespace boltzinv {

FluidState AnalyticFluidField::state(double t, const Vec3& x) const {
  if (!jet) throw InvalidArgument("fluid field '" + id + "' has no evaluator");
  const FieldJet j = jet(t, x);
  FluidState s{j.rho, j.u, j.T};
  s.validate();
  return s;
}

AnalyticFluidField constant_field(const FluidState& s) {
  s.validate();
  AnalyticFluidField f;
  f.id = "constant";
  f.params = {{"rho", s.rho}, {"ux", s.u.x}, {"uy", s.u.y}, {"uz", s.u.z}, {"T", s.T}};
  f.jet = [s](double, const Vec3&) {
    FieldJet j;
    j.rho = s.rho;
    j.u = s.u;
    j.T = s.T;
    return j;
  };
  f.hessian = [](double, const Vec3&) { return FieldHessian{}; };
  return f;
}

AnalyticFluidField shear_field(double alpha) {
  if (!std::isfinite(alpha)) throw InvalidArgument("shear field: alpha must be finite");
  AnalyticFluidField f;
  f.id = "shear";
  f.params = {{"alpha", alpha}};
  f.jet = [alpha](double, const Vec3& x) {
    FieldJet j;
    j.u = {alpha * x.y, 0.0, 0.0};
    j.d_u[2] = {alpha, 0.0, 0.0};
    return j;
  };
  f.hessian = [](double, const Vec3&) { return FieldHessian{}; };
  return f;
}

AnalyticFluidField thermal_field(double eps) {
  if (!std::isfinite(eps)) throw InvalidArgument("thermal field: eps must be finite");
  AnalyticFluidField f;
  f.id = "thermal";
  f.params = {{"eps", eps}};
  f.jet = [eps](double, const Vec3& x) {
    FieldJet j;
    j.T = 1.0 + eps * x.x;
    j.rho = 1.0 / j.T;
    j.d_T[1] = eps;
    j.d_rho[1] = -eps / (j.T * j.T);
    return j;
  };
  f.hessian = [eps](double, const Vec3& x) {
    FieldHessian h;
    const double T = 1.0 + eps * x.x;
    h.rho[1][1] = 2.0 * eps * eps / (T * T * T);
    return h;
  };
  return f;
}

AnalyticFluidField field_by_id(const std::string& id, const std::map<std::string, double>& params) {
  auto get = [&](const char* k, double def) {
    const auto it = params.find(k);
    return it == params.end() ? def : it->second;
  };
  if (id == "constant")
    return constant_field({get("rho", 1.0), {get("ux", 0.0), get("uy", 0.0), get("uz", 0.0)}, get("T", 1.0)});
  if (id == "shear") return shear_field(get("alpha", 0.1));
  if (id == "thermal") return thermal_field(get("eps", 0.1));
  throw InvalidArgument("unknown fluid field '" + id + "' (expected constant, shear or thermal)");
}

std::array<double, 3> sampled_field_bounds(const AnalyticFluidField& field,
                                           std::span<const std::pair<double, Vec3>> points) {
  if (points.empty()) throw InvalidArgument("field bounds: no probe points");
  double inf_rho = std::numeric_limits<double>::infinity(), inf_T = inf_rho;
  double sup0 = 0, sup1 = 0, sup2 = 0;
  for (const auto& [t, x] : points) {
    const FieldJet j = field.jet(t, x);
    if (!(j.rho > 0 && j.T > 0)) throw InvalidArgument("field bounds: non-positive rho or T");
    inf_rho = std::min(inf_rho, j.rho);
    inf_T = std::min(inf_T, j.T);
    sup0 = std::max({sup0, std::fabs(j.rho), norm(j.u), std::fabs(j.T)});
    for (int a = 0; a < 4; ++a)
      sup1 = std::max({sup1, std::fabs(j.d_rho[a]), norm(j.d_u[a]), std::fabs(j.d_T[a])});
    if (field.hessian) {
      const FieldHessian h = field.hessian(t, x);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          sup2 = std::max({sup2, std::fabs(h.rho[a][b]), norm(h.u[a][b]), std::fabs(h.T[a][b])});
    }
  }
  const double base = 1.0 / inf_rho + 1.0 / inf_T;
  return {base + sup0, base + sup0 + sup1, base + sup0 + sup1 + sup2};
}

BurnettValues burnett(const FluidState& s, const Vec3& v) {
  const Vec3 c = v - s.u;
  const double sm = sqrt_maxwellian(s, v), c2 = norm2(c) / s.T;
  BurnettValues b;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) b.A[i][j] = (c[i] * c[j] / s.T - (i == j ? c2 / 3.0 : 0.0)) * sm;
    b.B[i] = c[i] / (2.0 * s.sqrt_T()) * (c2 - 5.0) * sm;
  }
  return b;
}

GridFunction burnett_A(const FluidState& s, const GridPtr& g, int i, int j) {
  if (i < 0 || i > 2 || j < 0 || j > 2) throw InvalidArgument("burnett_A: indices must be 0..2");
  return sample(g, [&](const Vec3& v) { return burnett(s, v).A[i][j]; });
}

GridFunction burnett_B(const FluidState& s, const GridPtr& g, int i) {
  if (i < 0 || i > 2) throw InvalidArgument("burnett_B: index must be 0..2");
  return sample(g, [&](const Vec3& v) { return burnett(s, v).B[i]; });
}

double EulerResidual::max_abs() const {
  return std::max({std::fabs(mass), std::fabs(momentum.x), std::fabs(momentum.y),
                   std::fabs(momentum.z), std::fabs(energy)});
}

EulerResidual euler_residual(const AnalyticFluidField& field, double t, const Vec3& x) {
  const FieldJet j = field.jet(t, x);
  const double rho = j.rho, T = j.T;
  const Vec3 u = j.u;
  EulerResidual r;
  r.mass = j.d_rho[0];
  for (int k = 0; k < 3; ++k) r.mass += j.d_rho[k + 1] * u[k] + rho * j.d_u[k + 1][k];

  for (int i = 0; i < 3; ++i) {
    double m = j.d_rho[0] * u[i] + rho * j.d_u[0][i];
    for (int k = 0; k < 3; ++k)
      m += j.d_rho[k + 1] * u[i] * u[k] + rho * j.d_u[k + 1][i] * u[k] + rho * u[i] * j.d_u[k + 1][k];
    m += j.d_rho[i + 1] * T + rho * j.d_T[i + 1];
    r.momentum[i] = m;
  }

  const double e = 1.5 * T + 0.5 * norm2(u);
  const double E = rho * e;
  auto dE = [&](int a) { return j.d_rho[a] * e + rho * (1.5 * j.d_T[a] + dot(u, j.d_u[a])); };
  r.energy = dE(0);
  for (int k = 0; k < 3; ++k) {
    const double dp = j.d_rho[k + 1] * T + rho * j.d_T[k + 1];
    r.energy += j.d_u[k + 1][k] * (E + rho * T) + u[k] * (dE(k + 1) + dp);
  }
  return r;
}

}  // namespace boltzinv
