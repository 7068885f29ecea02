#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "boltzinv/collision_quadrature.hpp"
#include "boltzinv/probes.hpp"

namespace boltzinv {

// Values and first derivatives of (rho, u, T); derivative index 0 is t, 1..3 are x.
struct FieldJet {
  double rho = 1;
  Vec3 u{};
  double T = 1;
  std::array<double, 4> d_rho{};
  std::array<Vec3, 4> d_u{};
  std::array<double, 4> d_T{};
};

struct FieldHessian {
  std::array<std::array<double, 4>, 4> rho{};
  std::array<std::array<Vec3, 4>, 4> u{};
  std::array<std::array<double, 4>, 4> T{};
};

struct FluidCoefficients {
  double rho_n = 0;
  Vec3 u_n{};
  double theta_n = 0;
};

// (rho, u, T)(t, x) with closed-form derivatives.
struct AnalyticFluidField {
  std::string id;
  std::map<std::string, double> params;
  std::function<FieldJet(double, const Vec3&)> jet;
  std::function<FieldHessian(double, const Vec3&)> hessian;
  // Fluid coefficients of level n at (t, x); absent means zero.
  std::function<FluidCoefficients(int, double, const Vec3&)> fluid;

  FluidState state(double t, const Vec3& x) const;
};

AnalyticFluidField constant_field(const FluidState& s);
// u = (alpha x2, 0, 0) with rho = T = 1.
AnalyticFluidField shear_field(double alpha);
// T = 1 + eps x1 with rho T = 1 and u = 0.
AnalyticFluidField thermal_field(double eps);
AnalyticFluidField field_by_id(const std::string& id, const std::map<std::string, double>& params);

// Sampled e_m = 1/inf rho + 1/inf T + sum over |beta| <= m of sup |d^beta (rho, u, T)|.
std::array<double, 3> sampled_field_bounds(const AnalyticFluidField& field,
                                           std::span<const std::pair<double, Vec3>> points);

struct BurnettValues {
  std::array<std::array<double, 3>, 3> A{};
  std::array<double, 3> B{};
};
BurnettValues burnett(const FluidState& s, const Vec3& v);
GridFunction burnett_A(const FluidState& s, const GridPtr& g, int i, int j);
GridFunction burnett_B(const FluidState& s, const GridPtr& g, int i);

struct EulerResidual {
  double mass = 0;
  Vec3 momentum{};
  double energy = 0;
  double max_abs() const;
};
EulerResidual euler_residual(const AnalyticFluidField& field, double t, const Vec3& x);

struct G1Source {
  GridFunction g;
  EulerResidual residual;
  bool general_form = false;
  std::vector<std::string> warnings;
};

// -grad u : A - (grad T / sqrt T) . B when the Euler residual is below the
// threshold, otherwise -(I - P)[M^(-1/2) (d_t + v . grad_x) M].
G1Source g1_source(const AnalyticFluidField& field, double t, const Vec3& x, const GridPtr& g,
                   double residual_threshold = 1e-8);
GridFunction g1_simplified(const AnalyticFluidField& field, double t, const Vec3& x, const GridPtr& g);
GridFunction g1_general(const AnalyticFluidField& field, double t, const Vec3& x, const GridPtr& g);

struct ExpansionLevel {
  int n = 0;
  double t = 0;
  Vec3 x{};
  std::string field_id;
  FluidState state;
  GridFunction kinetic;               // (I - P) f_n
  std::optional<GridFunction> fluid;  // P f_n when coefficients are supplied
  GridFunction F;                     // f_n sqrt(M)
  SolveReport solve;
  EulerResidual residual;
  std::vector<std::string> warnings;
};

// Fluid part {rho_n/rho + u_n . c / T + theta_n/(6T) (|c|^2/T - 3)} sqrt(M).
GridFunction fluid_part(const FluidState& s, const FluidCoefficients& c, const GridPtr& g);

ExpansionLevel f1_kinetic(const PseudoInverse& inv, const AnalyticFluidField& field, double t,
                          const Vec3& x);

struct IsotropyShell {
  double radius = 0;
  double spread = 0;  // (max - min) / |mean| of f / A over admissible nodes
  double mean_ratio = 0;
  int nodes = 0;
};
struct IsotropyReport {
  std::vector<IsotropyShell> shells;
  double max_spread = 0;       // over shells with radius in [0.5, 3] sqrt(T)
  double growth_constant = 0;  // max |a(|v|)| / (1 + |v|) over the trusted range
  double growth_slope = 0;     // least-squares slope of |a| against 1 + |v|
  std::vector<std::string> warnings;
};
enum class BurnettKind { A, B };
// Solves f = L^-1 (A_ij) or L^-1 (B_i) and measures how far f / A_ij is from
// being constant on exact lattice spheres.
IsotropyReport isotropy_check(const PseudoInverse& inv, BurnettKind which, int i = 0, int j = 1,
                              const GridFunction* given = nullptr);

struct GammaParts {
  GridFunction gain;
  GridFunction loss;
  GridFunction total() const { return gain - loss; }
};
GammaParts gamma_split(const CollisionModel& m, const FluidState& s, const GridFunction& fi,
                       const GridFunction& fj, CollisionQuadratureOptions opt = {});
GridFunction gamma_bilinear(const CollisionModel& m, const FluidState& s, const GridFunction& fi,
                            const GridFunction& fj, CollisionQuadratureOptions opt = {});

// Kinetic parts (or any grid functions) at x -+ delta e_k together with their local states.
struct KineticStencil {
  double delta = 0;
  std::array<std::array<GridFunction, 2>, 3> x_pm;  // [k][0] at x - delta e_k, [k][1] at x + delta e_k
  std::array<std::array<FluidState, 2>, 3> states;
};

struct SourceTerms {
  Vec3 F_u{};
  double G_theta = 0;
};
SourceTerms source_terms(const AnalyticFluidField& field, double t, const Vec3& x,
                         const KineticStencil& st);

struct Level1Stencil {
  double delta = 0;
  ExpansionLevel center;
  std::array<ExpansionLevel, 2> t_pm;
  std::array<std::array<ExpansionLevel, 2>, 3> x_pm;
  int assembled_operators = 0;
};

struct StencilOptions {
  double delta = 0;  // 0 picks 1e-3 min(1, sqrt T)
  AssemblyOptions assembly;
};

// f1 at the 7-point (t, x) stencil, each with an operator assembled at the local
// state on the centre grid. Operators are shared between points with equal states.
Level1Stencil level1_stencil(const CollisionModel& m, const AnalyticFluidField& field, double t,
                             const Vec3& x, const GridPtr& g, const PseudoInverse& center,
                             StencilOptions opt = {});

struct Level2Result {
  ExpansionLevel level;
  GridFunction g2;
  SourceTerms sources;  // source terms of the level-1 kinetic part
};
Level2Result f2_kinetic(const PseudoInverse& center, const AnalyticFluidField& field, double t,
                        const Vec3& x, const Level1Stencil& st,
                        CollisionQuadratureOptions gamma_opt = {});

// |d^beta F_n| / M^((1+q)/2) shell profile. m = 0 uses the level itself; m = 1
// needs the stencil and takes the max over the four first derivatives.
DecayProfile decay_check_Fn(const ExpansionLevel& level, const FluidState& s, double q, int m,
                            const Level1Stencil* stencil = nullptr, double trusted_fraction = 0.8);

struct DerivativeDecayReport {
  DecayProfile derivative;  // central difference against Theta M^(q1/2)
  DecayProfile base;        // the solution at x against Theta M^(q0/2)
  double max_abs = 0;
  double delta = 0;
  int axis = 0;
};

// Central difference in x_axis of L^-1 g between the states at x -+ delta e_axis.
DerivativeDecayReport derivative_decay_check(
    const CollisionModel& m, const AnalyticFluidField& field, double t, const Vec3& x,
    const std::function<GridFunction(const FluidState&, const GridPtr&)>& g_of_state, double q0,
    double q1, double delta, const GridPtr& g, int axis = 0, AssemblyOptions opt = {},
    const PseudoInverse* center = nullptr);

}  // namespace boltzinv
