#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "boltzinv/operator.hpp"

namespace boltzinv {

struct SolveReport {
  // |Q(L f - g_perp)| / |g_perp| with Q the discrete complement projector.
  double residual_norm = 0;
  // |L f - g_perp| / |g_perp| without the projection; reflects the grid error in L phi.
  double raw_residual_norm = 0;
  double null_component_norm = 0;  // |P f| / |f|
  double condition_estimate = 0;
  double wall_time = 0;
  std::string factorization;
};

// Carries the report of a solve that missed its residual tolerance.
struct SolveError : NumericalError {
  SolveError(const std::string& what, SolveReport r) : NumericalError(what), report(std::move(r)) {}
  SolveReport report;
};

struct SingularOperator : NumericalError {
  using NumericalError::NumericalError;
};

struct PseudoInverseOptions {
  double tolerance = 1e-6;
};

// Factorization of Q L Q + Phi Phi^T, where Phi holds the null basis scaled to
// unit Euclidean norm and Q = I - Phi Phi^T. On the complement of the invariants
// it inverts L; on their span it is the identity. The referenced operator must
// outlive this object.
class PseudoInverse {
 public:
  explicit PseudoInverse(const DiscreteLinearizedOperator& op, PseudoInverseOptions opt = {});
  ~PseudoInverse();
  PseudoInverse(PseudoInverse&&) noexcept;
  PseudoInverse& operator=(PseudoInverse&&) noexcept;

  // Projects g, solves and projects the result. Throws SolveError above tolerance.
  std::pair<GridFunction, SolveReport> solve(const GridFunction& g) const;

  // Raw application of the factorized inverse to value vectors (one per column).
  Eigen::MatrixXd apply_inverse(const Eigen::MatrixXd& b) const;
  // In-place Euclidean projection onto the complement of the invariants.
  void project_out(Eigen::VectorXd& x) const;

  const DiscreteLinearizedOperator& op() const { return *op_; }
  const std::string& method() const { return method_; }
  double condition_estimate() const { return condition_; }
  double factor_seconds() const { return factor_seconds_; }

 private:
  struct Factor;
  const DiscreteLinearizedOperator* op_;
  PseudoInverseOptions opt_;
  Eigen::MatrixXd basis_;  // N x 5, unit Euclidean columns
  std::unique_ptr<Factor> factor_;
  std::string method_;
  double condition_ = 0;
  double factor_seconds_ = 0;
};

std::pair<GridFunction, SolveReport> solve_pseudo_inverse(const DiscreteLinearizedOperator& op,
                                                          const GridFunction& g);

struct HypoReport {
  double lambda = 0;
  double q = 0;
  double C_weighted = 0;
  std::size_t family_size = 0;
  std::vector<double> ritz_values;  // lowest generalized eigenvalues found
  int iterations = 0;
  double wall_time = 0;
  bool restricted = false;  // weighted statistics limited to the trusted radius
  double trusted_radius = 0;
};

struct EigenOptions {
  int block = 8;
  int max_iterations = 400;
  double tolerance = 1e-9;
};

// Smallest value of <Lf,f>/|f|^2_{L2(nu)} over f orthogonal to the invariants, by
// block inverse iteration on the pencil (L, diag nu) with Rayleigh-Ritz.
HypoReport hypocoercivity_lambda(const PseudoInverse& inv, EigenOptions opt = {});
HypoReport hypocoercivity_lambda(const DiscreteLinearizedOperator& op, EigenOptions opt = {});

}  // namespace boltzinv
