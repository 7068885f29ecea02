#include <doctest.h>

#include "boltzinv/probes.hpp"

using namespace boltzinv;

namespace {

const FluidState kState;

const DiscreteLinearizedOperator& op_for(double gamma) {
  static const auto hard = assemble(make_model(1.0), kState, build_grid(kState, 6.0, 8));
  static const auto soft = assemble(make_model(-1.0), kState, build_grid(kState, 6.0, 8));
  return gamma == 1.0 ? hard : soft;
}

Eigen::MatrixXd dense_L(const DiscreteLinearizedOperator& op) {
  Eigen::MatrixXd L = op.K;
  for (std::size_t i = 0; i < op.size(); ++i) L(i, i) += op.nu[i];
  return L;
}

// Euclidean-orthonormal basis of the complement of the sampled invariants.
Eigen::MatrixXd complement_basis(const DiscreteLinearizedOperator& op) {
  const Eigen::Index N = static_cast<Eigen::Index>(op.size());
  Eigen::MatrixXd P(N, 5);
  for (int a = 0; a < 5; ++a)
    for (Eigen::Index i = 0; i < N; ++i) P(i, a) = op.phi[a][i];
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(P);
  const Eigen::MatrixXd Q = qr.householderQ();
  return Q.rightCols(N - 5);
}

Eigen::VectorXd as_vector(const GridFunction& f) {
  return Eigen::Map<const Eigen::VectorXd>(f.values().data(), static_cast<Eigen::Index>(f.size()));
}

}  // namespace

TEST_CASE("pseudo-inverse matches the dense Moore-Penrose solution on the complement") {
  for (double gamma : {1.0, -1.0}) {
    INFO("gamma = " << gamma);
    const auto& op = op_for(gamma);
    const PseudoInverse inv(op);
    CHECK(inv.method() == "llt");
    CHECK(inv.condition_estimate() > 1.0);

    // Oracle: complete orthogonal decomposition of Q L Q.
    const Eigen::MatrixXd Z = complement_basis(op);
    const Eigen::MatrixXd QLQ = Z * (Z.transpose() * dense_L(op) * Z) * Z.transpose();
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(QLQ);
    cod.setThreshold(1e-10);
    CHECK(cod.rank() == static_cast<Eigen::Index>(op.size()) - 5);

    const auto family = probe_family(op, 3, 7);
    for (const auto& g : family) {
      const auto [f, rep] = inv.solve(g);
      CHECK(rep.residual_norm <= 1e-10);
      CHECK(rep.null_component_norm <= 1e-12);
      CHECK(rep.factorization == "llt");
      const Eigen::VectorXd ref = cod.solve(Eigen::VectorXd(Z * (Z.transpose() * as_vector(g))));
      CHECK((as_vector(f) - ref).norm() <= 1e-8 * ref.norm());
    }
  }
}

TEST_CASE("pseudo-inverse is linear and self-adjoint") {
  const auto& op = op_for(1.0);
  const PseudoInverse inv(op);
  const auto family = probe_family(op, 2, 11);
  const auto& g1 = family[0];
  const auto& g2 = family[1];
  const auto f1 = inv.solve(g1).first, f2 = inv.solve(g2).first;
  const auto f12 = inv.solve(2.0 * g1 - 0.5 * g2).first;
  const auto combo = 2.0 * f1 - 0.5 * f2;
  double err = 0;
  for (std::size_t i = 0; i < combo.size(); ++i) err = std::max(err, std::fabs(f12[i] - combo[i]));
  CHECK(err <= 1e-10 * combo.max_abs());
  const double a = inner_product(f1, g2), b = inner_product(g1, f2);
  CHECK(std::fabs(a - b) <= 1e-10 * l2_norm(f1) * l2_norm(g2));

  // Invariants map to zero, the zero function too.
  const auto null = inv.solve(op.phi[2]);
  CHECK(null.first.max_abs() <= 1e-14 * op.phi[2].max_abs());
  CHECK(inv.solve(GridFunction(op.grid)).first.max_abs() == 0.0);
  const auto other = build_grid(kState, 6.0, 10);
  CHECK_THROWS_AS(inv.solve(GridFunction(other, 1.0)), InvalidArgument);
}

TEST_CASE("tolerance failures carry the report") {
  const auto& op = op_for(1.0);
  const PseudoInverse strict(op, PseudoInverseOptions{1e-300});
  const auto g = probe_family(op, 1, 3).front();
  try {
    strict.solve(g);
    FAIL("expected SolveError");
  } catch (const SolveError& e) {
    CHECK(e.report.residual_norm > 0.0);
    CHECK(e.report.residual_norm < 1e-10);
    CHECK(e.report.factorization == "llt");
  }
}

TEST_CASE("spectral gap against the dense generalized eigenproblem") {
  for (double gamma : {1.0, -1.0}) {
    INFO("gamma = " << gamma);
    const auto& op = op_for(gamma);
    const HypoReport rep = hypocoercivity_lambda(op);
    CHECK(rep.lambda > 0.0);
    CHECK(rep.iterations > 1);

    const Eigen::MatrixXd Z = complement_basis(op);
    const Eigen::Map<const Eigen::VectorXd> nu(op.nu.data(), static_cast<Eigen::Index>(op.size()));
    const Eigen::MatrixXd A = Z.transpose() * dense_L(op) * Z;
    const Eigen::MatrixXd B = Z.transpose() * nu.asDiagonal() * Z;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B);
    CHECK(rep.lambda == doctest::Approx(es.eigenvalues()[0]).epsilon(1e-7));
    CHECK(rep.ritz_values.size() == 8);
    for (std::size_t k = 1; k < rep.ritz_values.size(); ++k) CHECK(rep.ritz_values[k] >= rep.ritz_values[k - 1]);
  }
  DiscreteLinearizedOperator bad = op_for(1.0);
  bad.model.gamma = -1.6;
  CHECK_THROWS_AS(hypocoercivity_lambda(bad), InvalidArgument);
}
