#include "boltzinv/pseudo_inverse.hpp"

#include <chrono>
#include <optional>
#include <random>

namespace boltzinv {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Eigen::VectorXd apply_L_raw(const DiscreteLinearizedOperator& op, const Eigen::VectorXd& x) {
  Eigen::VectorXd y(x.size());
  symmetric_matvec(op.K, std::span<const double>(x.data(), x.size()),
                   std::span<double>(y.data(), y.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) y[i] += op.nu[i] * x[i];
  return y;
}

double dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return compensated_dot(std::span<const double>(a.data(), a.size()),
                         std::span<const double>(b.data(), b.size()));
}

}  // namespace

struct PseudoInverse::Factor {
  Eigen::MatrixXd a;
  std::optional<Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>>> llt;
  std::optional<Eigen::LDLT<Eigen::MatrixXd>> ldlt;
  std::optional<Eigen::PartialPivLU<Eigen::MatrixXd>> lu;

  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const {
    if (llt) return llt->solve(b);
    if (ldlt) return ldlt->solve(b);
    return lu->solve(b);
  }
};

PseudoInverse::~PseudoInverse() = default;
PseudoInverse::PseudoInverse(PseudoInverse&&) noexcept = default;
PseudoInverse& PseudoInverse::operator=(PseudoInverse&&) noexcept = default;

PseudoInverse::PseudoInverse(const DiscreteLinearizedOperator& op, PseudoInverseOptions opt)
    : op_(&op), opt_(opt), factor_(std::make_unique<Factor>()) {
  const auto t0 = Clock::now();
  const Eigen::Index N = static_cast<Eigen::Index>(op.size());
  if (N == 0 || op.K.rows() != N) throw InvalidArgument("pseudo-inverse: operator not assembled");
  const double scale = std::pow(op.grid->h(), 1.5);
  basis_.resize(N, 5);
  for (int a = 0; a < 5; ++a)
    for (Eigen::Index i = 0; i < N; ++i) basis_(i, a) = op.phi[a][i] * scale;

  Eigen::MatrixXd W(N, 5);
  for (int a = 0; a < 5; ++a) W.col(a) = apply_L_raw(op, basis_.col(a));
  Eigen::Matrix<double, 5, 5> G;
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) G(a, b) = dot(basis_.col(a), W.col(b));
  G = (0.5 * (G + G.transpose())).eval();
  const Eigen::MatrixXd U = basis_ * G;

  auto build = [&](Eigen::MatrixXd& A) {
    A.resize(N, N);
#pragma omp parallel for schedule(dynamic, 16)
    for (Eigen::Index j = 0; j < N; ++j) {
      for (Eigen::Index i = j; i < N; ++i) {
        double v = op.K(i, j) + (i == j ? op.nu[i] : 0.0);
        for (int a = 0; a < 5; ++a)
          v += -basis_(i, a) * W(j, a) - W(i, a) * basis_(j, a) + U(i, a) * basis_(j, a) +
               basis_(i, a) * basis_(j, a);
        A(i, j) = v;
      }
    }
#pragma omp parallel for schedule(dynamic, 16)
    for (Eigen::Index j = 0; j < N; ++j)
      for (Eigen::Index i = 0; i < j; ++i) A(i, j) = A(j, i);
  };

  build(factor_->a);
  factor_->llt.emplace(factor_->a);
  if (factor_->llt->info() == Eigen::Success) {
    method_ = "llt";
    condition_ = 1.0 / factor_->llt->rcond();
  } else {
    factor_->llt.reset();
    build(factor_->a);
    factor_->ldlt.emplace(factor_->a);
    if (factor_->ldlt->info() == Eigen::Success && factor_->ldlt->rcond() > 1e-14) {
      method_ = "ldlt";
      condition_ = 1.0 / factor_->ldlt->rcond();
    } else {
      factor_->ldlt.reset();
      factor_->lu.emplace(factor_->a);
      const double rc = factor_->lu->rcond();
      if (!(rc > 1e-14)) throw SingularOperator("pseudo-inverse: corrected operator is singular");
      method_ = "lu";
      condition_ = 1.0 / rc;
    }
    factor_->a.resize(0, 0);
  }
  factor_seconds_ = seconds_since(t0);
}

void PseudoInverse::project_out(Eigen::VectorXd& x) const {
  for (int sweep = 0; sweep < 2; ++sweep)
    for (int a = 0; a < 5; ++a) x -= dot(basis_.col(a), x) * basis_.col(a);
}

Eigen::MatrixXd PseudoInverse::apply_inverse(const Eigen::MatrixXd& b) const {
  return factor_->solve(b);
}

std::pair<GridFunction, SolveReport> PseudoInverse::solve(const GridFunction& g) const {
  const auto t0 = Clock::now();
  if (!(g.grid() == *op_->grid)) throw InvalidArgument("solve: grid mismatch");
  const Eigen::Index N = static_cast<Eigen::Index>(g.size());
  Eigen::VectorXd gp = Eigen::Map<const Eigen::VectorXd>(g.values().data(), N);
  project_out(gp);
  SolveReport rep;
  rep.factorization = method_;
  rep.condition_estimate = condition_;
  GridFunction f(op_->grid);
  const double gn = gp.norm();
  if (gn == 0.0) {
    rep.wall_time = seconds_since(t0);
    return {f, rep};
  }
  Eigen::VectorXd x = apply_inverse(gp);
  project_out(x);
  // One step of iterative refinement in the projected system.
  Eigen::VectorXd r = gp - apply_L_raw(*op_, x);
  project_out(r);
  Eigen::VectorXd dx = apply_inverse(r);
  project_out(dx);
  x += dx;

  const Eigen::VectorXd raw = apply_L_raw(*op_, x) - gp;
  Eigen::VectorXd proj = raw;
  project_out(proj);
  rep.residual_norm = proj.norm() / gn;
  rep.raw_residual_norm = raw.norm() / gn;
  double pc = 0;
  for (int a = 0; a < 5; ++a) pc += std::pow(dot(basis_.col(a), x), 2);
  const double xn = x.norm();
  rep.null_component_norm = xn > 0 ? std::sqrt(pc) / xn : 0.0;
  for (Eigen::Index i = 0; i < N; ++i) f[i] = x[i];
  rep.wall_time = seconds_since(t0);
  if (!(rep.residual_norm <= opt_.tolerance))
    throw SolveError("pseudo-inverse: residual " + std::to_string(rep.residual_norm) +
                         " above tolerance",
                     rep);
  return {f, rep};
}

std::pair<GridFunction, SolveReport> solve_pseudo_inverse(const DiscreteLinearizedOperator& op,
                                                          const GridFunction& g) {
  return PseudoInverse(op).solve(g);
}

HypoReport hypocoercivity_lambda(const PseudoInverse& inv, EigenOptions opt) {
  const auto t0 = Clock::now();
  const auto& op = inv.op();
  if (!(op.model.gamma > -1.5 && op.model.gamma <= 1.0))
    throw InvalidArgument("hypocoercivity: gamma must lie in (-3/2, 1]");
  const Eigen::Index N = static_cast<Eigen::Index>(op.size());
  const int b = std::min<int>(opt.block, static_cast<int>(N) - 5);
  const Eigen::Map<const Eigen::VectorXd> nu(op.nu.data(), N);

  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd X(N, b);
  for (Eigen::Index j = 0; j < b; ++j)
    for (Eigen::Index i = 0; i < N; ++i) X(i, j) = nd(rng);

  HypoReport rep;
  double prev = std::numeric_limits<double>::infinity();
  Eigen::VectorXd ritz;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    Eigen::MatrixXd rhs = nu.asDiagonal() * X;
    for (Eigen::Index j = 0; j < b; ++j) {
      Eigen::VectorXd c = rhs.col(j);
      inv.project_out(c);
      rhs.col(j) = c;
    }
    Eigen::MatrixXd Y = inv.apply_inverse(rhs);
    for (Eigen::Index j = 0; j < b; ++j) {
      Eigen::VectorXd c = Y.col(j);
      inv.project_out(c);
      Y.col(j) = c;
    }
    // D-orthonormalize, then Rayleigh-Ritz with the projected L.
    const Eigen::MatrixXd Mgram = Y.transpose() * nu.asDiagonal() * Y;
    Eigen::LLT<Eigen::MatrixXd> chol(Mgram);
    if (chol.info() != Eigen::Success) throw NumericalError("hypocoercivity: iteration lost rank");
    Y = chol.matrixU().solve<Eigen::OnTheRight>(Y);
    Eigen::MatrixXd LY(N, b);
    for (Eigen::Index j = 0; j < b; ++j) LY.col(j) = apply_L_raw(op, Y.col(j));
    Eigen::MatrixXd H = Y.transpose() * LY;
    H = (0.5 * (H + H.transpose())).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    ritz = es.eigenvalues();
    X = Y * es.eigenvectors();
    rep.iterations = it;
    if (std::fabs(ritz[0] - prev) <= opt.tolerance * std::fabs(ritz[0])) break;
    prev = ritz[0];
    if (it == opt.max_iterations) throw NumericalError("hypocoercivity: inverse iteration did not converge");
  }
  rep.lambda = ritz[0];
  rep.ritz_values.assign(ritz.data(), ritz.data() + ritz.size());
  const double nu_max = nu.maxCoeff();
  if (rep.lambda < -1e-3 * nu_max)
    throw NumericalError("hypocoercivity: eigenvalue " + std::to_string(rep.lambda) +
                         " below the negative tolerance -1e-3 max(nu) = " +
                         std::to_string(-1e-3 * nu_max));
  rep.wall_time = seconds_since(t0);
  return rep;
}

HypoReport hypocoercivity_lambda(const DiscreteLinearizedOperator& op, EigenOptions opt) {
  return hypocoercivity_lambda(PseudoInverse(op), opt);
}

}  // namespace boltzinv
