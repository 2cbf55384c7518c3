#include "tvcs/reference_oracle.hpp"

#include "tvcs/grad_ops.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tvcs::oracle {

Eigen::MatrixXd dense_gradient_matrix(Index side) {
  const Index np = side * side;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2 * np, np);
  for (Index r = 0; r < side; ++r) {
    for (Index c = 0; c < side; ++c) {
      const Index i = r * side + c;
      d(i, i) -= 1.0;
      d(i, r * side + (c + 1) % side) += 1.0;
      d(np + i, i) -= 1.0;
      d(np + i, ((r + 1) % side) * side + c) += 1.0;
    }
  }
  return d;
}

DenseProblem DenseProblem::build(Eigen::MatrixXd a, Eigen::VectorXd f, Index side, double mu, double beta,
                                 double tau) {
  if (side < 2 || side > kMaxOracleSide) {
    std::ostringstream msg;
    msg << "dense oracle supports 2 <= side <= " << kMaxOracleSide << ", got " << side;
    throw std::invalid_argument(msg.str());
  }
  if (!(mu > 0.0 && beta > 0.0 && tau > 0.0)) throw std::invalid_argument("mu, beta and tau must be positive");
  const Index np = side * side;
  if (a.cols() != np || f.size() != a.rows()) throw std::invalid_argument("dense problem size mismatch");

  DenseProblem dp;
  dp.side = side;
  dp.A = std::move(a);
  dp.D = dense_gradient_matrix(side);
  dp.f = std::move(f);
  dp.mu = mu;
  dp.beta = beta;
  dp.tau = tau;
  dp.eta = std::sqrt(mu / (beta * tau));

  const Eigen::MatrixXd dtd = dp.D.transpose() * dp.D;
  const Eigen::MatrixXd ata = dp.A.transpose() * dp.A;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(np, np);
  dp.M = dtd + (mu / beta) * ata;
  dp.H = dtd + dp.eta * dp.eta * id;
  dp.T = id - tau * ata;

  const double gap = (dp.H - dp.M - dp.eta * dp.eta * dp.T).norm();
  if (gap > 1e-10 * std::max(1.0, dp.H.norm())) {
    throw std::logic_error("dense oracle: H - M != eta^2 T");
  }

  Eigen::MatrixXd left(3 * np, np);
  left << dp.D, dp.eta * dp.T;
  Eigen::MatrixXd right(3 * np, np);
  right << dp.D, dp.eta * id;
  dp.R = left * dp.H.llt().solve(right.transpose());
  return dp;
}

DenseProblem DenseProblem::build(const Problem& problem, double mu, double beta, double tau) {
  return build(problem.op.to_dense(), problem.f, problem.side, mu, beta, tau);
}

bool DenseProblem::satisfies_null_space_condition() const {
  Eigen::MatrixXd stacked(A.rows() + D.rows(), pixels());
  stacked << A, D;
  return Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(stacked).rank() == pixels();
}

Eigen::MatrixXd DenseProblem::energy_matrix() const {
  return D.transpose() * D + eta * eta * T * T;
}

PenaltySolution exact_penalty_solve(const DenseProblem& dp, double tol, int max_iters, AlternationStart start) {
  if (!dp.satisfies_null_space_condition()) {
    throw std::invalid_argument("null-space condition violated: N(A) and N(D) share a nonzero vector");
  }
  const Eigen::LLT<Eigen::MatrixXd> chol(dp.M);
  if (chol.info() != Eigen::Success) throw std::runtime_error("dense oracle: M is not positive definite");

  const double ratio = dp.mu / dp.beta;
  const Eigen::VectorXd data_term = ratio * dp.A.transpose() * dp.f;
  const double threshold = 1.0 / dp.beta;

  PenaltySolution sol;
  sol.w = GradientField(dp.side);
  sol.u = Image(dp.side);
  if (start == AlternationStart::UFirst) {
    sol.u.vec() = chol.solve(data_term);
  } else {
    sol.u.vec() = dp.A.transpose() * dp.f;
  }

  for (int k = 1; k <= max_iters; ++k) {
    GradientField du(dp.side, dp.D * sol.u.vec());
    sol.w = shrink_field(du, threshold);
    Eigen::VectorXd next = chol.solve(dp.D.transpose() * sol.w.vec() + data_term);
    const double change = (next - sol.u.vec()).norm() / std::max(sol.u.vec().norm(), 1e-12);
    sol.u.vec() = std::move(next);
    sol.iterations = k;
    if (change <= tol) {
      sol.converged = true;
      break;
    }
  }
  // Leave (u, w) as a matched pair: w = S(Du).
  sol.w = shrink_field(GradientField(dp.side, dp.D * sol.u.vec()), threshold);
  return sol;
}

namespace {

void check_sizes(const DenseProblem& dp, const Image& u, const GradientField& w) {
  if (u.side() != dp.side || w.side() != dp.side) throw std::invalid_argument("oracle check: size mismatch");
}

}  // namespace

FixedPointReport check_fixed_point(const DenseProblem& dp, const Image& u, const GradientField& w) {
  check_sizes(dp, u, w);
  FixedPointReport report;
  const GradientField du(dp.side, dp.D * u.vec());
  report.shrink_residual = (w.vec() - shrink_field(du, 1.0 / dp.beta).vec()).norm();
  report.normal_eq_residual =
      (dp.M * u.vec() - dp.D.transpose() * w.vec() - (dp.mu / dp.beta) * dp.A.transpose() * dp.f).norm();

  const GradientField implied(dp.side, dp.beta * (du.vec() - w.vec()));
  report.kkt_residual = check_kkt_constrained(dp, u, w, implied);

  report.omega = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < dp.pixels(); ++i) {
    const double norm = du.pair(i).norm();
    if (norm <= 1.0 / dp.beta) {
      report.support_L.push_back(i);
      report.omega = std::min(report.omega, 1.0 / dp.beta - norm);
    }
  }
  return report;
}

double KktResiduals::max() const { return std::max({primal, dual, subgradient}); }

KktResiduals kkt_residuals(const DenseProblem& dp, const Image& u, const GradientField& w,
                           const GradientField& lambda) {
  check_sizes(dp, u, w);
  if (lambda.side() != dp.side) throw std::invalid_argument("oracle check: size mismatch");
  constexpr double kZeroBranch = 1e-10;

  KktResiduals out;
  out.primal = (w.vec() - dp.D * u.vec()).norm();
  out.dual = (dp.D.transpose() * lambda.vec() + dp.mu * dp.A.transpose() * (dp.A * u.vec() - dp.f)).norm();
  double sub_sq = 0.0;
  for (Index i = 0; i < dp.pixels(); ++i) {
    const Eigen::Vector2d wi = w.pair(i);
    const Eigen::Vector2d li = lambda.pair(i);
    const double wn = wi.norm();
    double violation = 0.0;
    if (wn < kZeroBranch) {
      violation = std::max(0.0, li.norm() - 1.0);
    } else {
      violation = (li - wi / wn).norm();
    }
    sub_sq += violation * violation;
  }
  out.subgradient = std::sqrt(sub_sq);
  return out;
}

QOperator::QOperator(const DenseProblem& dp)
    : side_(dp.side), beta_(dp.beta), D_(dp.D), eta_T_(dp.eta * dp.T) {
  const Index np = dp.pixels();
  Eigen::MatrixXd right(3 * np, np);
  right << dp.D, dp.eta * Eigen::MatrixXd::Identity(np, np);
  lift_ = dp.H.llt().solve(right.transpose());
  offset_ = dp.eta * dp.tau * (dp.A.transpose() * dp.f);
}

Eigen::VectorXd QOperator::u_of(const Eigen::VectorXd& x) const { return lift_ * x; }
Eigen::VectorXd QOperator::h(const Eigen::VectorXd& x) const { return D_ * u_of(x); }
Eigen::VectorXd QOperator::p(const Eigen::VectorXd& x) const { return eta_T_ * u_of(x); }

Eigen::VectorXd QOperator::operator()(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd u = u_of(x);
  const GradientField shrunk = shrink_field(GradientField(side_, D_ * u), 1.0 / beta_);
  Eigen::VectorXd out(x.size());
  out << shrunk.vec(), eta_T_ * u + offset_;
  return out;
}

Eigen::VectorXd QOperator::v_of(const Eigen::VectorXd& u) const { return eta_T_ * u + offset_; }

Eigen::VectorXd QOperator::stack(const GradientField& w, const Eigen::VectorXd& v) const {
  Eigen::VectorXd x(w.vec().size() + v.size());
  x << w.vec(), v;
  return x;
}

std::vector<Index> support_complement(const DenseProblem& dp, const Image& u) {
  const GradientField du(dp.side, dp.D * u.vec());
  std::vector<Index> e;
  for (Index i = 0; i < dp.pixels(); ++i) {
    if (du.pair(i).norm() > 1.0 / dp.beta) e.push_back(i);
  }
  return e;
}

namespace {

double max_abs_eigenvalue(const Eigen::MatrixXd& sym) {
  if (sym.size() == 0) return 0.0;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

double spectral_factor(const DenseProblem& dp, const std::vector<Index>& support_E) {
  if (support_E.empty()) return 0.0;
  const Index np = dp.pixels();
  std::vector<Index> keep;
  for (Index i : support_E) {
    if (i < 0 || i >= np) throw std::invalid_argument("support index out of range");
    keep.push_back(i);
  }
  for (Index i : support_E) keep.push_back(i + np);
  for (Index i = 2 * np; i < 3 * np; ++i) keep.push_back(i);

  const Eigen::MatrixXd rtr = dp.R.transpose() * dp.R;
  const auto k = static_cast<Index>(keep.size());
  Eigen::MatrixXd sub(k, k);
  for (Index a = 0; a < k; ++a) {
    for (Index b = 0; b < k; ++b) sub(a, b) = rtr(keep[a], keep[b]);
  }
  return max_abs_eigenvalue(sub);
}

double spectral_radius_RtR(const DenseProblem& dp) {
  return max_abs_eigenvalue(dp.R.transpose() * dp.R);
}

}  // namespace tvcs::oracle
