#pragma once

#include "tvcs/image.hpp"
#include "tvcs/sensing.hpp"

#include <Eigen/Core>

#include <vector>

namespace tvcs::oracle {

inline constexpr Index kMaxOracleSide = 16;

/// Dense D = (D1; D2) in R^{2n^2 x n^2}, assembled one stencil row at a time
/// with the same ordering and wrap-around as apply_gradient.
Eigen::MatrixXd dense_gradient_matrix(Index side);

/// Dense small-scale copy of a TV/L2 problem together with the matrices
///   M = D^T D + (mu/beta) A^T A,   H = D^T D + eta^2 I,   T = I - tau A^T A,
///   R = (D; eta T) H^{-1} (D; eta I)^T,   eta = sqrt(mu / (beta tau)).
struct DenseProblem {
  static DenseProblem build(Eigen::MatrixXd a, Eigen::VectorXd f, Index side, double mu, double beta,
                            double tau);
  static DenseProblem build(const Problem& problem, double mu, double beta, double tau);

  Index pixels() const { return side * side; }

  /// rank((A; D)) == n^2, i.e. N(A) and N(D) intersect only at zero.
  bool satisfies_null_space_condition() const;

  /// D^T D + eta^2 T^2, the norm the u-iterates contract in.
  Eigen::MatrixXd energy_matrix() const;

  Index side = 0;
  Eigen::MatrixXd A;
  Eigen::MatrixXd D;
  Eigen::VectorXd f;
  double mu = 0.0;
  double beta = 0.0;
  double tau = 0.0;
  double eta = 0.0;
  Eigen::MatrixXd M;
  Eigen::MatrixXd H;
  Eigen::MatrixXd T;
  Eigen::MatrixXd R;
};

enum class AlternationStart { UFirst, WFirst };

struct PenaltySolution {
  Image u;
  GradientField w;
  int iterations = 0;
  bool converged = false;
};

/// Exact alternating minimization of the penalty model: w = S(Du), then the
/// normal equations M u = D^T w + (mu/beta) A^T f solved with a Cholesky
/// factor of M computed once. Rejects problems where M is singular.
PenaltySolution exact_penalty_solve(const DenseProblem& dp, double tol, int max_iters,
                                    AlternationStart start = AlternationStart::UFirst);

struct FixedPointReport {
  double shrink_residual = 0.0;     // |w - S(Du)|
  double normal_eq_residual = 0.0;  // |M u - D^T w - (mu/beta) A^T f|
  double kkt_residual = 0.0;        // constrained KKT measure with lambda = beta (Du - w)
  std::vector<Index> support_L;     // {i : |D_i u| <= 1/beta}
  double omega = 0.0;               // min over L of 1/beta - |D_i u|; +inf when L is empty
};

FixedPointReport check_fixed_point(const DenseProblem& dp, const Image& u, const GradientField& w);

struct KktResiduals {
  double primal = 0.0;       // |w - Du|
  double dual = 0.0;         // |D^T lambda + mu A^T (Au - f)|
  double subgradient = 0.0;  // |violation of lambda_i in d|w_i||, over all pairs
  double max() const;
};

KktResiduals kkt_residuals(const DenseProblem& dp, const Image& u, const GradientField& w,
                           const GradientField& lambda);

inline double check_kkt_constrained(const DenseProblem& dp, const Image& u, const GradientField& w,
                                    const GradientField& lambda) {
  return kkt_residuals(dp, u, w, lambda).max();
}

/// The FTVCS iteration written as a map on x = (w; v) in R^{3n^2}:
///   u(x) = H^{-1} (D^T w + eta v),   h(x) = D u(x),   p(x) = eta T u(x),
///   q(x) = (S(h(x)); p(x) + eta tau A^T f).
class QOperator {
 public:
  explicit QOperator(const DenseProblem& dp);

  Eigen::VectorXd h(const Eigen::VectorXd& x) const;
  Eigen::VectorXd p(const Eigen::VectorXd& x) const;
  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;

  Eigen::VectorXd u_of(const Eigen::VectorXd& x) const;
  /// v = eta T u + eta tau A^T f
  Eigen::VectorXd v_of(const Eigen::VectorXd& u) const;
  Eigen::VectorXd stack(const GradientField& w, const Eigen::VectorXd& v) const;

 private:
  Index side_;
  double beta_;
  Eigen::MatrixXd lift_;  // H^{-1} (D; eta I)^T
  Eigen::MatrixXd D_;
  Eigen::MatrixXd eta_T_;
  Eigen::VectorXd offset_;  // eta tau A^T f
};

inline QOperator build_q_operator(const DenseProblem& dp) { return QOperator(dp); }

/// E = complement of L = {i : |D_i u| <= 1/beta}.
std::vector<Index> support_complement(const DenseProblem& dp, const Image& u);

/// Spectral radius of R^T R with rows/columns {i, i + n^2 : i in L} removed.
/// Returns 0 when E is empty.
double spectral_factor(const DenseProblem& dp, const std::vector<Index>& support_E);

/// Largest eigenvalue of the full R^T R.
double spectral_radius_RtR(const DenseProblem& dp);

}  // namespace tvcs::oracle
