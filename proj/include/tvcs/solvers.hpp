#pragma once

#include "tvcs/grad_ops.hpp"
#include "tvcs/image.hpp"
#include "tvcs/sensing.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tvcs {

/// Step size tau: either given directly or as a fraction f of 1/lambda_max(A^T A),
/// with lambda_max measured by power iteration. Convergence needs f < 2.
struct TauRule {
  enum class Kind { Explicit, FractionOfBound };
  Kind kind = Kind::FractionOfBound;
  double value = 1.9;

  static TauRule explicit_value(double tau) { return {Kind::Explicit, tau}; }
  static TauRule fraction(double f) { return {Kind::FractionOfBound, f}; }
};

struct SolverConfig {
  double mu = 200.0;
  double beta = 8.0;  // IADM multiplier penalty
  TauRule tau_rule = TauRule::fraction(1.9);
  double tol_rel_change = 1e-3;
  int max_iters = 5000;                                  // per continuation stage
  std::vector<double> beta_schedule{16.0, 32.0, 64.0, 128.0};  // FTVCS continuation
  bool record_trace = true;
  std::optional<Image> oracle_truth;  // only used for rel_error logging

  void validate() const;
};

struct SolverState {
  Image u;
  GradientField w;
  GradientField lambda;  // stays zero for FTVCS
  Image g;               // A^T (A u - f) at the previous iterate
  int iter = 0;
  double last_rel_change = std::numeric_limits<double>::infinity();

  /// u = A^T f (backprojection), w = lambda = 0.
  static SolverState backprojection(const Problem& problem);
};

/// Per-stage constants of one (mu, beta, tau) setting, including the
/// spectral solver for D^T D + mu/(beta tau) I.
struct StepContext {
  StepContext(Index side, double mu, double beta, double tau);

  double mu;
  double beta;
  double tau;
  SpectralSolver spectral;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::string quantity, int iteration);

  const std::string& quantity() const { return quantity_; }
  int iteration() const { return iteration_; }

 private:
  std::string quantity_;
  int iteration_;
};

/// One alternating-minimization step on the penalty model:
///   w+ = S(D u),  (D^T D + mu/(beta tau) I) u+ = D^T w+ + mu/(beta tau) (u - tau g).
SolverState ftvcs_step(const SolverState& state, const Problem& problem, const StepContext& ctx);

/// One inexact ADM step on the augmented Lagrangian
///   sum |w_i| - lambda^T (w - Du) + beta/2 |w - Du|^2 + mu/2 |Au - f|^2:
///   w+ = S(D u + lambda / beta),
///   (D^T D + mu/(beta tau) I) u+ = D^T (w+ - lambda / beta) + mu/(beta tau) (u - tau g),
///   lambda+ = lambda - beta (w+ - D u+).
SolverState iadm_step(const SolverState& state, const Problem& problem, const StepContext& ctx);

/// |u_new - u_old| / max(|u_old|, 1e-12)
double relative_change(const Image& u_new, const Image& u_old);

struct TraceRecord {
  int iter = 0;
  double wall_seconds = 0.0;
  double objective_tv = 0.0;
  std::optional<double> objective_penalty;    // FTVCS only
  std::optional<double> constraint_residual;  // IADM only: |w - Du|
  double rel_change = 0.0;
  std::optional<double> rel_error;
  double beta = 0.0;
  bool hit_max_iters = false;  // last record of a stage that ran out of iterations
};

struct StageSummary {
  double beta = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct IterationTrace {
  std::vector<TraceRecord> records;
  std::vector<StageSummary> stages;
  int iterations = 0;
  double wall_seconds = 0.0;
  bool converged = false;
};

struct SolverResult {
  Image u;
  SolverState state;
  IterationTrace trace;
  double tau = 0.0;
};

using IterateObserver = std::function<void(const SolverState&)>;

/// Effective tau for `config` on `op`. Throws if an explicit tau violates
/// tau * lambda_max(A^T A) < 2.
double resolve_tau(const SolverConfig& config, const SensingOperator& op);

/// FTVCS with beta continuation and warm starts. Each stage stops on
/// relative_change <= tol or max_iters. `observer` sees every iterate.
SolverResult run_ftvcs(const Problem& problem, const SolverConfig& config,
                       const IterateObserver& observer = {});

/// IADM at the fixed config.beta; beta_schedule is ignored.
SolverResult run_iadm(const Problem& problem, const SolverConfig& config,
                      const IterateObserver& observer = {});

}  // namespace tvcs
