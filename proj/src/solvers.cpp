#include "tvcs/solvers.hpp"

#include "tvcs/imaging.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace tvcs {

void SolverConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(mu > 0.0 && std::isfinite(mu), "mu must be positive");
  require(beta > 0.0 && std::isfinite(beta), "beta must be positive");
  require(tol_rel_change > 0.0, "tol_rel_change must be positive");
  require(max_iters > 0, "max_iters must be positive");
  require(!beta_schedule.empty(), "beta_schedule must not be empty");
  for (std::size_t i = 0; i < beta_schedule.size(); ++i) {
    require(beta_schedule[i] > 0.0, "beta_schedule entries must be positive");
    require(i == 0 || beta_schedule[i] > beta_schedule[i - 1], "beta_schedule must be strictly increasing");
  }
  if (tau_rule.kind == TauRule::Kind::FractionOfBound) {
    require(tau_rule.value > 0.0 && tau_rule.value < 2.0,
            "tau fraction must lie in (0, 2) so that tau < 2 / lambda_max(A^T A)");
  } else {
    require(tau_rule.value > 0.0, "explicit tau must be positive");
  }
}

SolverState SolverState::backprojection(const Problem& problem) {
  SolverState s;
  s.u = Image(problem.side, problem.op.apply_adjoint(problem.f));
  s.w = GradientField(problem.side);
  s.lambda = GradientField(problem.side);
  s.g = Image(problem.side);
  return s;
}

StepContext::StepContext(Index side, double mu_in, double beta_in, double tau_in)
    : mu(mu_in), beta(beta_in), tau(tau_in), spectral(side, mu_in / (beta_in * tau_in)) {}

namespace {

std::string divergence_message(const std::string& quantity, int iteration) {
  std::ostringstream msg;
  msg << "divergence: non-finite " << quantity << " at iteration " << iteration
      << " (check that N(A) & N(D) = {0} and tau * lambda_max(A^T A) < 2)";
  return msg.str();
}

template <typename Vec>
void require_finite(const Vec& v, const char* quantity, int iteration) {
  if (!v.allFinite()) throw DivergenceError(quantity, iteration);
}

void check_state(const SolverState& state, const Problem& problem) {
  if (state.u.side() != problem.side) throw std::invalid_argument("solver state does not match problem size");
}

// Solves the linearized u-subproblem given the D^T-side right-hand term.
Image u_update(const SolverState& state, const Problem& problem, const StepContext& ctx,
               const Image& dt_term, Image& gradient_out) {
  const Eigen::VectorXd residual = problem.op.apply(state.u.vec()) - problem.f;
  gradient_out = Image(problem.side);
  gradient_out.vec() = problem.op.apply_adjoint(residual);
  require_finite(gradient_out.vec(), "g", state.iter + 1);

  const double shift = ctx.spectral.shift();
  Image rhs(problem.side);
  rhs.vec() = dt_term.vec() + shift * (state.u.vec() - ctx.tau * gradient_out.vec());
  Image u = ctx.spectral.solve(rhs);
  require_finite(u.vec(), "u", state.iter + 1);
  return u;
}

}  // namespace

DivergenceError::DivergenceError(std::string quantity, int iteration)
    : std::runtime_error(divergence_message(quantity, iteration)),
      quantity_(std::move(quantity)),
      iteration_(iteration) {}

SolverState ftvcs_step(const SolverState& state, const Problem& problem, const StepContext& ctx) {
  check_state(state, problem);
  SolverState next;
  next.iter = state.iter + 1;
  next.lambda = state.lambda;
  next.w = shrink_field(apply_gradient(state.u), 1.0 / ctx.beta);
  require_finite(next.w.vec(), "w", next.iter);
  next.u = u_update(state, problem, ctx, apply_gradient_adjoint(next.w), next.g);
  next.last_rel_change = relative_change(next.u, state.u);
  return next;
}

SolverState iadm_step(const SolverState& state, const Problem& problem, const StepContext& ctx) {
  check_state(state, problem);
  SolverState next;
  next.iter = state.iter + 1;

  GradientField shifted = apply_gradient(state.u);
  shifted.vec() += state.lambda.vec() / ctx.beta;
  next.w = shrink_field(shifted, 1.0 / ctx.beta);
  require_finite(next.w.vec(), "w", next.iter);

  GradientField target = next.w;
  target.vec() -= state.lambda.vec() / ctx.beta;
  next.u = u_update(state, problem, ctx, apply_gradient_adjoint(target), next.g);

  next.lambda = state.lambda;
  next.lambda.vec() -= ctx.beta * (next.w.vec() - apply_gradient(next.u).vec());
  require_finite(next.lambda.vec(), "lambda", next.iter);
  next.last_rel_change = relative_change(next.u, state.u);
  return next;
}

double relative_change(const Image& u_new, const Image& u_old) {
  if (u_new.side() != u_old.side()) throw std::invalid_argument("relative_change: image sizes differ");
  constexpr double kFloor = 1e-12;
  return (u_new.vec() - u_old.vec()).norm() / std::max(u_old.vec().norm(), kFloor);
}

double resolve_tau(const SolverConfig& config, const SensingOperator& op) {
  const SpectralRadiusEstimate est = estimate_spectral_radius(op);
  const double bound = est.safe_bound();
  if (!(bound > 0.0)) throw std::invalid_argument("A^T A has zero spectral radius");
  if (config.tau_rule.kind == TauRule::Kind::FractionOfBound) return config.tau_rule.value / bound;
  const double tau = config.tau_rule.value;
  if (tau * bound >= 2.0) {
    std::ostringstream msg;
    msg << "explicit tau = " << tau << " violates tau * lambda_max(A^T A) < 2 (lambda_max ~ " << bound << ")";
    throw std::invalid_argument(msg.str());
  }
  return tau;
}

namespace {

class Stopwatch {
 public:
  void start() { begin_ = Clock::now(); }
  void stop() { total_ += std::chrono::duration<double>(Clock::now() - begin_).count(); }
  double seconds() const { return total_; }

 private:
  using Clock = std::chrono::steady_clock;
  Clock::time_point begin_;
  double total_ = 0.0;
};

enum class Method { Ftvcs, Iadm };

SolverResult run(const Problem& problem, const SolverConfig& config, const IterateObserver& observer,
                 Method method) {
  config.validate();
  if (config.oracle_truth && config.oracle_truth->side() != problem.side) {
    throw std::invalid_argument("oracle_truth size does not match the problem");
  }
  Stopwatch clock;
  clock.start();

  SolverResult result;
  result.tau = resolve_tau(config, problem.op);
  SolverState state = SolverState::backprojection(problem);
  IterationTrace& trace = result.trace;

  const std::vector<double> betas =
      method == Method::Ftvcs ? config.beta_schedule : std::vector<double>{config.beta};
  trace.converged = true;
  for (double beta : betas) {
    const StepContext ctx(problem.side, config.mu, beta, result.tau);
    StageSummary stage{beta, 0, false};
    for (int k = 0; k < config.max_iters; ++k) {
      state = method == Method::Ftvcs ? ftvcs_step(state, problem, ctx) : iadm_step(state, problem, ctx);
      ++stage.iterations;
      stage.converged = state.last_rel_change <= config.tol_rel_change;
      clock.stop();

      if (observer) observer(state);
      if (config.record_trace) {
        TraceRecord rec;
        rec.iter = state.iter;
        rec.wall_seconds = clock.seconds();
        rec.objective_tv = objective_tv_l2(state.u, problem, config.mu).objective_tv;
        if (method == Method::Ftvcs) {
          rec.objective_penalty = objective_penalty(state.u, state.w, problem, config.mu, beta);
        } else {
          rec.constraint_residual = (state.w.vec() - apply_gradient(state.u).vec()).norm();
        }
        rec.rel_change = state.last_rel_change;
        if (config.oracle_truth) rec.rel_error = relative_error(state.u, *config.oracle_truth);
        rec.beta = beta;
        rec.hit_max_iters = !stage.converged && stage.iterations == config.max_iters;
        trace.records.push_back(rec);
      }

      clock.start();
      if (stage.converged) break;
    }
    trace.stages.push_back(stage);
    trace.converged = trace.converged && stage.converged;
  }
  clock.stop();

  trace.iterations = state.iter;
  trace.wall_seconds = clock.seconds();
  result.u = state.u;
  result.state = std::move(state);
  return result;
}

}  // namespace

SolverResult run_ftvcs(const Problem& problem, const SolverConfig& config, const IterateObserver& observer) {
  return run(problem, config, observer, Method::Ftvcs);
}

SolverResult run_iadm(const Problem& problem, const SolverConfig& config, const IterateObserver& observer) {
  return run(problem, config, observer, Method::Iadm);
}

}  // namespace tvcs
