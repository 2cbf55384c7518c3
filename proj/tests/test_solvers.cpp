#include "tvcs/imaging.hpp"
#include "tvcs/reference_oracle.hpp"
#include "tvcs/solvers.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

using namespace tvcs;
using tvcs::testing::make_desk_instance;

namespace {

SolverConfig tight_config(double mu, double beta, double tol) {
  SolverConfig cfg;
  cfg.mu = mu;
  cfg.beta = beta;
  cfg.beta_schedule = {beta};
  cfg.tol_rel_change = tol;
  cfg.max_iters = 200000;
  cfg.record_trace = false;
  return cfg;
}

SolverState random_state(const Problem& prob, std::mt19937_64& rng, bool with_lambda) {
  SolverState s = SolverState::backprojection(prob);
  s.u = tvcs::testing::random_image(prob.side, rng);
  s.w = tvcs::testing::random_field(prob.side, rng);
  if (with_lambda) s.lambda = tvcs::testing::random_field(prob.side, rng);
  return s;
}

}  // namespace

TEST_CASE("relative_change") {
  const Image a = Image::Constant(4, 2.0);
  CHECK(relative_change(a, a) == 0.0);
  CHECK(relative_change(Image::Constant(4, 3.0), a) == doctest::Approx(0.5));
  CHECK(relative_change(Image(4), Image(4)) == 0.0);
  CHECK(relative_change(Image::Constant(4, 1e-6), Image(4)) == doctest::Approx(4e-6 / 1e-12));
  CHECK_THROWS_AS(relative_change(Image(4), Image(5)), std::invalid_argument);
}

TEST_CASE("SolverConfig validation") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.tau_rule = TauRule::fraction(2.0);
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SolverConfig{};
  cfg.beta_schedule = {16, 8};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SolverConfig{};
  cfg.mu = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SolverConfig{};
  cfg.tol_rel_change = -1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("resolve_tau") {
  const SensingOperator op = SensingOperator::from_dense(2.0 * Eigen::MatrixXd::Identity(4, 4));
  SolverConfig cfg;
  cfg.tau_rule = TauRule::fraction(1.9);
  CHECK(resolve_tau(cfg, op) == doctest::Approx(1.9 / 4.0));
  cfg.tau_rule = TauRule::explicit_value(0.3);
  CHECK(resolve_tau(cfg, op) == 0.3);
  cfg.tau_rule = TauRule::explicit_value(0.5);
  CHECK_THROWS_AS(resolve_tau(cfg, op), std::invalid_argument);
}

TEST_CASE("zero data is a fixed point") {
  const Problem prob(make_gaussian_operator(20, 64, 1), Eigen::VectorXd::Zero(20), 8);
  SolverConfig cfg;
  const SolverResult f = run_ftvcs(prob, cfg);
  CHECK(f.u.vec().norm() == 0.0);
  CHECK(f.trace.stages.front().iterations <= 2);
  const SolverResult i = run_iadm(prob, cfg);
  CHECK(i.u.vec().norm() == 0.0);
  CHECK(i.trace.iterations <= 2);
}

TEST_CASE("FTVCS converges to the exact penalty minimizer") {
  for (std::uint64_t seed : {0u, 3u, 7u}) {
    CAPTURE(seed);
    const auto inst = make_desk_instance(seed);
    const SolverResult r = run_ftvcs(inst.problem, tight_config(inst.mu, inst.beta, 1e-10));
    const auto dp = oracle::DenseProblem::build(inst.problem, inst.mu, inst.beta, r.tau);
    const auto exact = oracle::exact_penalty_solve(dp, 1e-14, 100000);
    CHECK((r.u.vec() - exact.u.vec()).norm() <= 1e-6 * exact.u.vec().norm());
    const auto fp = oracle::check_fixed_point(dp, r.state.u, r.state.w);
    CHECK(fp.shrink_residual < 1e-6);
    CHECK(fp.normal_eq_residual < 1e-6);
  }
}

TEST_CASE("IADM satisfies the constrained optimality conditions") {
  for (std::uint64_t seed : {0u, 5u}) {
    CAPTURE(seed);
    const auto inst = make_desk_instance(seed);
    const SolverResult r = run_iadm(inst.problem, tight_config(inst.mu, inst.beta, 1e-10));
    const auto dp = oracle::DenseProblem::build(inst.problem, inst.mu, inst.beta, r.tau);
    const auto kkt = oracle::kkt_residuals(dp, r.state.u, r.state.w, r.state.lambda);
    CHECK(kkt.max() <= 1e-5);
    CHECK((r.state.w.vec() - apply_gradient(r.state.u).vec()).norm() <= 1e-6);
    // Converged constraint residuals shrink along the trace.
    SolverConfig traced = tight_config(inst.mu, inst.beta, 1e-8);
    traced.record_trace = true;
    const SolverResult t = run_iadm(inst.problem, traced);
    REQUIRE(t.trace.records.size() > 2);
    CHECK(*t.trace.records.back().constraint_residual < *t.trace.records.front().constraint_residual);
    CHECK_FALSE(t.trace.records.back().objective_penalty.has_value());
  }
}

TEST_CASE("iadm_step with zero multiplier reduces to ftvcs_step") {
  std::mt19937_64 rng(99);
  const auto inst = make_desk_instance(2);
  const StepContext ctx(8, inst.mu, inst.beta, 0.5);
  for (int trial = 0; trial < 20; ++trial) {
    SolverState s = random_state(inst.problem, rng, false);
    const SolverState a = ftvcs_step(s, inst.problem, ctx);
    const SolverState b = iadm_step(s, inst.problem, ctx);
    CHECK((a.u.vec() - b.u.vec()).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((a.w.vec() - b.w.vec()).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(a.iter == s.iter + 1);
  }
}

TEST_CASE("FTVCS penalty objective is nonincreasing for tau below 1 / lambda_max") {
  const auto inst = make_desk_instance(4);
  SolverConfig cfg = tight_config(inst.mu, inst.beta, 1e-9);
  cfg.tau_rule = TauRule::fraction(0.99);
  std::vector<double> values;
  run_ftvcs(inst.problem, cfg, [&](const SolverState& s) {
    values.push_back(objective_penalty(s.u, s.w, inst.problem, inst.mu, inst.beta));
  });
  REQUIRE(values.size() > 10);
  int increases = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] > values[k - 1] + 1e-10) ++increases;
  }
  CHECK(increases == 0);
}

TEST_CASE("continuation stages and trace bookkeeping") {
  const auto inst = make_desk_instance(1);
  SolverConfig cfg;
  cfg.mu = inst.mu;
  cfg.beta_schedule = {4.0, 8.0, 16.0};
  cfg.max_iters = 5;
  cfg.tol_rel_change = 1e-12;
  const SolverResult r = run_ftvcs(inst.problem, cfg);
  REQUIRE(r.trace.stages.size() == 3);
  CHECK(r.trace.iterations == 15);
  CHECK_FALSE(r.trace.converged);
  for (const auto& st : r.trace.stages) {
    CHECK(st.iterations == 5);
    CHECK_FALSE(st.converged);
  }
  REQUIRE(r.trace.records.size() == 15);
  CHECK(r.trace.records[4].hit_max_iters);
  CHECK_FALSE(r.trace.records[3].hit_max_iters);
  CHECK(r.trace.records[5].beta == 8.0);
  CHECK(r.trace.records.back().objective_penalty.has_value());
  for (std::size_t k = 1; k < r.trace.records.size(); ++k) {
    CHECK(r.trace.records[k].iter == r.trace.records[k - 1].iter + 1);
    CHECK(r.trace.records[k].wall_seconds >= r.trace.records[k - 1].wall_seconds);
  }
  CHECK_FALSE(r.trace.records.front().rel_error.has_value());

  cfg.oracle_truth = inst.truth;
  cfg.max_iters = 2;
  const SolverResult with_truth = run_ftvcs(inst.problem, cfg);
  REQUIRE(with_truth.trace.records.front().rel_error.has_value());
  CHECK(*with_truth.trace.records.back().rel_error == doctest::Approx(relative_error(with_truth.u, inst.truth)));
}

TEST_CASE("non-finite iterates raise DivergenceError") {
  const SensingOperator op = make_gaussian_operator(10, 16, 3);
  const Problem prob(op, Eigen::VectorXd::Constant(10, 1e307), 4);
  SolverConfig cfg;
  CHECK_THROWS_AS(run_ftvcs(prob, cfg), DivergenceError);
  try {
    run_iadm(prob, cfg);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK_FALSE(e.quantity().empty());
    CHECK(std::string(e.what()).find("non-finite") != std::string::npos);
  }
}
