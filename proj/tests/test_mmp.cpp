#include <cmath>

#include <doctest.h>

#include "mmp_nlp/builtins.hpp"
#include "mmp_nlp/mmp.hpp"
#include "mmp_nlp/sqp.hpp"

using namespace mmp_nlp;

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

SmoothFunction half_square(Index n) {
  Polynomial p(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) p = p + 0.5 * Polynomial::variable(static_cast<std::size_t>(n), static_cast<std::size_t>(i)).pow(2);
  return SmoothFunction::from_polynomial(p, 1.0);
}

// Wraps another oracle and counts evaluations.
class CountingOracle final : public ModelOracle {
 public:
  explicit CountingOracle(const ModelOracle& inner) : inner_(inner) {}
  [[nodiscard]] OracleStep evaluate(const Vector& x) const override {
    ++calls;
    return inner_.evaluate(x);
  }
  [[nodiscard]] double merit(const Vector& x) const override { return inner_.merit(x); }
  mutable int calls{0};

 private:
  const ModelOracle& inner_;
};

}  // namespace

TEST_CASE("gradient projection on a round quadratic takes one step") {
  GradientProjectionOracle oracle(half_square(2), SimpleSet::whole_space(2));
  const RunResult r = run_mmp(oracle, vec2(1.0, 1.0), StopCriteria{});
  CHECK(r.status == RunStatus::kConverged);
  CHECK(r.trace.size() == 1);
  CHECK(r.final_state.x.norm() == 0.0);
  CHECK(r.final_state.last_step_norm == 0.0);
  CHECK(r.trace[0].merit == 1.0);
  CHECK(r.trace[0].value_function == 0.0);
  CHECK(r.trace[0].step_norm == doctest::Approx(std::sqrt(2.0)));
  REQUIRE(r.final_evaluation.has_value());
  CHECK(r.final_evaluation->step_norm == 0.0);
  CHECK(r.points.size() == 3);
}

TEST_CASE("a linear objective diverges") {
  const SmoothFunction f = SmoothFunction::from_polynomial(parse_polynomial("-x1", 2), kLipschitzFloor).with_lipschitz(1.0);
  GradientProjectionOracle oracle(f, SimpleSet::whole_space(2));
  StopCriteria stop;
  stop.divergence_radius = 100.0;
  const RunResult r = run_mmp(oracle, vec2(0.0, 0.0), stop);
  CHECK(r.status == RunStatus::kDiverged);
  CHECK(r.final_state.x.norm() > 100.0);
  CHECK(r.trace.size() == 101);
}

TEST_CASE("max iterations") {
  const SmoothFunction f = SmoothFunction::from_polynomial(parse_polynomial("-x1", 1), 1.0);
  GradientProjectionOracle oracle(f, SimpleSet::whole_space(1));
  StopCriteria stop;
  stop.max_iters = 5;
  const RunResult r = run_mmp(oracle, Vector::Zero(1), stop);
  CHECK(r.status == RunStatus::kMaxIters);
  CHECK(r.trace.size() == 5);
}

TEST_CASE("quartic over a box converges to a stationary point") {
  const Builtin* b = find_builtin("quartic-box");
  REQUIRE(b != nullptr);
  const MethodRun run = solve_gradient_projection(b->problem, StopCriteria{}, b->x0);
  REQUIRE(run.run.status == RunStatus::kConverged);
  const Vector g = b->problem.objective.gradient(run.run.final_state.x);
  CHECK(stationarity_residual(b->problem.simple_set, run.run.final_state.x, g) <= 1e-6);
  CHECK((run.run.final_state.x - vec2(1.0, 1.0)).norm() <= 1e-6);
}

TEST_CASE("value function") {
  GradientProjectionOracle oracle(half_square(1), SimpleSet::whole_space(1));
  CHECK(value_function(oracle, Vector::Constant(1, 1.0)) == 0.0);
  // At the minimizer p(x) = x and F = merit.
  CHECK(value_function(oracle, Vector::Zero(1)) == oracle.merit(Vector::Zero(1)));
  GradientProjectionOracle boxed(half_square(1), SimpleSet::box(Vector::Constant(1, 1.0), Vector::Constant(1, 2.0)));
  CHECK(value_function(boxed, Vector::Constant(1, 1.0)) == boxed.merit(Vector::Constant(1, 1.0)));
}

TEST_CASE("value function never exceeds the merit along a run") {
  const Builtin* b = find_builtin("quartic-box");
  GradientProjectionOracle oracle(b->problem.objective, b->problem.simple_set);
  const RunResult r = run_mmp(oracle, b->x0, StopCriteria{});
  for (const TraceRecord& row : r.trace) CHECK(row.value_function <= row.merit + 1e-9);
  CHECK(sandwich_check(r.trace, r.mu, 1e-9).empty());
  CHECK(descent_check(r.trace, r.mu, 1e-9).empty());
}

TEST_CASE("single gradient step satisfies descent with equality") {
  GradientProjectionOracle oracle(half_square(1), SimpleSet::whole_space(1));
  const RunResult r = run_mmp(oracle, Vector::Constant(1, 1.0), StopCriteria{});
  const auto rows = r.monitored_rows();
  const auto mu = r.monitored_mu();
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].merit == rows[1].merit + 0.5 * mu[0] * rows[0].step_norm * rows[0].step_norm);
  CHECK(descent_check(rows, mu, 0.0).empty());
  CHECK(sandwich_check(rows, mu, 0.0).empty());
}

TEST_CASE("fault injection is reported") {
  const Builtin* b = find_builtin("quartic-box");
  GradientProjectionOracle oracle(b->problem.objective, b->problem.simple_set);
  StopCriteria stop;
  stop.max_iters = 40;
  const RunResult r = run_mmp(oracle, b->x0, stop);
  auto rows = r.trace;
  REQUIRE(rows.size() > 10);
  rows[5].value_function += 1.0;
  const auto sandwich = sandwich_check(rows, r.mu, 1e-9);
  CHECK(std::find(sandwich.begin(), sandwich.end(), 5U) != sandwich.end());

  rows = r.trace;
  rows[7].merit += 1.0;
  const auto descent = descent_check(rows, r.mu, 1e-9);
  CHECK(std::find(descent.begin(), descent.end(), 6U) != descent.end());
  CHECK_THROWS_AS((void)descent_check(rows, std::span<const double>(r.mu).first(3), 1e-9), std::invalid_argument);
}

TEST_CASE("monitors see every row and runs are deterministic") {
  const Builtin* b = find_builtin("quartic-box");
  GradientProjectionOracle oracle(b->problem.objective, b->problem.simple_set);
  CountingOracle counting(oracle);
  int seen = 0;
  int last_k = -1;
  const RunResult first = run_mmp(counting, b->x0, StopCriteria{}, {[&](const TraceRecord& row, const Vector&) {
                                    CHECK(row.k == last_k + 1);
                                    last_k = row.k;
                                    ++seen;
                                  }});
  CHECK(static_cast<std::size_t>(seen) == first.trace.size());
  CHECK(static_cast<std::size_t>(counting.calls) == first.trace.size() + 1);
  const RunResult second = run_mmp(oracle, b->x0, StopCriteria{});
  REQUIRE(first.trace.size() == second.trace.size());
  for (std::size_t k = 0; k < first.trace.size(); ++k) {
    CHECK(first.trace[k].merit == second.trace[k].merit);
    CHECK(first.trace[k].step_norm == second.trace[k].step_norm);
  }
}

TEST_CASE("square-summable steps") {
  const Builtin* b = find_builtin("quartic-box");
  GradientProjectionOracle oracle(b->problem.objective, b->problem.simple_set);
  const RunResult r = run_mmp(oracle, b->x0, StopCriteria{});
  double sum = 0.0;
  double lowest = INFINITY;
  for (const TraceRecord& row : r.trace) {
    sum += row.step_norm * row.step_norm;
    lowest = std::min(lowest, row.merit);
  }
  CHECK(sum <= (r.trace.front().merit - lowest) * 2.0 / r.mu.front() + 1e-9);
}
