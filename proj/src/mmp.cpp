#include "mmp_nlp/mmp.hpp"

#include <stdexcept>
#include <utility>

#include <fmt/format.h>

namespace mmp_nlp {

GradientProjectionOracle::GradientProjectionOracle(SmoothFunction f, SimpleSet q)
    : f_(std::move(f)), q_(std::move(q)) {
  if (f_.dimension() != q_.dimension()) throw std::invalid_argument("set and function dimensions differ");
}

OracleStep GradientProjectionOracle::evaluate(const Vector& x) const {
  const double lipschitz = f_.lipschitz_grad();
  const Vector g = f_.gradient(x);
  OracleStep step;
  step.y = project(q_, x - g / lipschitz);
  const Vector d = step.y - x;
  step.objective = f_(x);
  step.merit = step.objective;
  step.model_value = step.objective + g.dot(d) + 0.5 * lipschitz * d.squaredNorm();
  step.mu = lipschitz;
  step.kkt_stationarity = stationarity_residual(q_, x, g);
  step.solution.y = step.y;
  step.solution.u = Vector(0);
  step.solution.slack = Vector(0);
  return step;
}

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::kConverged: return "Converged";
    case RunStatus::kDiverged: return "Diverged";
    case RunStatus::kMaxIters: return "MaxIters";
    case RunStatus::kSubproblemFailure: return "SubproblemFailure";
  }
  return "Unknown";
}

std::vector<TraceRecord> RunResult::monitored_rows() const {
  std::vector<TraceRecord> rows = trace;
  if (final_evaluation) rows.push_back(*final_evaluation);
  return rows;
}

std::vector<double> RunResult::monitored_mu() const {
  std::vector<double> out = mu;
  if (final_evaluation) out.push_back(final_mu);
  return out;
}

RunResult run_mmp(ModelOracle& oracle, const Vector& x0, const StopCriteria& stop,
                  const std::vector<Monitor>& monitors) {
  if (!(stop.tol_step >= 0.0) || stop.max_iters < 0 || !(stop.divergence_radius > 0.0))
    throw std::invalid_argument("invalid stopping criteria");

  RunResult result;
  Vector x = x0;
  result.points.push_back(x);
  auto finish = [&](RunStatus status, double step_norm, double value, double merit) {
    result.status = status;
    result.final_state.x = x;
    result.final_state.k = static_cast<int>(result.trace.size());
    result.final_state.last_step_norm = step_norm;
    result.final_state.value_function = value;
    result.final_state.merit = merit;
  };

  for (int k = 0;; ++k) {
    if (k == stop.max_iters) {
      const TraceRecord* last = result.trace.empty() ? nullptr : &result.trace.back();
      finish(RunStatus::kMaxIters, last ? last->step_norm : 0.0, last ? last->value_function : 0.0,
             oracle.merit(x));
      result.message = fmt::format("iteration limit {} reached", stop.max_iters);
      return result;
    }

    OracleStep step = oracle.evaluate(x);
    if (step.solution.status != SubproblemStatus::kSolved) {
      finish(RunStatus::kSubproblemFailure, 0.0, step.model_value, step.merit);
      result.message = fmt::format("subproblem {} at iteration {}: {}", to_string(step.solution.status), k,
                                   step.solution.message);
      result.last_solution = std::move(step.solution);
      return result;
    }
    const bool changed = oracle.advance(x, step, k);
    const double step_norm = (step.y - x).norm();

    TraceRecord row;
    row.k = k;
    row.merit = step.merit;
    row.f = step.objective;
    row.value_function = step.model_value;
    row.step_norm = step_norm;
    row.beta = step.beta;
    row.max_constraint_violation = step.max_violation;
    row.subproblem_iters = step.solution.iterations;
    row.kkt_stationarity = step.kkt_stationarity;

    if (step_norm <= stop.tol_step && !changed) {
      result.final_evaluation = row;
      result.final_mu = step.mu;
      result.points.push_back(step.y);
      finish(RunStatus::kConverged, step_norm, step.model_value, step.merit);
      result.last_solution = std::move(step.solution);
      return result;
    }

    result.trace.push_back(row);
    result.mu.push_back(step.mu);
    for (const Monitor& monitor : monitors) monitor(row, x);

    x = std::move(step.y);
    result.points.push_back(x);
    if (!x.allFinite() || x.norm() > stop.divergence_radius) {
      finish(RunStatus::kDiverged, step_norm, step.model_value, oracle.merit(x));
      result.message = fmt::format("||x|| exceeded divergence radius {:g} at iteration {}",
                                   stop.divergence_radius, k + 1);
      return result;
    }
  }
}

double value_function(const ModelOracle& oracle, const Vector& x) {
  const OracleStep step = oracle.evaluate(x);
  if (step.solution.status != SubproblemStatus::kSolved)
    throw std::runtime_error(fmt::format("value function: subproblem {}", to_string(step.solution.status)));
  return step.model_value;
}

std::vector<std::size_t> sandwich_check(std::span<const TraceRecord> trace, std::span<const double> mu,
                                        double tol) {
  if (trace.size() != mu.size()) throw std::invalid_argument("trace and modulus lengths differ");
  std::vector<std::size_t> violations;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const TraceRecord& row = trace[k];
    bool bad = row.value_function + 0.5 * mu[k] * row.step_norm * row.step_norm > row.merit + tol;
    if (k >= 1 && trace[k - 1].beta == row.beta) bad = bad || row.merit > trace[k - 1].value_function + tol;
    if (bad) violations.push_back(k);
  }
  return violations;
}

std::vector<std::size_t> descent_check(std::span<const TraceRecord> trace, std::span<const double> mu,
                                       double tol) {
  if (trace.size() != mu.size()) throw std::invalid_argument("trace and modulus lengths differ");
  std::vector<std::size_t> violations;
  for (std::size_t k = 0; k + 1 < trace.size(); ++k) {
    if (trace[k].beta != trace[k + 1].beta) continue;
    const double decrease = 0.5 * mu[k] * trace[k].step_norm * trace[k].step_norm;
    if (trace[k].merit < trace[k + 1].merit + decrease - tol) violations.push_back(k);
  }
  return violations;
}

}  // namespace mmp_nlp
