#include "mmp_nlp/sqp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include <fmt/format.h>

namespace mmp_nlp {

const char* method_name(Method method) {
  switch (method) {
    case Method::kMovingBalls: return "mb";
    case Method::kEsqm: return "esqm";
    case Method::kSl1qp: return "sl1qp";
    case Method::kGradientProjection: return "gradproj";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  if (name == "mb") return Method::kMovingBalls;
  if (name == "esqm") return Method::kEsqm;
  if (name == "sl1qp") return Method::kSl1qp;
  if (name == "gradproj") return Method::kGradientProjection;
  return std::nullopt;
}

Linearization linearize(const NlpProblem& problem, const Vector& x) {
  if (x.size() != problem.dimension()) throw std::invalid_argument("point dimension mismatch");
  Linearization lin;
  lin.objective = problem.objective(x);
  lin.gradient = problem.objective.gradient(x);
  lin.constraints.reserve(problem.num_constraints());
  for (const SmoothFunction& c : problem.constraints) lin.constraints.push_back({c(x), c.gradient(x)});
  return lin;
}

MovingBallsConfig::MovingBallsConfig(NlpProblem problem_in)
    : problem(std::move(problem_in)),
      lipschitz(problem.objective.lipschitz_grad()),
      constraint_lipschitz(static_cast<Index>(problem.num_constraints())) {
  for (std::size_t i = 0; i < problem.num_constraints(); ++i)
    constraint_lipschitz[static_cast<Index>(i)] = problem.constraints[i].lipschitz_grad();
  validate();
}

void MovingBallsConfig::validate() const {
  if (problem.simple_set.kind() != SimpleSet::Kind::kWholeSpace)
    throw std::invalid_argument(
        fmt::format("moving balls requires q_set = whole_space, got {}", problem.simple_set.name()));
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) throw std::invalid_argument("moving balls needs L > 0");
  if (constraint_lipschitz.size() != static_cast<Index>(problem.num_constraints()))
    throw std::invalid_argument("one constant L_i per constraint is required");
  for (Index i = 0; i < constraint_lipschitz.size(); ++i)
    if (!(constraint_lipschitz[i] > 0.0) || !std::isfinite(constraint_lipschitz[i]))
      throw std::invalid_argument(fmt::format("L_{} must be positive", i + 1));
}

PenaltyConfig::PenaltyConfig(NlpProblem problem_in, PenaltyKind kind_in)
    : problem(std::move(problem_in)), kind(kind_in) {
  lambda = problem.objective.lipschitz_grad();
  lambda_prime = required_lambda_prime();
  validate();
}

double PenaltyConfig::required_lambda_prime() const {
  double bound = 0.0;
  for (const SmoothFunction& c : problem.constraints)
    bound = kind == PenaltyKind::kLinf ? std::max(bound, c.lipschitz_grad()) : bound + c.lipschitz_grad();
  return std::max(bound, kLipschitzFloor);
}

void PenaltyConfig::validate() const {
  if (!(beta0 > 0.0) || !std::isfinite(beta0)) throw std::invalid_argument("beta0 must be positive");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("delta must be positive");
  if (!(feas_tol >= 0.0)) throw std::invalid_argument("feas_tol must be nonnegative");
  if (stabilization_window < 1) throw std::invalid_argument("stabilization window must be positive");
  if (!(lambda >= problem.objective.lipschitz_grad()) || !std::isfinite(lambda))
    throw std::invalid_argument(
        fmt::format("lambda = {:g} is below the objective constant {:g}", lambda, problem.objective.lipschitz_grad()));
  if (!(lambda_prime >= required_lambda_prime()) || !std::isfinite(lambda_prime))
    throw std::invalid_argument(fmt::format("lambda' = {:g} is below the required {:g}", lambda_prime,
                                            required_lambda_prime()));
}

namespace {

BallSubproblem ball_subproblem(const MovingBallsConfig& config, const Vector& x, Linearization lin) {
  BallSubproblem sub;
  sub.x = x;
  sub.g0 = std::move(lin.gradient);
  sub.lipschitz = config.lipschitz;
  sub.constraints = std::move(lin.constraints);
  sub.weights = config.constraint_lipschitz;
  return sub;
}

PenaltySubproblem penalty_subproblem(const PenaltyConfig& config, double beta, const Vector& x,
                                     Linearization lin) {
  PenaltySubproblem sub{x, std::move(lin.gradient), beta, config.mu(beta), std::move(lin.constraints),
                        config.problem.simple_set};
  return sub;
}

SubproblemSolution solve(const PenaltyConfig& config, const PenaltySubproblem& sub,
                         const SubproblemOptions& options) {
  return config.kind == PenaltyKind::kLinf ? esqm_subproblem(sub, options) : sl1qp_subproblem(sub, options);
}

double penalty_merit(const PenaltyConfig& config, double beta, const Vector& x) {
  return config.kind == PenaltyKind::kLinf ? merit_linf(config.problem, beta, x)
                                           : merit_l1(config.problem, beta, x);
}

// Keeps beta when every test_i <= feas_tol, otherwise beta += delta.
PenaltyState apply_beta_rule(const PenaltyConfig& config, PenaltyState state, const Vector& tests) {
  if (tests.size() > 0 && tests.maxCoeff() > config.feas_tol) {
    state.beta += config.delta;
    ++state.update_count;
  }
  return state;
}

PenaltyStepResult penalty_step(const PenaltyConfig& config, const PenaltyState& state, const Vector& x) {
  if (!contains(config.problem.simple_set, x, 1e-9)) throw std::invalid_argument("point must lie in Q");
  PenaltyStepResult out;
  const PenaltySubproblem sub = penalty_subproblem(config, state.beta, x, linearize(config.problem, x));
  out.solution = solve(config, sub, config.subproblem);
  if (out.solution.status != SubproblemStatus::kSolved)
    throw std::runtime_error(fmt::format("inner problem {}: {}", to_string(out.solution.status), out.solution.message));
  out.next = out.solution.y;
  out.tests = feasibility_tests(config.problem, x, out.next);
  out.state = apply_beta_rule(config, state, out.tests);
  return out;
}

}  // namespace

MbStepResult mb_step(const MovingBallsConfig& config, const Vector& x) {
  const double violation = config.problem.max_violation(x);
  if (violation > config.start_feas_tol)
    throw std::invalid_argument(fmt::format("moving balls step needs a feasible point (violation {:.3e})", violation));
  const BallSubproblem sub = ball_subproblem(config, x, linearize(config.problem, x));
  MbStepResult out;
  out.solution = mb_subproblem(sub, config.subproblem);
  if (out.solution.status != SubproblemStatus::kSolved)
    throw std::runtime_error(fmt::format("inner problem {}: {}; MFQC suspected to fail",
                                         to_string(out.solution.status), out.solution.message));
  out.next = out.solution.y;
  return out;
}

PenaltyStepResult esqm_step(const PenaltyConfig& config, const PenaltyState& state, const Vector& x) {
  if (config.kind != PenaltyKind::kLinf) throw std::invalid_argument("ESQM needs an l-infinity penalty config");
  return penalty_step(config, state, x);
}

PenaltyStepResult sl1qp_step(const PenaltyConfig& config, const PenaltyState& state, const Vector& x) {
  if (config.kind != PenaltyKind::kL1) throw std::invalid_argument("Sl1QP needs an l1 penalty config");
  return penalty_step(config, state, x);
}

Vector feasibility_tests(const NlpProblem& problem, const Vector& x, const Vector& y) {
  Vector tests(static_cast<Index>(problem.num_constraints()));
  const Vector d = y - x;
  for (std::size_t i = 0; i < problem.num_constraints(); ++i)
    tests[static_cast<Index>(i)] = problem.constraints[i](x) + problem.constraints[i].gradient(x).dot(d);
  return tests;
}

double merit_linf(const NlpProblem& problem, double beta, const Vector& x) {
  return problem.objective(x) + beta * problem.max_violation(x);
}

double merit_l1(const NlpProblem& problem, double beta, const Vector& x) {
  double sum = 0.0;
  for (const SmoothFunction& c : problem.constraints) sum += std::max(0.0, c(x));
  return problem.objective(x) + beta * sum;
}

KktReport extract_kkt(const NlpProblem& problem, const Vector& x, const SubproblemSolution& solution,
                      Method /*method*/) {
  // The inner duals are unnormalized in every scheme, so they are the NLP multipliers.
  return kkt_residual(problem, x, solution.u);
}

MovingBallsOracle::MovingBallsOracle(MovingBallsConfig config) : config_(std::move(config)) {
  config_.validate();
}

OracleStep MovingBallsOracle::evaluate(const Vector& x) const {
  Linearization lin = linearize(config_.problem, x);
  const double fx = lin.objective;
  const BallSubproblem sub = ball_subproblem(config_, x, std::move(lin));
  SubproblemOptions options = config_.subproblem;
  if (options.warm_start && !options.initial_duals && warm_duals_) options.initial_duals = warm_duals_;

  OracleStep step;
  step.solution = mb_subproblem(sub, options);
  step.y = step.solution.y;
  step.objective = fx;
  step.merit = fx;
  step.model_value = fx + sub.model(step.y);
  step.mu = config_.lipschitz;
  step.max_violation = config_.problem.max_violation(x);
  if (step.solution.status == SubproblemStatus::kSolved) {
    Vector v = sub.g0;
    for (std::size_t i = 0; i < sub.constraints.size(); ++i)
      v += step.solution.u[static_cast<Index>(i)] * sub.constraints[i].gradient;
    step.kkt_stationarity = v.norm();
  }
  return step;
}

bool MovingBallsOracle::advance(const Vector& /*x*/, const OracleStep& step, int /*iteration*/) {
  warm_duals_ = step.solution.u;
  return false;
}

PenaltyOracle::PenaltyOracle(PenaltyConfig config) : config_(std::move(config)) {
  config_.validate();
  state_.beta = config_.beta0;
}

OracleStep PenaltyOracle::evaluate(const Vector& x) const {
  Linearization lin = linearize(config_.problem, x);
  const double fx = lin.objective;
  const PenaltySubproblem sub = penalty_subproblem(config_, state_.beta, x, std::move(lin));
  SubproblemOptions options = config_.subproblem;
  if (options.warm_start && !options.initial_duals && warm_duals_) options.initial_duals = warm_duals_;

  OracleStep step;
  step.solution = solve(config_, sub, options);
  step.y = step.solution.y;
  step.objective = fx;
  step.merit = penalty_merit(config_, state_.beta, x);
  step.model_value = fx + sub.model(config_.kind, step.y);
  step.mu = sub.mu;
  step.beta = state_.beta;
  step.max_violation = config_.problem.max_violation(x);
  if (step.solution.status == SubproblemStatus::kSolved) {
    Vector v = sub.g0;
    for (std::size_t i = 0; i < sub.constraints.size(); ++i)
      v += step.solution.u[static_cast<Index>(i)] * sub.constraints[i].gradient;
    step.kkt_stationarity = stationarity_residual(config_.problem.simple_set, x, v);
  }
  return step;
}

bool PenaltyOracle::advance(const Vector& x, const OracleStep& step, int iteration) {
  const Vector tests = feasibility_tests(config_.problem, x, step.y);
  const int before = state_.update_count;
  state_ = apply_beta_rule(config_, state_, tests);
  warm_duals_ = step.solution.u;
  if (state_.update_count == before) return false;
  state_.last_update = iteration;
  return true;
}

double PenaltyOracle::merit(const Vector& x) const { return penalty_merit(config_, state_.beta, x); }

namespace {

void attach_kkt(MethodRun& out, const NlpProblem& problem) {
  if (out.run.status != RunStatus::kConverged || !out.run.last_solution) return;
  out.kkt = extract_kkt(problem, out.run.final_state.x, *out.run.last_solution, out.method);
}

}  // namespace

MethodRun solve_moving_balls(const MovingBallsConfig& config, const Vector& x0,
                             const std::vector<Monitor>& monitors) {
  config.validate();
  if (x0.size() != config.problem.dimension()) throw std::invalid_argument("x0 dimension mismatch");
  const double violation = config.problem.max_violation(x0);
  if (violation > config.start_feas_tol)
    throw std::invalid_argument(
        fmt::format("moving balls needs a feasible starting point (max violation {:.3e})", violation));

  MovingBallsOracle oracle(config);
  MethodRun out;
  out.method = Method::kMovingBalls;
  out.run = run_mmp(oracle, x0, config.stop, monitors);
  attach_kkt(out, config.problem);
  if (out.run.status == RunStatus::kSubproblemFailure) {
    const Vector& x = out.run.final_state.x;
    out.mfqc = check_mfqc(config.problem, x, 1e-6);
    out.diagnostic = fmt::format(
        "moving balls subproblem failed ({}); suspected violated assumption: MFQC "
        "(active constraints {}, hull distance of active gradients {:.3e})",
        out.run.message, out.mfqc->active_set.size(), out.mfqc->hull_distance);
  }
  return out;
}

MethodRun solve_penalty(const PenaltyConfig& config, const Vector& x0, const std::vector<Monitor>& monitors) {
  config.validate();
  if (x0.size() != config.problem.dimension()) throw std::invalid_argument("x0 dimension mismatch");
  if (!contains(config.problem.simple_set, x0, 1e-9)) throw std::invalid_argument("x0 must lie in Q");

  PenaltyOracle oracle(config);
  MethodRun out;
  out.method = config.kind == PenaltyKind::kLinf ? Method::kEsqm : Method::kSl1qp;
  out.run = run_mmp(oracle, x0, config.stop, monitors);
  attach_kkt(out, config.problem);

  PenaltyState state = oracle.state();
  const int evaluations = static_cast<int>(out.run.trace.size()) + (out.run.final_evaluation ? 1 : 0);
  const int settled = state.last_update ? *state.last_update + 1 : 0;
  const bool fixed_point = out.run.status == RunStatus::kConverged && out.run.final_state.last_step_norm == 0.0;
  if (evaluations - settled >= config.stabilization_window || fixed_point) state.stabilized_at = settled;
  out.penalty = state;
  if (out.run.status == RunStatus::kSubproblemFailure) out.diagnostic = out.run.message;
  return out;
}

MethodRun solve_gradient_projection(const NlpProblem& problem, const StopCriteria& stop, const Vector& x0,
                                    const std::vector<Monitor>& monitors) {
  if (problem.num_constraints() != 0)
    throw std::invalid_argument("gradient projection handles problems without functional constraints only");
  if (x0.size() != problem.dimension()) throw std::invalid_argument("x0 dimension mismatch");
  if (!contains(problem.simple_set, x0, 1e-9)) throw std::invalid_argument("x0 must lie in Q");
  GradientProjectionOracle oracle(problem.objective, problem.simple_set);
  MethodRun out;
  out.method = Method::kGradientProjection;
  out.run = run_mmp(oracle, x0, stop, monitors);
  attach_kkt(out, problem);
  return out;
}

}  // namespace mmp_nlp
