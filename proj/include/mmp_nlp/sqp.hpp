#pragma once

// Moving balls, ESQM (l-infinity penalty) and Sl1QP (l1 penalty) as model
// oracles for the MM loop, plus one-step helpers, merit functions and KKT
// multiplier extraction.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mmp_nlp/diagnostics.hpp"
#include "mmp_nlp/mmp.hpp"
#include "mmp_nlp/problem.hpp"
#include "mmp_nlp/subproblems.hpp"

namespace mmp_nlp {

enum class Method { kMovingBalls, kEsqm, kSl1qp, kGradientProjection };

/// "mb", "esqm", "sl1qp", "gradproj"
[[nodiscard]] const char* method_name(Method method);
[[nodiscard]] std::optional<Method> parse_method(std::string_view name);

struct Linearization {
  double objective{0.0};
  Vector gradient;
  std::vector<LinearizedConstraint> constraints;
};

[[nodiscard]] Linearization linearize(const NlpProblem& problem, const Vector& x);

struct MovingBallsConfig {
  /// Takes L and L_i from the problem's functions. Throws unless Q is the whole space.
  explicit MovingBallsConfig(NlpProblem problem);

  NlpProblem problem;
  double lipschitz{1.0};
  Vector constraint_lipschitz;
  SubproblemOptions subproblem;
  StopCriteria stop;
  /// Starting points must satisfy max_i f_i(x0) <= start_feas_tol.
  double start_feas_tol{1e-8};

  void validate() const;
};

struct PenaltyConfig {
  /// lambda = L and lambda' = max_i L_i (kLinf) or sum_i L_i (kL1).
  PenaltyConfig(NlpProblem problem, PenaltyKind kind);

  NlpProblem problem;
  PenaltyKind kind{PenaltyKind::kLinf};
  double beta0{1.0};
  double delta{1.0};
  double lambda{1.0};
  double lambda_prime{1.0};
  SubproblemOptions subproblem;
  StopCriteria stop;
  /// Tests below this count as passed; absorbs inner-solve error at active constraints.
  double feas_tol{1e-9};
  /// Iterations without a beta update after which beta counts as stabilized.
  int stabilization_window{200};

  /// Smallest admissible lambda' for the selected penalty.
  [[nodiscard]] double required_lambda_prime() const;
  /// mu = lambda + beta * lambda'
  [[nodiscard]] double mu(double beta) const { return lambda + beta * lambda_prime; }
  void validate() const;
};

struct PenaltyState {
  double beta{1.0};
  int update_count{0};
  std::optional<int> stabilized_at;
  std::optional<int> last_update;  ///< iteration whose test triggered the latest increase
};

struct MbStepResult {
  Vector next;
  SubproblemSolution solution;
};

struct PenaltyStepResult {
  Vector next;
  PenaltyState state;
  SubproblemSolution solution;
  Vector tests;
};

/// Throws std::invalid_argument when x is infeasible.
[[nodiscard]] MbStepResult mb_step(const MovingBallsConfig& config, const Vector& x);
[[nodiscard]] PenaltyStepResult esqm_step(const PenaltyConfig& config, const PenaltyState& state,
                                          const Vector& x);
[[nodiscard]] PenaltyStepResult sl1qp_step(const PenaltyConfig& config, const PenaltyState& state,
                                           const Vector& x);

/// test_i(x, y) = f_i(x) + <grad f_i(x), y - x>
[[nodiscard]] Vector feasibility_tests(const NlpProblem& problem, const Vector& x, const Vector& y);

/// f(x) + beta * max(0, f_1(x), ..., f_m(x))
[[nodiscard]] double merit_linf(const NlpProblem& problem, double beta, const Vector& x);
/// f(x) + beta * sum_i max(0, f_i(x))
[[nodiscard]] double merit_l1(const NlpProblem& problem, double beta, const Vector& x);

/// KKT residuals at x with the multipliers of the last inner problem.
[[nodiscard]] KktReport extract_kkt(const NlpProblem& problem, const Vector& x,
                                    const SubproblemSolution& solution, Method method);

class MovingBallsOracle final : public ModelOracle {
 public:
  explicit MovingBallsOracle(MovingBallsConfig config);

  [[nodiscard]] OracleStep evaluate(const Vector& x) const override;
  bool advance(const Vector& x, const OracleStep& step, int iteration) override;
  [[nodiscard]] double merit(const Vector& x) const override { return config_.problem.objective(x); }

 private:
  MovingBallsConfig config_;
  std::optional<Vector> warm_duals_;
};

class PenaltyOracle final : public ModelOracle {
 public:
  explicit PenaltyOracle(PenaltyConfig config);

  [[nodiscard]] OracleStep evaluate(const Vector& x) const override;
  bool advance(const Vector& x, const OracleStep& step, int iteration) override;
  [[nodiscard]] double merit(const Vector& x) const override;

  [[nodiscard]] const PenaltyState& state() const noexcept { return state_; }

 private:
  PenaltyConfig config_;
  PenaltyState state_;
  std::optional<Vector> warm_duals_;
};

struct MethodRun {
  Method method{Method::kGradientProjection};
  RunResult run;
  std::optional<PenaltyState> penalty;
  /// Residuals at the final point (converged runs only).
  std::optional<KktReport> kkt;
  /// Constraint qualification check at the point where moving balls failed.
  std::optional<MfqcReport> mfqc;
  std::string diagnostic;
};

[[nodiscard]] MethodRun solve_moving_balls(const MovingBallsConfig& config, const Vector& x0,
                                           const std::vector<Monitor>& monitors = {});
[[nodiscard]] MethodRun solve_penalty(const PenaltyConfig& config, const Vector& x0,
                                      const std::vector<Monitor>& monitors = {});
/// Projected gradient on Q; only defined for problems without functional constraints.
[[nodiscard]] MethodRun solve_gradient_projection(const NlpProblem& problem, const StopCriteria& stop,
                                                  const Vector& x0, const std::vector<Monitor>& monitors = {});

}  // namespace mmp_nlp
