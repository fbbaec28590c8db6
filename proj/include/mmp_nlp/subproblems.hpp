#pragma once

// Strongly convex inner problems of the three SQP schemes, solved through
// their duals. Each has a closed-form primal-from-dual map, so the solver is a
// projected gradient ascent over the multipliers followed by primal recovery.

#include <optional>
#include <string>
#include <vector>

#include "mmp_nlp/simple_set.hpp"
#include "mmp_nlp/types.hpp"

namespace mmp_nlp {

/// c_i = f_i(x), g_i = grad f_i(x); test_i(x, y) = c_i + <g_i, y - x>.
struct LinearizedConstraint {
  double value{0.0};
  Vector gradient;

  [[nodiscard]] double at(const Vector& x, const Vector& y) const { return value + gradient.dot(y - x); }
};

/// The constraint c + <g, y - x> + (L_i/2)||y - x||^2 <= 0 rewritten as ||y - center||^2 <= r^2.
struct BallData {
  Vector center;
  double squared_radius{0.0};
  double weight{1.0};
};

[[nodiscard]] BallData make_ball(const Vector& x, const LinearizedConstraint& c, double weight);

enum class SubproblemStatus { kSolved, kInfeasible, kMaxInnerIters };

[[nodiscard]] const char* to_string(SubproblemStatus status);

struct SubproblemSolution {
  Vector y;
  Vector u;      ///< multipliers of the linearized constraints, u >= 0
  Vector slack;  ///< empty (moving balls), size 1 (l-infinity) or size m (l1)
  double pd_residual{0.0};
  SubproblemStatus status{SubproblemStatus::kSolved};
  int iterations{0};
  std::string message;
};

struct SubproblemOptions {
  double eps_sub{1e-10};
  int max_inner_iters{100000};
  /// Moving balls only: a multiplier above this is reported as infeasible.
  double multiplier_cap{1e8};
  /// Moving balls only: a squared radius below -infeasibility_tol is infeasible.
  double infeasibility_tol{1e-10};
  /// Dual starting point; zero when absent.
  std::optional<Vector> initial_duals;
  /// Outer drivers only: start each inner solve from the previous duals.
  bool warm_start{false};
};

/// min <g0, y - x> + (L/2)||y - x||^2
/// s.t. c_i + <g_i, y - x> + (L_i/2)||y - x||^2 <= 0
struct BallSubproblem {
  Vector x;
  Vector g0;
  double lipschitz{1.0};
  std::vector<LinearizedConstraint> constraints;
  Vector weights;  ///< L_i

  [[nodiscard]] double model(const Vector& y) const;
  [[nodiscard]] double constraint(std::size_t i, const Vector& y) const;
};

enum class PenaltyKind { kLinf, kL1 };

/// min <g0, y - x> + beta * penalty(c + G (y - x)) + (mu/2)||y - x||^2 over y in Q,
/// where penalty is max(0, max_i .) for kLinf and sum_i max(0, .) for kL1.
struct PenaltySubproblem {
  Vector x;
  Vector g0;
  double beta{1.0};
  double mu{1.0};
  std::vector<LinearizedConstraint> constraints;
  SimpleSet q;

  [[nodiscard]] double model(PenaltyKind kind, const Vector& y) const;
};

[[nodiscard]] SubproblemSolution mb_subproblem(const BallSubproblem& problem,
                                               const SubproblemOptions& options = {});
[[nodiscard]] SubproblemSolution esqm_subproblem(const PenaltySubproblem& problem,
                                                 const SubproblemOptions& options = {});
[[nodiscard]] SubproblemSolution sl1qp_subproblem(const PenaltySubproblem& problem,
                                                  const SubproblemOptions& options = {});

/// Max of stationarity, primal/dual feasibility and complementarity of the
/// inner problem, recomputed from the solution and the original inputs.
[[nodiscard]] double subproblem_kkt_residual(const SubproblemSolution& solution,
                                             const BallSubproblem& problem);
[[nodiscard]] double subproblem_kkt_residual(const SubproblemSolution& solution,
                                             const PenaltySubproblem& problem, PenaltyKind kind);

}  // namespace mmp_nlp
