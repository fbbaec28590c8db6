#pragma once

// Majorization-minimization loop x_{k+1} = p(x_k), where p(x) minimizes a
// strongly convex upper model h(x, .) over an inner approximation D(x) of the
// feasible set. The value function F(x) = h(x, p(x)) is monitored along the
// run as a Lyapunov certificate.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmp_nlp/problem.hpp"
#include "mmp_nlp/subproblems.hpp"
#include "mmp_nlp/types.hpp"

namespace mmp_nlp {

/// One row per outer iteration; field order is the trace CSV column order.
struct TraceRecord {
  int k{0};
  double merit{0.0};           ///< h(x_k, x_k)
  double f{0.0};               ///< objective at x_k
  double value_function{0.0};  ///< F(x_k) = h(x_k, x_{k+1})
  double step_norm{0.0};       ///< ||x_{k+1} - x_k||
  double beta{0.0};            ///< penalty parameter used by the model at x_k (0 if none)
  double max_constraint_violation{0.0};
  int subproblem_iters{0};
  double kkt_stationarity{0.0};
};

/// Result of one model minimization at x.
struct OracleStep {
  Vector y;                   ///< p(x)
  double model_value{0.0};    ///< h(x, p(x))
  double merit{0.0};          ///< h(x, x)
  double objective{0.0};      ///< f(x)
  double mu{0.0};             ///< strong convexity modulus of h(x, .)
  double beta{0.0};
  double max_violation{0.0};
  double kkt_stationarity{0.0};
  SubproblemSolution solution;
};

class ModelOracle {
 public:
  virtual ~ModelOracle() = default;

  /// Pure evaluation of the iteration mapping under the current model parameters.
  [[nodiscard]] virtual OracleStep evaluate(const Vector& x) const = 0;

  /// Applies parameter updates after a step (penalty rules). Returns true when
  /// the model changed, in which case the run cannot stop at this iterate.
  virtual bool advance(const Vector& /*x*/, const OracleStep& /*step*/, int /*iteration*/) { return false; }

  /// h(x, x), the function the model majorizes.
  [[nodiscard]] virtual double merit(const Vector& x) const = 0;
};

/// h(x, y) = f(x) + <grad f(x), y - x> + (L/2)||y - x||^2 with D(x) = Q,
/// so that p(x) = P_Q(x - grad f(x) / L).
class GradientProjectionOracle final : public ModelOracle {
 public:
  GradientProjectionOracle(SmoothFunction f, SimpleSet q);

  [[nodiscard]] OracleStep evaluate(const Vector& x) const override;
  [[nodiscard]] double merit(const Vector& x) const override { return f_(x); }

 private:
  SmoothFunction f_;
  SimpleSet q_;
};

struct MmpState {
  Vector x;
  int k{0};
  double last_step_norm{0.0};
  double value_function{0.0};
  double merit{0.0};
};

struct StopCriteria {
  double tol_step{1e-10};
  int max_iters{50000};
  double divergence_radius{1e6};
};

enum class RunStatus { kConverged, kDiverged, kMaxIters, kSubproblemFailure };

[[nodiscard]] const char* to_string(RunStatus status);

struct RunResult {
  RunStatus status{RunStatus::kMaxIters};
  MmpState final_state;
  std::vector<TraceRecord> trace;  ///< one row per step taken
  std::vector<double> mu;          ///< strong convexity modulus per trace row
  /// x_0, ..., x_K, followed by p(x_K) when the run converged.
  std::vector<Vector> points;
  /// The evaluation at x_K that triggered the stop (converged runs only).
  std::optional<TraceRecord> final_evaluation;
  double final_mu{0.0};
  /// Inner solution at x_K when available.
  std::optional<SubproblemSolution> last_solution;
  std::string message;

  /// Trace rows followed by the final evaluation, with matching moduli.
  [[nodiscard]] std::vector<TraceRecord> monitored_rows() const;
  [[nodiscard]] std::vector<double> monitored_mu() const;
};

using Monitor = std::function<void(const TraceRecord&, const Vector&)>;

[[nodiscard]] RunResult run_mmp(ModelOracle& oracle, const Vector& x0, const StopCriteria& stop,
                                const std::vector<Monitor>& monitors = {});

/// F(x) = h(x, p(x)). Throws std::runtime_error when the inner solve fails.
[[nodiscard]] double value_function(const ModelOracle& oracle, const Vector& x);

/// Indices k violating F(x_k) + mu/2 ||x_k - x_{k+1}||^2 <= merit(x_k) + tol or
/// merit(x_k) <= F(x_{k-1}) + tol. The second inequality is only checked when
/// the penalty parameter is the same at k - 1 and k.
[[nodiscard]] std::vector<std::size_t> sandwich_check(std::span<const TraceRecord> trace,
                                                      std::span<const double> mu, double tol);

/// Indices k violating merit(x_k) >= merit(x_{k+1}) + mu/2 ||x_{k+1} - x_k||^2 - tol
/// (rows with a penalty change between k and k + 1 are skipped).
[[nodiscard]] std::vector<std::size_t> descent_check(std::span<const TraceRecord> trace,
                                                     std::span<const double> mu, double tol);

}  // namespace mmp_nlp
