#pragma once

// Registry of small test problems used by the CLI suite and the tests.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mmp_nlp/mmp.hpp"
#include "mmp_nlp/poly.hpp"
#include "mmp_nlp/problem.hpp"
#include "mmp_nlp/sqp.hpp"

namespace mmp_nlp {

enum class BuiltinCategory { kFeasibleConvex, kNonconvex, kInfeasibleStart, kUnbounded, kDegenerate };

[[nodiscard]] const char* to_string(BuiltinCategory category);

struct Builtin {
  std::string name;
  std::string description;
  BuiltinCategory category{BuiltinCategory::kFeasibleConvex};
  NlpProblem problem;
  /// Source text of the objective and constraints.
  std::string objective_text;
  std::vector<std::string> constraint_texts;
  /// Box on which the Lipschitz bounds were computed.
  AxisBox trust_box;
  Vector x0;
  std::vector<Method> methods;
  RunStatus expected_status{RunStatus::kConverged};
  bool convex{false};
  /// The penalty methods' qualification assumption holds (beta must stabilize).
  bool penalty_qualified{false};
  std::optional<Vector> reference_optimum;
  /// Bounded box for the grid oracle.
  AxisBox search_box;
};

[[nodiscard]] const std::vector<Builtin>& builtin_registry();
/// nullptr when no entry has this name.
[[nodiscard]] const Builtin* find_builtin(std::string_view name);

/// "name  n=.. m=.. Q=.. x*=(..)" per entry.
[[nodiscard]] std::string list_problems();

}  // namespace mmp_nlp
