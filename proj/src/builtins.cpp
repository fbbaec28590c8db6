#include "mmp_nlp/builtins.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace mmp_nlp {

const char* to_string(BuiltinCategory category) {
  switch (category) {
    case BuiltinCategory::kFeasibleConvex: return "feasible-start convex";
    case BuiltinCategory::kNonconvex: return "nonconvex polynomial";
    case BuiltinCategory::kInfeasibleStart: return "infeasible-start";
    case BuiltinCategory::kUnbounded: return "unbounded";
    case BuiltinCategory::kDegenerate: return "degenerate";
  }
  return "unknown";
}

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double value : values) v[i++] = value;
  return v;
}

struct Recipe {
  std::string name;
  std::string description;
  BuiltinCategory category;
  std::size_t dimension;
  std::string objective;
  std::vector<std::string> constraints;
  std::optional<SimpleSet> q;
  double trust_half_width{10.0};
  std::optional<double> objective_lipschitz;
  std::vector<std::optional<double>> constraint_lipschitz;
  Vector x0;
  std::vector<Method> methods;
  RunStatus expected{RunStatus::kConverged};
  bool convex{false};
  bool penalty_qualified{false};
  std::optional<Vector> reference;
  double search_half_width{2.0};
};

SmoothFunction make_function(const std::string& text, std::size_t n, const AxisBox& box,
                             std::optional<double> override_lipschitz) {
  Polynomial p = parse_polynomial(text, n);
  const double lipschitz = override_lipschitz ? *override_lipschitz : lipschitz_grad_bound(p, box);
  return SmoothFunction::from_polynomial(std::move(p), lipschitz);
}

Builtin build(Recipe r) {
  const auto n = static_cast<Index>(r.dimension);
  AxisBox trust = AxisBox::symmetric(r.dimension, r.trust_half_width);
  if (r.q && r.q->kind() == SimpleSet::Kind::kBox) {
    const auto& box = std::get<Box>(r.q->variant());
    if (box.lower.allFinite() && box.upper.allFinite()) trust = AxisBox{box.lower, box.upper};
  }
  r.constraint_lipschitz.resize(r.constraints.size());
  std::vector<SmoothFunction> constraints;
  for (std::size_t i = 0; i < r.constraints.size(); ++i)
    constraints.push_back(make_function(r.constraints[i], r.dimension, trust, r.constraint_lipschitz[i]));
  NlpProblem problem(make_function(r.objective, r.dimension, trust, r.objective_lipschitz), std::move(constraints),
                     r.q ? *r.q : SimpleSet::whole_space(n));
  return Builtin{std::move(r.name),
                 std::move(r.description),
                 r.category,
                 std::move(problem),
                 std::move(r.objective),
                 std::move(r.constraints),
                 trust,
                 std::move(r.x0),
                 std::move(r.methods),
                 r.expected,
                 r.convex,
                 r.penalty_qualified,
                 std::move(r.reference),
                 AxisBox::symmetric(r.dimension, r.search_half_width)};
}

std::vector<Builtin> make_registry() {
  using M = Method;
  const std::vector<M> all{M::kMovingBalls, M::kEsqm, M::kSl1qp, M::kGradientProjection};
  const std::vector<M> sqp{M::kMovingBalls, M::kEsqm, M::kSl1qp};
  const std::vector<M> penalty{M::kEsqm, M::kSl1qp};
  const std::vector<M> on_q{M::kEsqm, M::kSl1qp, M::kGradientProjection};
  const double root5 = std::sqrt(5.0);
  const double r1025 = std::sqrt(10.25);

  std::vector<Builtin> registry;
  registry.push_back(build({"quadratic", "0.5||x||^2 without constraints", BuiltinCategory::kFeasibleConvex, 2,
                            "0.5*x1^2 + 0.5*x2^2", {}, std::nullopt, 10.0, std::nullopt, {}, vec({1.0, 1.0}),
                            all, RunStatus::kConverged, true, true, vec({0.0, 0.0})}));
  registry.push_back(build({"linear-unbounded", "-x1 without constraints", BuiltinCategory::kUnbounded, 2, "-x1",
                            {}, std::nullopt, 10.0, std::nullopt, {}, vec({0.0, 0.0}), all,
                            RunStatus::kDiverged, true, false, std::nullopt}));
  registry.push_back(build({"linear-over-halfline", "x1 subject to -x1 <= 0", BuiltinCategory::kFeasibleConvex, 1,
                            "x1", {"-x1"}, std::nullopt, 10.0, 1.0, {1.0}, vec({1.0}), sqp,
                            RunStatus::kConverged, true, true, vec({0.0})}));
  registry.push_back(build({"disk-quadratic", "distance to (2,1) over the unit disk",
                            BuiltinCategory::kFeasibleConvex, 2, "(x1 - 2)^2 + (x2 - 1)^2",
                            {"x1^2 + x2^2 - 1"}, std::nullopt, 10.0, std::nullopt, {}, vec({0.0, 0.0}), sqp,
                            RunStatus::kConverged, true, true, vec({2.0 / root5, 1.0 / root5})}));
  registry.push_back(build({"two-disks", "distance to (2,2) over two intersecting disks",
                            BuiltinCategory::kFeasibleConvex, 2, "(x1 - 2)^2 + (x2 - 2)^2",
                            {"x1^2 + x2^2 - 2", "(x1 + 0.5)^2 + x2^2 - 2.25"}, std::nullopt, 10.0,
                            std::nullopt, {}, vec({0.0, 0.0}), sqp, RunStatus::kConverged, true, true,
                            vec({-0.5 + 1.5 * 2.5 / r1025, 1.5 * 2.0 / r1025})}));
  registry.push_back(build({"clipped-quadratic", "distance to (3,-3) over the box [-1,1]^2",
                            BuiltinCategory::kFeasibleConvex, 2, "(x1 - 3)^2 + (x2 + 3)^2", {},
                            SimpleSet::box(vec({-1.0, -1.0}), vec({1.0, 1.0})), 10.0, std::nullopt, {},
                            vec({0.0, 0.0}), on_q, RunStatus::kConverged, true, true, vec({1.0, -1.0})}));
  registry.push_back(build({"quartic-box", "(x1^2 - x2)^2 + (x1 - 1)^2 over [-2,2]^2", BuiltinCategory::kNonconvex,
                            2, "(x1^2 - x2)^2 + (x1 - 1)^2", {},
                            SimpleSet::box(vec({-2.0, -2.0}), vec({2.0, 2.0})), 2.0, std::nullopt, {},
                            vec({-1.5, 1.5}), on_q, RunStatus::kConverged, false, true, vec({1.0, 1.0})}));
  registry.push_back(build({"quartic-disk", "(x1^2 - x2)^2 + (x1 - 1)^2 subject to ||x||^2 <= 1.5",
                            BuiltinCategory::kNonconvex, 2, "(x1^2 - x2)^2 + (x1 - 1)^2",
                            {"x1^2 + x2^2 - 1.5"}, std::nullopt, 2.0, std::nullopt, {}, vec({0.0, 0.0}), sqp,
                            RunStatus::kConverged, false, true, std::nullopt}));
  registry.push_back(build({"nonconvex-parabola", "distance to (0,2) below the parabola x2 = x1^2",
                            BuiltinCategory::kNonconvex, 2, "x1^2 + (x2 - 2)^2", {"x2 - x1^2"}, std::nullopt,
                            10.0, std::nullopt, {}, vec({1.0, 0.0}), sqp, RunStatus::kConverged, false, true,
                            vec({std::sqrt(1.5), 1.5})}));
  registry.push_back(build({"infeasible-halfplane", "distance to (-1,-1) over x1 + x2 >= 1",
                            BuiltinCategory::kInfeasibleStart, 2, "(x1 + 1)^2 + (x2 + 1)^2", {"1 - x1 - x2"},
                            std::nullopt, 10.0, std::nullopt, {}, vec({-1.0, -1.0}), penalty,
                            RunStatus::kConverged, true, true, vec({0.5, 0.5})}));
  registry.push_back(build({"infeasible-start-box", "distance to (3,3) over the disk of radius 2 within [0,3]^2",
                            BuiltinCategory::kInfeasibleStart, 2, "(x1 - 3)^2 + (x2 - 3)^2",
                            {"x1^2 + x2^2 - 4"}, SimpleSet::box(vec({0.0, 0.0}), vec({3.0, 3.0})), 10.0,
                            std::nullopt, {}, vec({3.0, 3.0}), penalty, RunStatus::kConverged, true, true,
                            vec({std::sqrt(2.0), std::sqrt(2.0)}), 3.0}));
  registry.push_back(build({"simplex-quadratic", "quadratic over the unit simplex with x1 <= 0.6",
                            BuiltinCategory::kFeasibleConvex, 3, "(x1 - 1)^2 + (x2 - 0.5)^2 + x3^2",
                            {"x1 - 0.6"}, SimpleSet::simplex(3, 1.0), 10.0, std::nullopt, {},
                            vec({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}), penalty, RunStatus::kConverged, true, true,
                            vec({0.6, 0.4, 0.0}), 1.0}));
  registry.push_back(build({"mfqc-violating", "two unit disks touching at the origin",
                            BuiltinCategory::kDegenerate, 2, "0.5*x1^2 + 0.5*(x2 - 1)^2",
                            {"(x1 - 1)^2 + x2^2 - 1", "(x1 + 1)^2 + x2^2 - 1"}, std::nullopt, 10.0,
                            std::nullopt, {}, vec({0.0, 0.0}), {M::kMovingBalls},
                            RunStatus::kSubproblemFailure, true, false, vec({0.0, 0.0})}));
  return registry;
}

}  // namespace

const std::vector<Builtin>& builtin_registry() {
  static const std::vector<Builtin> registry = make_registry();
  return registry;
}

const Builtin* find_builtin(std::string_view name) {
  for (const Builtin& b : builtin_registry())
    if (b.name == name) return &b;
  return nullptr;
}

std::string list_problems() {
  std::string out;
  for (const Builtin& b : builtin_registry()) {
    std::vector<std::string> methods;
    for (Method m : b.methods) methods.emplace_back(method_name(m));
    std::string reference = "-";
    if (b.reference_optimum) {
      std::vector<std::string> coords;
      for (Index i = 0; i < b.reference_optimum->size(); ++i) coords.push_back(fmt::format("{:.6g}", (*b.reference_optimum)[i]));
      reference = fmt::format("({})", fmt::join(coords, ", "));
    }
    out += fmt::format("{:<22} n={} m={} Q={:<11} x*={:<24} methods={} [{}]\n", b.name, b.problem.dimension(),
                       b.problem.num_constraints(), b.problem.simple_set.name(), reference, fmt::join(methods, ","),
                       to_string(b.category));
  }
  return out;
}

}  // namespace mmp_nlp
