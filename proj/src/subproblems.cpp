#include "mmp_nlp/subproblems.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include <fmt/format.h>

namespace mmp_nlp {

namespace {

/// Concave dual with a projection onto its feasible set and a primal-dual
/// residual used as the stopping test.
struct DualProblem {
  std::function<double(const Vector& u, Vector& gradient)> value;
  std::function<Vector(const Vector& u)> project;
  std::function<double(const Vector& u)> residual;
  double initial_step{1.0};
  double multiplier_cap{INFINITY};
};

enum class DualOutcome { kConverged, kCapExceeded, kMaxIters };

struct DualResult {
  Vector u;
  int iterations{0};
  DualOutcome outcome{DualOutcome::kMaxIters};
};

// Accelerated projected gradient ascent with backtracking and function-value
// restart. The step is allowed to grow after each accepted iteration.
DualResult maximize_dual(const DualProblem& dual, Vector u0, double eps, int max_iters) {
  DualResult out;
  Vector u = dual.project(u0);
  Vector grad_u;
  double value_u = dual.value(u, grad_u);
  double residual_u = dual.residual(u);
  if (residual_u <= eps) {
    out.u = std::move(u);
    out.outcome = DualOutcome::kConverged;
    return out;
  }
  // Once the certificate meets eps, keep iterating toward eps / 100 for as many
  // iterations again, and return the best certified point.
  const double polish = 1e-2 * eps;
  int polish_until = -1;
  Vector best;
  double best_residual = INFINITY;

  double step = dual.initial_step;
  double momentum = 1.0;
  Vector v = u;
  Vector grad_v = grad_u;
  double value_v = value_u;
  Vector u_prev = u;
  Vector grad_trial;

  for (int it = 1; it <= max_iters; ++it) {
    out.iterations = it;
    Vector trial;
    double value_trial = 0.0;
    for (;;) {
      trial = dual.project(v + step * grad_v);
      value_trial = dual.value(trial, grad_trial);
      const Vector diff = trial - v;
      const double slop = 1e-15 * (1.0 + std::fabs(value_v));
      if (value_trial >= value_v + grad_v.dot(diff) - diff.squaredNorm() / (2.0 * step) - slop) break;
      step *= 0.5;
      if (step < 1e-300) break;
    }

    if (value_trial < value_u - 1e-15 * (1.0 + std::fabs(value_u)) && momentum > 1.0) {
      // Momentum overshot: restart from the last iterate.
      momentum = 1.0;
      v = u;
      grad_v = grad_u;
      value_v = value_u;
      continue;
    }

    u_prev = u;
    u = trial;
    grad_u = grad_trial;
    value_u = value_trial;

    residual_u = dual.residual(u);
    if (residual_u <= eps) {
      if (polish_until < 0) polish_until = std::min(max_iters, 2 * it + 10);
      if (residual_u < best_residual) {
        best_residual = residual_u;
        best = u;
      }
      if (residual_u <= polish || it >= polish_until) {
        out.outcome = DualOutcome::kConverged;
        break;
      }
    }
    if (polish_until < 0 && u.size() > 0 && u.maxCoeff() > dual.multiplier_cap) {
      out.outcome = DualOutcome::kCapExceeded;
      break;
    }

    const double momentum_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    const double weight = (momentum - 1.0) / momentum_next;
    momentum = momentum_next;
    v = dual.project(u + weight * (u - u_prev));
    value_v = dual.value(v, grad_v);
    step *= 1.25;
  }
  if (polish_until >= 0) {
    out.outcome = DualOutcome::kConverged;
    out.u = std::move(best);
    return out;
  }
  out.u = std::move(u);
  return out;
}

Matrix gradient_matrix(const std::vector<LinearizedConstraint>& constraints, Index n) {
  Matrix g(static_cast<Index>(constraints.size()), n);
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    if (constraints[i].gradient.size() != n)
      throw std::invalid_argument("constraint gradient dimension mismatch");
    g.row(static_cast<Index>(i)) = constraints[i].gradient.transpose();
  }
  return g;
}

Vector constraint_values(const std::vector<LinearizedConstraint>& constraints) {
  Vector c(static_cast<Index>(constraints.size()));
  for (std::size_t i = 0; i < constraints.size(); ++i) c[static_cast<Index>(i)] = constraints[i].value;
  return c;
}

void check_common(const Vector& x, const Vector& g0) {
  if (x.size() == 0) throw std::invalid_argument("subproblem needs a nonempty point");
  if (g0.size() != x.size()) throw std::invalid_argument("objective gradient dimension mismatch");
}

// Primal recovery for the penalty subproblems.
Vector penalty_primal(const PenaltySubproblem& p, const Matrix& g, const Vector& u) {
  Vector w = p.g0;
  if (u.size() > 0) w.noalias() += g.transpose() * u;
  return project(p.q, p.x - w / p.mu);
}

Vector penalty_slack(PenaltyKind kind, const Vector& lin) {
  if (kind == PenaltyKind::kLinf) {
    const double s = lin.size() > 0 ? std::max(0.0, lin.maxCoeff()) : 0.0;
    return Vector::Constant(1, s);
  }
  return lin.cwiseMax(0.0);
}

SubproblemSolution solve_penalty(const PenaltySubproblem& p, PenaltyKind kind,
                                 const SubproblemOptions& options) {
  check_common(p.x, p.g0);
  if (!(p.beta > 0.0) || !(p.mu > 0.0)) throw std::invalid_argument("penalty subproblem needs beta, mu > 0");
  if (p.q.dimension() != p.x.size()) throw std::invalid_argument("simple set dimension mismatch");
  const Index n = p.x.size();
  const auto m = static_cast<Index>(p.constraints.size());
  const Matrix g = gradient_matrix(p.constraints, n);
  const Vector c = constraint_values(p.constraints);

  SubproblemSolution sol;
  if (m == 0) {
    sol.y = project(p.q, p.x - p.g0 / p.mu);
    sol.u = Vector(0);
    sol.slack = kind == PenaltyKind::kLinf ? Vector::Zero(1) : Vector(0);
    sol.pd_residual = subproblem_kkt_residual(sol, p, kind);
    sol.status = SubproblemStatus::kSolved;
    return sol;
  }

  auto lin_at = [&](const Vector& y) -> Vector { return c + g * (y - p.x); };

  auto assemble = [&](const Vector& u) {
    SubproblemSolution s;
    s.u = u;
    s.y = penalty_primal(p, g, u);
    s.slack = penalty_slack(kind, lin_at(s.y));
    s.pd_residual = subproblem_kkt_residual(s, p, kind);
    return s;
  };

  DualProblem dual;
  dual.value = [&](const Vector& u, Vector& grad) {
    const Vector y = penalty_primal(p, g, u);
    const Vector d = y - p.x;
    grad = lin_at(y);
    return p.g0.dot(d) + u.dot(grad) + 0.5 * p.mu * d.squaredNorm();
  };
  const SimpleSet dual_set = kind == PenaltyKind::kLinf
                                 ? SimpleSet::simplex_cap(m, p.beta)
                                 : SimpleSet::box(Vector::Zero(m), Vector::Constant(m, p.beta));
  dual.project = [&](const Vector& u) { return project(dual_set, u); };
  dual.residual = [&](const Vector& u) { return assemble(u).pd_residual; };
  const double dual_lipschitz = g.squaredNorm() / p.mu;
  dual.initial_step = dual_lipschitz > 0.0 ? 1.0 / dual_lipschitz : 1.0;

  Vector u0 = options.initial_duals.value_or(Vector::Zero(m));
  if (u0.size() != m) throw std::invalid_argument("initial duals have the wrong length");
  const DualResult result = maximize_dual(dual, std::move(u0), options.eps_sub, options.max_inner_iters);

  sol = assemble(result.u);
  sol.iterations = result.iterations;
  if (result.outcome == DualOutcome::kConverged) {
    sol.status = SubproblemStatus::kSolved;
  } else {
    sol.status = SubproblemStatus::kMaxInnerIters;
    sol.message = fmt::format("inner solve stopped after {} iterations with residual {:.3e}",
                              result.iterations, sol.pd_residual);
  }
  return sol;
}

}  // namespace

BallData make_ball(const Vector& x, const LinearizedConstraint& c, double weight) {
  if (!(weight > 0.0)) throw std::invalid_argument("ball weight must be positive");
  BallData ball;
  ball.center = x - c.gradient / weight;
  ball.squared_radius = c.gradient.squaredNorm() / (weight * weight) - 2.0 * c.value / weight;
  ball.weight = weight;
  return ball;
}

const char* to_string(SubproblemStatus status) {
  switch (status) {
    case SubproblemStatus::kSolved: return "solved";
    case SubproblemStatus::kInfeasible: return "infeasible";
    case SubproblemStatus::kMaxInnerIters: return "max_inner_iters";
  }
  return "unknown";
}

double BallSubproblem::model(const Vector& y) const {
  const Vector d = y - x;
  return g0.dot(d) + 0.5 * lipschitz * d.squaredNorm();
}

double BallSubproblem::constraint(std::size_t i, const Vector& y) const {
  const Vector d = y - x;
  return constraints[i].value + constraints[i].gradient.dot(d) +
         0.5 * weights[static_cast<Index>(i)] * d.squaredNorm();
}

double PenaltySubproblem::model(PenaltyKind kind, const Vector& y) const {
  const Vector d = y - x;
  double penalty = 0.0;
  for (const LinearizedConstraint& c : constraints) {
    const double v = c.at(x, y);
    penalty = kind == PenaltyKind::kLinf ? std::max(penalty, v) : penalty + std::max(0.0, v);
  }
  return g0.dot(d) + beta * penalty + 0.5 * mu * d.squaredNorm();
}

SubproblemSolution mb_subproblem(const BallSubproblem& p, const SubproblemOptions& options) {
  check_common(p.x, p.g0);
  if (!(p.lipschitz > 0.0)) throw std::invalid_argument("moving balls needs L > 0");
  const auto m = static_cast<Index>(p.constraints.size());
  if (p.weights.size() != m) throw std::invalid_argument("one weight per constraint is required");
  if (m > 0 && !(p.weights.array() > 0.0).all()) throw std::invalid_argument("weights L_i must be positive");
  const Index n = p.x.size();
  const Matrix g = gradient_matrix(p.constraints, n);

  SubproblemSolution sol;
  sol.slack = Vector(0);
  for (Index i = 0; i < m; ++i) {
    const BallData ball = make_ball(p.x, p.constraints[static_cast<std::size_t>(i)], p.weights[i]);
    if (ball.squared_radius < -options.infeasibility_tol) {
      sol.y = p.x;
      sol.u = Vector::Zero(m);
      sol.status = SubproblemStatus::kInfeasible;
      sol.pd_residual = INFINITY;
      sol.message = fmt::format("ball {} is empty (squared radius {:.3e})", i + 1, ball.squared_radius);
      return sol;
    }
  }

  // y(u) = x - (g0 + G^T u) / (L + sum_i u_i L_i)
  auto primal = [&](const Vector& u) -> Vector {
    Vector w = p.g0;
    double denom = p.lipschitz;
    if (m > 0) {
      w.noalias() += g.transpose() * u;
      denom += u.dot(p.weights);
    }
    return p.x - w / denom;
  };
  auto assemble = [&](const Vector& u) {
    SubproblemSolution s;
    s.u = u;
    s.y = primal(u);
    s.slack = Vector(0);
    s.pd_residual = subproblem_kkt_residual(s, p);
    return s;
  };

  if (m == 0) {
    sol = assemble(Vector(0));
    sol.status = SubproblemStatus::kSolved;
    return sol;
  }

  DualProblem dual;
  dual.value = [&](const Vector& u, Vector& grad) {
    const Vector y = primal(u);
    grad.resize(m);
    for (Index i = 0; i < m; ++i) grad[i] = p.constraint(static_cast<std::size_t>(i), y);
    return p.model(y) + u.dot(grad);
  };
  dual.project = [](const Vector& u) -> Vector { return u.cwiseMax(0.0); };
  dual.residual = [&](const Vector& u) { return assemble(u).pd_residual; };
  dual.multiplier_cap = options.multiplier_cap;
  // ||y(u) - x|| <= R for every u >= 0, which bounds the dual curvature.
  double radius = p.g0.norm() / p.lipschitz;
  double max_ratio = 0.0;
  for (Index i = 0; i < m; ++i) max_ratio = std::max(max_ratio, g.row(i).norm() / p.weights[i]);
  radius += max_ratio;
  double dual_lipschitz = 0.0;
  for (Index i = 0; i < m; ++i) dual_lipschitz += std::pow(g.row(i).norm() + p.weights[i] * radius, 2);
  dual_lipschitz /= p.lipschitz;
  dual.initial_step = dual_lipschitz > 0.0 ? 1.0 / dual_lipschitz : 1.0;

  Vector u0 = options.initial_duals.value_or(Vector::Zero(m));
  if (u0.size() != m) throw std::invalid_argument("initial duals have the wrong length");
  const DualResult result = maximize_dual(dual, std::move(u0), options.eps_sub, options.max_inner_iters);

  sol = assemble(result.u);
  sol.iterations = result.iterations;
  switch (result.outcome) {
    case DualOutcome::kConverged:
      sol.status = SubproblemStatus::kSolved;
      break;
    case DualOutcome::kCapExceeded:
      sol.status = SubproblemStatus::kInfeasible;
      sol.message = fmt::format("multiplier exceeded cap {:.1e}; constraint qualification suspected to fail",
                                options.multiplier_cap);
      break;
    case DualOutcome::kMaxIters:
      sol.status = SubproblemStatus::kMaxInnerIters;
      sol.message = fmt::format("inner solve stopped after {} iterations with residual {:.3e}",
                                result.iterations, sol.pd_residual);
      break;
  }
  return sol;
}

SubproblemSolution esqm_subproblem(const PenaltySubproblem& problem, const SubproblemOptions& options) {
  return solve_penalty(problem, PenaltyKind::kLinf, options);
}

SubproblemSolution sl1qp_subproblem(const PenaltySubproblem& problem, const SubproblemOptions& options) {
  return solve_penalty(problem, PenaltyKind::kL1, options);
}

double subproblem_kkt_residual(const SubproblemSolution& s, const BallSubproblem& p) {
  const auto m = static_cast<Index>(p.constraints.size());
  if (s.u.size() != m) throw std::invalid_argument("multiplier count mismatch");
  const Vector d = s.y - p.x;
  Vector stationarity = p.g0 + p.lipschitz * d;
  double residual = 0.0;
  for (Index i = 0; i < m; ++i) {
    const auto& c = p.constraints[static_cast<std::size_t>(i)];
    stationarity += s.u[i] * (c.gradient + p.weights[i] * d);
    const double value = p.constraint(static_cast<std::size_t>(i), s.y);
    residual = std::max({residual, value, -s.u[i], std::fabs(s.u[i] * value)});
  }
  return std::max(residual, stationarity.norm());
}

double subproblem_kkt_residual(const SubproblemSolution& s, const PenaltySubproblem& p, PenaltyKind kind) {
  const auto m = static_cast<Index>(p.constraints.size());
  if (s.u.size() != m) throw std::invalid_argument("multiplier count mismatch");
  const Index expected_slack = kind == PenaltyKind::kLinf ? 1 : m;
  if (s.slack.size() != expected_slack) throw std::invalid_argument("slack size mismatch");

  Vector v = p.g0 + p.mu * (s.y - p.x);
  for (Index i = 0; i < m; ++i) v += s.u[i] * p.constraints[static_cast<std::size_t>(i)].gradient;
  double residual = (s.y - project(p.q, s.y - v)).norm();
  residual = std::max(residual, (s.y - project(p.q, s.y)).norm());

  if (kind == PenaltyKind::kLinf) {
    const double slack = s.slack[0];
    const double slack_dual = p.beta - s.u.sum();
    residual = std::max({residual, -slack, -slack_dual, std::fabs(slack_dual * slack)});
    for (Index i = 0; i < m; ++i) {
      const double gap = slack - p.constraints[static_cast<std::size_t>(i)].at(p.x, s.y);
      residual = std::max({residual, -gap, -s.u[i], std::fabs(s.u[i] * gap)});
    }
  } else {
    for (Index i = 0; i < m; ++i) {
      const double slack = s.slack[i];
      const double gap = slack - p.constraints[static_cast<std::size_t>(i)].at(p.x, s.y);
      const double slack_dual = p.beta - s.u[i];
      residual = std::max({residual, -gap, -slack, -s.u[i], -slack_dual, std::fabs(s.u[i] * gap),
                           std::fabs(slack_dual * slack)});
    }
  }
  return residual;
}

}  // namespace mmp_nlp
