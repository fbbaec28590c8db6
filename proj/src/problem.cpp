#include "mmp_nlp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include <fmt/format.h>

namespace mmp_nlp {

SmoothFunction::SmoothFunction(Index dimension, ValueFn value, GradientFn gradient,
                               double lipschitz_grad)
    : dimension_(dimension),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      lipschitz_grad_(lipschitz_grad) {
  if (dimension <= 0) throw std::invalid_argument("function dimension must be positive");
  if (!(lipschitz_grad > 0.0) || !std::isfinite(lipschitz_grad))
    throw std::invalid_argument("gradient Lipschitz constant must be positive and finite");
}

SmoothFunction SmoothFunction::from_polynomial(Polynomial p, double lipschitz_grad) {
  auto gradient = grad_poly(p);
  const auto n = static_cast<Index>(p.dimension());
  SmoothFunction f(
      n, [p](const Vector& x) { return eval_poly(p, x); },
      [gradient = std::move(gradient)](const Vector& x) { return eval_gradient(gradient, x); },
      lipschitz_grad);
  f.provenance_ = Provenance::kParsedPolynomial;
  f.polynomial_ = std::move(p);
  return f;
}

SmoothFunction SmoothFunction::with_lipschitz(double lipschitz_grad) const {
  SmoothFunction copy = *this;
  if (!(lipschitz_grad > 0.0) || !std::isfinite(lipschitz_grad))
    throw std::invalid_argument("gradient Lipschitz constant must be positive and finite");
  copy.lipschitz_grad_ = lipschitz_grad;
  return copy;
}

NlpProblem::NlpProblem(SmoothFunction objective_in, std::vector<SmoothFunction> constraints_in,
                       SimpleSet simple_set_in)
    : objective(std::move(objective_in)),
      constraints(std::move(constraints_in)),
      simple_set(std::move(simple_set_in)) {
  const Index n = objective.dimension();
  if (simple_set.dimension() != n)
    throw std::invalid_argument(
        fmt::format("simple set has dimension {}, objective has {}", simple_set.dimension(), n));
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    if (constraints[i].dimension() != n)
      throw std::invalid_argument(fmt::format("constraint {} has dimension {}, expected {}", i + 1,
                                              constraints[i].dimension(), n));
  }
}

Vector NlpProblem::constraint_values(const Vector& x) const {
  Vector values(static_cast<Index>(constraints.size()));
  for (std::size_t i = 0; i < constraints.size(); ++i) values[static_cast<Index>(i)] = constraints[i](x);
  return values;
}

double NlpProblem::max_violation(const Vector& x) const {
  double worst = 0.0;
  for (const SmoothFunction& c : constraints) worst = std::max(worst, c(x));
  return worst;
}

double finite_diff_check(const SmoothFunction& f, const Vector& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite difference step must be positive");
  const Vector g = f.gradient(x);
  double worst = 0.0;
  Vector probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double forward = f(probe);
    probe[i] = x[i] - h;
    const double backward = f(probe);
    probe[i] = x[i];
    const double estimate = (forward - backward) / (2.0 * h);
    worst = std::max(worst, std::fabs(g[i] - estimate) / std::max(1.0, std::fabs(g[i])));
  }
  return worst;
}

}  // namespace mmp_nlp
