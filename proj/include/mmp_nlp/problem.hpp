#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mmp_nlp/poly.hpp"
#include "mmp_nlp/simple_set.hpp"
#include "mmp_nlp/types.hpp"

namespace mmp_nlp {

enum class Provenance { kParsedPolynomial, kBuiltin };

/// A C^2 function with a Lipschitz constant for its gradient.
class SmoothFunction {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&)>;

  SmoothFunction(Index dimension, ValueFn value, GradientFn gradient, double lipschitz_grad);

  /// Wraps a polynomial; the gradient is its exact formal derivative.
  static SmoothFunction from_polynomial(Polynomial p, double lipschitz_grad);

  [[nodiscard]] double operator()(const Vector& x) const { return value_(x); }
  [[nodiscard]] Vector gradient(const Vector& x) const { return gradient_(x); }
  [[nodiscard]] double lipschitz_grad() const noexcept { return lipschitz_grad_; }
  [[nodiscard]] Index dimension() const noexcept { return dimension_; }
  [[nodiscard]] Provenance provenance() const noexcept { return provenance_; }
  [[nodiscard]] const std::optional<Polynomial>& polynomial() const noexcept { return polynomial_; }

  /// Same function with a different Lipschitz constant.
  [[nodiscard]] SmoothFunction with_lipschitz(double lipschitz_grad) const;

 private:
  Index dimension_;
  ValueFn value_;
  GradientFn gradient_;
  double lipschitz_grad_;
  Provenance provenance_{Provenance::kBuiltin};
  std::optional<Polynomial> polynomial_;
};

/// min f(x) s.t. f_i(x) <= 0, i = 1..m, x in Q.
struct NlpProblem {
  NlpProblem(SmoothFunction objective, std::vector<SmoothFunction> constraints, SimpleSet simple_set);

  [[nodiscard]] Index dimension() const noexcept { return objective.dimension(); }
  [[nodiscard]] std::size_t num_constraints() const noexcept { return constraints.size(); }

  [[nodiscard]] Vector constraint_values(const Vector& x) const;
  /// max(0, f_1(x), ..., f_m(x))
  [[nodiscard]] double max_violation(const Vector& x) const;

  SmoothFunction objective;
  std::vector<SmoothFunction> constraints;
  SimpleSet simple_set;
};

/// Max over coordinates of |g_i - d_i| / max(1, |g_i|), where d is the central
/// difference estimate with step h.
[[nodiscard]] double finite_diff_check(const SmoothFunction& f, const Vector& x, double h);

}  // namespace mmp_nlp
