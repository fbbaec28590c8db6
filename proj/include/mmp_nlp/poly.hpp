#pragma once

// Sparse multivariate polynomials over double coefficients.
//
// Expressions are written in the variables x1..xn with +, -, *, ^ (nonnegative
// integer powers), parentheses and integer/decimal literals. Parsed
// polynomials are kept in a canonical form: terms sorted by descending graded
// lexicographic order of their exponent maps, no duplicate exponent maps and no
// zero coefficients. Two polynomials are equal iff their canonical forms match.

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mmp_nlp/types.hpp"

namespace mmp_nlp {

/// Variable index (0-based) -> positive degree. Zero degrees are never stored.
using ExponentMap = std::map<std::size_t, unsigned>;

struct Monomial {
  double coefficient{0.0};
  ExponentMap exponents;

  [[nodiscard]] unsigned total_degree() const;
};

/// Strict weak order used for canonical term ordering: returns true when `a`
/// precedes `b` (higher total degree first, then lexicographic on x1, x2, ...).
[[nodiscard]] bool grlex_precedes(const ExponentMap& a, const ExponentMap& b);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, const std::string& message);

  /// Byte offset into the parsed text where the problem was detected.
  [[nodiscard]] std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class Polynomial {
 public:
  explicit Polynomial(std::size_t dimension);
  /// Builds a canonical polynomial from arbitrary terms (merges duplicates, drops zeros).
  Polynomial(std::size_t dimension, std::vector<Monomial> terms);

  static Polynomial constant(std::size_t dimension, double value);
  /// The polynomial x_{index+1}.
  static Polynomial variable(std::size_t dimension, std::size_t index);

  [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
  [[nodiscard]] const std::vector<Monomial>& terms() const noexcept { return terms_; }
  [[nodiscard]] bool is_zero() const noexcept { return terms_.empty(); }
  [[nodiscard]] unsigned degree() const;

  [[nodiscard]] double operator()(const Vector& x) const;

  /// Exact formal partial derivative with respect to variable `index`.
  [[nodiscard]] Polynomial derivative(std::size_t index) const;

  Polynomial operator-() const;
  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(double s, const Polynomial& p);
  [[nodiscard]] Polynomial pow(unsigned exponent) const;

  friend bool operator==(const Polynomial& a, const Polynomial& b);

  /// Text in the parser grammar; parse_polynomial(to_string()) reproduces *this exactly.
  [[nodiscard]] std::string to_string() const;

 private:
  void canonicalize();

  std::size_t dimension_;
  std::vector<Monomial> terms_;
};

/// Parses `text` into a canonical polynomial in `dimension` variables.
/// Throws ParseError carrying the byte offset of the offending input.
[[nodiscard]] Polynomial parse_polynomial(std::string_view text, std::size_t dimension);

/// Deterministic evaluation: terms are accumulated in canonical order.
[[nodiscard]] double eval_poly(const Polynomial& p, const Vector& x);

[[nodiscard]] std::vector<Polynomial> grad_poly(const Polynomial& p);

[[nodiscard]] Vector eval_gradient(const std::vector<Polynomial>& gradient, const Vector& x);

/// Axis-aligned box with finite bounds, used to certify Lipschitz constants.
struct AxisBox {
  Vector lower;
  Vector upper;

  [[nodiscard]] static AxisBox symmetric(std::size_t dimension, double half_width);
  [[nodiscard]] Index dimension() const { return lower.size(); }
};

/// Upper bound on sup_{x in box} ||Hessian p(x)||_2 via Gershgorin row sums of
/// coefficient-wise entry bounds. Returns kLipschitzFloor when that bound is 0.
[[nodiscard]] double lipschitz_grad_bound(const Polynomial& p, const AxisBox& box);

}  // namespace mmp_nlp
