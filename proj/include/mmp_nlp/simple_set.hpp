#pragma once

// Closed convex sets with closed-form Euclidean projections.

#include <string>
#include <variant>

#include "mmp_nlp/types.hpp"

namespace mmp_nlp {

struct WholeSpace {
  Index dimension{0};
};

/// Coordinatewise bounds; infinite bounds are allowed.
struct Box {
  Vector lower;
  Vector upper;
};

struct EuclideanBall {
  Vector center;
  double radius{1.0};
};

/// {u >= 0, sum(u) = scale}
struct Simplex {
  Index dimension{0};
  double scale{1.0};
};

/// {u >= 0, sum(u) <= scale}
struct SimplexCap {
  Index dimension{0};
  double scale{1.0};
};

struct NonnegOrthant {
  Index dimension{0};
};

class SimpleSet {
 public:
  using Variant = std::variant<WholeSpace, Box, EuclideanBall, Simplex, SimplexCap, NonnegOrthant>;

  enum class Kind { kWholeSpace, kBox, kEuclideanBall, kSimplex, kSimplexCap, kNonnegOrthant };

  static SimpleSet whole_space(Index dimension);
  static SimpleSet box(Vector lower, Vector upper);
  static SimpleSet ball(Vector center, double radius);
  static SimpleSet simplex(Index dimension, double scale);
  static SimpleSet simplex_cap(Index dimension, double scale);
  static SimpleSet nonneg_orthant(Index dimension);

  [[nodiscard]] Kind kind() const noexcept { return static_cast<Kind>(set_.index()); }
  [[nodiscard]] Index dimension() const;
  [[nodiscard]] const Variant& variant() const noexcept { return set_; }

  /// Variant name as used in config files: whole_space, box, ball, simplex, simplex_cap, nonneg_orthant.
  [[nodiscard]] std::string name() const;

  friend bool operator==(const SimpleSet& a, const SimpleSet& b);

 private:
  explicit SimpleSet(Variant set) : set_(std::move(set)) {}
  Variant set_;
};

[[nodiscard]] Vector project(const SimpleSet& q, const Vector& z);

/// True iff dist(x, Q) <= tol.
[[nodiscard]] bool contains(const SimpleSet& q, const Vector& x, double tol);

/// ||x - P_Q(x - v)||; zero iff -v lies in the normal cone of Q at x.
/// Throws std::invalid_argument when x is farther than 1e-9 from Q.
[[nodiscard]] double stationarity_residual(const SimpleSet& q, const Vector& x, const Vector& v);

/// Projection of z onto {u >= 0, sum(u) = scale} by the sorting threshold rule.
[[nodiscard]] Vector project_simplex(const Vector& z, double scale);

}  // namespace mmp_nlp
