#include "mmp_nlp/simple_set.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

namespace mmp_nlp {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_positive_dimension(Index n) {
  if (n <= 0) throw std::invalid_argument("set dimension must be positive");
}

}  // namespace

SimpleSet SimpleSet::whole_space(Index dimension) {
  require_positive_dimension(dimension);
  return SimpleSet(WholeSpace{dimension});
}

SimpleSet SimpleSet::box(Vector lower, Vector upper) {
  require_positive_dimension(lower.size());
  if (lower.size() != upper.size()) throw std::invalid_argument("box bounds differ in length");
  for (Index i = 0; i < lower.size(); ++i) {
    if (std::isnan(lower[i]) || std::isnan(upper[i]) || lower[i] > upper[i])
      throw std::invalid_argument(fmt::format("box needs lower <= upper (coordinate {})", i + 1));
    if (lower[i] == INFINITY || upper[i] == -INFINITY)
      throw std::invalid_argument("box coordinate is empty");
  }
  return SimpleSet(Box{std::move(lower), std::move(upper)});
}

SimpleSet SimpleSet::ball(Vector center, double radius) {
  require_positive_dimension(center.size());
  if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("ball radius must be positive");
  return SimpleSet(EuclideanBall{std::move(center), radius});
}

SimpleSet SimpleSet::simplex(Index dimension, double scale) {
  require_positive_dimension(dimension);
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("simplex scale must be positive");
  return SimpleSet(Simplex{dimension, scale});
}

SimpleSet SimpleSet::simplex_cap(Index dimension, double scale) {
  require_positive_dimension(dimension);
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("simplex cap scale must be positive");
  return SimpleSet(SimplexCap{dimension, scale});
}

SimpleSet SimpleSet::nonneg_orthant(Index dimension) {
  require_positive_dimension(dimension);
  return SimpleSet(NonnegOrthant{dimension});
}

Index SimpleSet::dimension() const {
  return std::visit(Overloaded{
                        [](const WholeSpace& s) { return s.dimension; },
                        [](const Box& s) { return s.lower.size(); },
                        [](const EuclideanBall& s) { return s.center.size(); },
                        [](const Simplex& s) { return s.dimension; },
                        [](const SimplexCap& s) { return s.dimension; },
                        [](const NonnegOrthant& s) { return s.dimension; },
                    },
                    set_);
}

std::string SimpleSet::name() const {
  switch (kind()) {
    case Kind::kWholeSpace: return "whole_space";
    case Kind::kBox: return "box";
    case Kind::kEuclideanBall: return "ball";
    case Kind::kSimplex: return "simplex";
    case Kind::kSimplexCap: return "simplex_cap";
    case Kind::kNonnegOrthant: return "nonneg_orthant";
  }
  return "unknown";
}

bool operator==(const SimpleSet& a, const SimpleSet& b) {
  if (a.kind() != b.kind()) return false;
  return std::visit(
      Overloaded{
          [&](const WholeSpace& s) { return s.dimension == std::get<WholeSpace>(b.set_).dimension; },
          [&](const Box& s) {
            const auto& o = std::get<Box>(b.set_);
            return s.lower == o.lower && s.upper == o.upper;
          },
          [&](const EuclideanBall& s) {
            const auto& o = std::get<EuclideanBall>(b.set_);
            return s.center == o.center && s.radius == o.radius;
          },
          [&](const Simplex& s) {
            const auto& o = std::get<Simplex>(b.set_);
            return s.dimension == o.dimension && s.scale == o.scale;
          },
          [&](const SimplexCap& s) {
            const auto& o = std::get<SimplexCap>(b.set_);
            return s.dimension == o.dimension && s.scale == o.scale;
          },
          [&](const NonnegOrthant& s) { return s.dimension == std::get<NonnegOrthant>(b.set_).dimension; },
      },
      a.set_);
}

Vector project_simplex(const Vector& z, double scale) {
  const Index n = z.size();
  std::vector<double> sorted(z.data(), z.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  // Largest k with sorted[k-1] - (sum_{j<k} sorted[j] - scale) / k > 0.
  double cumulative = 0.0;
  double threshold = 0.0;
  for (Index k = 1; k <= n; ++k) {
    cumulative += sorted[static_cast<std::size_t>(k - 1)];
    const double candidate = (cumulative - scale) / static_cast<double>(k);
    if (sorted[static_cast<std::size_t>(k - 1)] - candidate > 0.0) threshold = candidate;
  }
  return (z.array() - threshold).cwiseMax(0.0).matrix();
}

Vector project(const SimpleSet& q, const Vector& z) {
  if (z.size() != q.dimension())
    throw std::invalid_argument(
        fmt::format("point has dimension {}, set has {}", z.size(), q.dimension()));
  return std::visit(Overloaded{
                        [&](const WholeSpace&) -> Vector { return z; },
                        [&](const Box& s) -> Vector { return z.cwiseMax(s.lower).cwiseMin(s.upper); },
                        [&](const EuclideanBall& s) -> Vector {
                          const Vector offset = z - s.center;
                          const double norm = offset.norm();
                          if (norm <= s.radius) return z;
                          return s.center + (s.radius / norm) * offset;
                        },
                        [&](const Simplex& s) -> Vector { return project_simplex(z, s.scale); },
                        [&](const SimplexCap& s) -> Vector {
                          const Vector positive = z.cwiseMax(0.0);
                          if (positive.sum() <= s.scale) return positive;
                          return project_simplex(z, s.scale);
                        },
                        [&](const NonnegOrthant&) -> Vector { return z.cwiseMax(0.0); },
                    },
                    q.variant());
}

bool contains(const SimpleSet& q, const Vector& x, double tol) {
  if (tol < 0.0) throw std::invalid_argument("tolerance must be nonnegative");
  return (x - project(q, x)).norm() <= tol;
}

double stationarity_residual(const SimpleSet& q, const Vector& x, const Vector& v) {
  if (v.size() != x.size()) throw std::invalid_argument("vector dimension mismatch");
  if (!contains(q, x, 1e-9)) throw std::invalid_argument("stationarity residual needs x in Q");
  return (x - project(q, x - v)).norm();
}

}  // namespace mmp_nlp
