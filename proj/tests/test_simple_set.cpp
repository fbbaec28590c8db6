#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "mmp_nlp/simple_set.hpp"

using namespace mmp_nlp;

namespace {

Vector point(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

// Simplex projection by enumerating every support set: on the support the
// projection is z_i - t with t fixed by the sum, off it the entry is zero.
Vector brute_force_simplex(const Vector& z, double scale) {
  const Index n = z.size();
  Vector best;
  double best_dist = INFINITY;
  for (unsigned mask = 1; mask < (1U << n); ++mask) {
    double sum = 0.0;
    int count = 0;
    for (Index i = 0; i < n; ++i)
      if (mask & (1U << i)) {
        sum += z[i];
        ++count;
      }
    const double t = (sum - scale) / count;
    Vector u = Vector::Zero(n);
    bool ok = true;
    for (Index i = 0; i < n; ++i)
      if (mask & (1U << i)) {
        u[i] = z[i] - t;
        ok = ok && u[i] >= -1e-15;
      }
    if (!ok) continue;
    const double dist = (u - z).norm();
    if (dist < best_dist) {
      best_dist = dist;
      best = u;
    }
  }
  return best;
}

std::vector<SimpleSet> all_variants(Index n) {
  Vector lower = Vector::Constant(n, -1.0);
  Vector upper = Vector::Constant(n, 2.0);
  lower[0] = -INFINITY;
  return {SimpleSet::whole_space(n),        SimpleSet::box(lower, upper),
          SimpleSet::ball(Vector::Constant(n, 0.5), 1.5), SimpleSet::simplex(n, 2.0),
          SimpleSet::simplex_cap(n, 1.5),   SimpleSet::nonneg_orthant(n)};
}

}  // namespace

TEST_CASE("box projection clamps") {
  const SimpleSet box = SimpleSet::box(point({0.0, 0.0}), point({1.0, 1.0}));
  CHECK(project(box, point({2.0, -1.0})) == point({1.0, 0.0}));
}

TEST_CASE("whole space projection is the identity") {
  const Vector z = point({3.0, -4.5, 1e300});
  CHECK(project(SimpleSet::whole_space(3), z) == z);
}

TEST_CASE("simplex projection example") {
  const Vector p = project(SimpleSet::simplex(2, 1.0), point({1.0, 0.5}));
  CHECK(p[0] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK((brute_force_simplex(point({1.0, 0.5}), 1.0) - p).norm() <= 1e-15);
}

TEST_CASE("simplex projection agrees with support enumeration") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int trial = 0; trial < 500; ++trial) {
    const Index n = 1 + trial % 5;
    Vector z(n);
    for (Index i = 0; i < n; ++i) z[i] = normal(rng);
    const double scale = 0.5 + (trial % 7);
    CHECK((project_simplex(z, scale) - brute_force_simplex(z, scale)).norm() <= 1e-12);
  }
}

TEST_CASE("simplex cap keeps points below the cap") {
  const SimpleSet cap = SimpleSet::simplex_cap(3, 2.0);
  CHECK(project(cap, point({0.5, -1.0, 0.3})) == point({0.5, 0.0, 0.3}));
  const Vector p = project(cap, point({3.0, 1.0, -2.0}));
  CHECK(p.sum() == doctest::Approx(2.0));
  CHECK(p[0] == doctest::Approx(2.0));
  CHECK(p[1] == doctest::Approx(0.0));
}

TEST_CASE("ball and orthant projections") {
  const Vector p = project(SimpleSet::ball(point({0.0, 0.0}), 1.0), point({3.0, 4.0}));
  CHECK(p[0] == doctest::Approx(0.6));
  CHECK(p[1] == doctest::Approx(0.8));
  CHECK(project(SimpleSet::nonneg_orthant(3), point({-1.0, 2.0, 0.0})) == point({0.0, 2.0, 0.0}));
}

TEST_CASE("contains") {
  CHECK(contains(SimpleSet::box(point({0.0}), point({1.0})), point({0.5}), 0.0));
  CHECK_FALSE(contains(SimpleSet::ball(point({0.0, 0.0}), 1.0), point({2.0, 0.0}), 0.0));
  CHECK(contains(SimpleSet::simplex(2, 1.0), point({0.75, 0.25}), 1e-12));
  CHECK_FALSE(contains(SimpleSet::simplex(2, 1.0), point({0.75, 0.3}), 1e-12));
}

TEST_CASE("stationarity residual examples") {
  CHECK(stationarity_residual(SimpleSet::whole_space(2), point({5.0, 1.0}), point({3.0, 4.0})) == 5.0);
  CHECK(stationarity_residual(SimpleSet::box(point({0.0}), point({1.0})), point({1.0}), point({-3.0})) == 0.0);
  const SimpleSet ball = SimpleSet::ball(point({0.0, 0.0}), 1.0);
  // -v in the normal cone {t (1,0), t >= 0} at (1,0): residual 0; the opposite direction is not absorbed.
  CHECK(stationarity_residual(ball, point({1.0, 0.0}), point({-2.0, 0.0})) == 0.0);
  CHECK(stationarity_residual(ball, point({1.0, 0.0}), point({2.0, 0.0})) == doctest::Approx(2.0));
  // (1,0) - (0,1) = (1,-1) projects radially to (1,-1)/sqrt2.
  const double tangential = (point({1.0, 0.0}) - point({1.0, -1.0}) / std::sqrt(2.0)).norm();
  CHECK(stationarity_residual(ball, point({1.0, 0.0}), point({0.0, 1.0})) == doctest::Approx(tangential));
  CHECK_THROWS_AS((void)stationarity_residual(ball, point({2.0, 0.0}), point({0.0, 0.0})), std::invalid_argument);
}

TEST_CASE("a zero direction is stationary everywhere in Q") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (const SimpleSet& q : all_variants(3)) {
    for (int trial = 0; trial < 100; ++trial) {
      Vector z(3);
      for (Index i = 0; i < 3; ++i) z[i] = normal(rng);
      CHECK(stationarity_residual(q, project(q, z), Vector::Zero(3)) <= 1e-15);
    }
  }
}

TEST_CASE("projection properties on random pairs") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (const SimpleSet& q : all_variants(3)) {
    CAPTURE(q.name());
    double worst_idem = 0.0;
    double worst_expansion = -INFINITY;
    double worst_vi = -INFINITY;
    for (int trial = 0; trial < 2000; ++trial) {
      Vector a(3);
      Vector b(3);
      Vector c(3);
      for (Index i = 0; i < 3; ++i) {
        a[i] = normal(rng);
        b[i] = normal(rng);
        c[i] = normal(rng);
      }
      const Vector pa = project(q, a);
      const Vector pb = project(q, b);
      const Vector w = project(q, c);
      worst_idem = std::max(worst_idem, (project(q, pa) - pa).norm());
      worst_expansion = std::max(worst_expansion, (pa - pb).norm() - (a - b).norm());
      worst_vi = std::max(worst_vi, (a - pa).dot(w - pa));
    }
    CHECK(worst_idem <= 1e-12);
    CHECK(worst_expansion <= 1e-12);
    CHECK(worst_vi <= 1e-10);
  }
}

TEST_CASE("constructor validation") {
  CHECK_THROWS_AS((void)SimpleSet::box(point({1.0}), point({0.0})), std::invalid_argument);
  CHECK_THROWS_AS((void)SimpleSet::ball(point({0.0}), 0.0), std::invalid_argument);
  CHECK_THROWS_AS((void)SimpleSet::simplex(2, -1.0), std::invalid_argument);
  CHECK_THROWS_AS((void)SimpleSet::simplex_cap(2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS((void)project(SimpleSet::whole_space(2), point({1.0})), std::invalid_argument);
}
