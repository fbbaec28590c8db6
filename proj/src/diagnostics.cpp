#include "mmp_nlp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/QR>

#include <fmt/format.h>

#include "mmp_nlp/simple_set.hpp"

namespace mmp_nlp {

double KktReport::max_residual() const { return std::max({stationarity, feasibility, complementarity}); }

KktReport kkt_residual(const NlpProblem& problem, const Vector& x, const Vector& lambda) {
  const auto m = static_cast<Index>(problem.num_constraints());
  if (x.size() != problem.dimension()) throw std::invalid_argument("point dimension mismatch");
  if (lambda.size() != m) throw std::invalid_argument("one multiplier per constraint is required");
  if (m > 0 && lambda.minCoeff() < 0.0) throw std::invalid_argument("multipliers must be nonnegative");

  KktReport report;
  report.multipliers = lambda;
  Vector v = problem.objective.gradient(x);
  for (Index i = 0; i < m; ++i) {
    const SmoothFunction& c = problem.constraints[static_cast<std::size_t>(i)];
    const double value = c(x);
    if (lambda[i] != 0.0) v += lambda[i] * c.gradient(x);
    report.feasibility = std::max(report.feasibility, value);
    report.complementarity = std::max(report.complementarity, std::fabs(lambda[i] * value));
  }
  report.stationarity = stationarity_residual(problem.simple_set, x, v);
  return report;
}

double hull_distance(const Matrix& g) {
  const Index m = g.rows();
  if (m == 0) return std::numeric_limits<double>::max();
  const Matrix gram = g * g.transpose();
  auto objective = [&](const Vector& u) { return u.dot(gram * u); };

  // Accelerated projected gradient on the simplex.
  Vector u = Vector::Constant(m, 1.0 / static_cast<double>(m));
  Vector u_prev = u;
  const double curvature = 2.0 * std::max(gram.trace(), 1e-300);
  double momentum = 1.0;
  for (int it = 0; it < 20000; ++it) {
    const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    const Vector v = u + ((momentum - 1.0) / next) * (u - u_prev);
    momentum = next;
    u_prev = u;
    u = project_simplex(v - (2.0 / curvature) * (gram * v), 1.0);
    if ((u - u_prev).lpNorm<Eigen::Infinity>() < 1e-15) break;
  }
  double best = objective(u);

  // Exact minimizer on the identified face: min u^T K u s.t. sum(u) = 1.
  std::vector<Index> support;
  for (Index i = 0; i < m; ++i)
    if (u[i] > 1e-9) support.push_back(i);
  const auto s = static_cast<Index>(support.size());
  if (s > 0) {
    Matrix kkt = Matrix::Zero(s + 1, s + 1);
    for (Index a = 0; a < s; ++a) {
      for (Index b = 0; b < s; ++b) kkt(a, b) = 2.0 * gram(support[a], support[b]);
      kkt(a, s) = 1.0;
      kkt(s, a) = 1.0;
    }
    Vector rhs = Vector::Zero(s + 1);
    rhs[s] = 1.0;
    const Vector sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    Vector polished = Vector::Zero(m);
    for (Index a = 0; a < s; ++a) polished[support[a]] = sol[a];
    if (sol.allFinite() && polished.minCoeff() >= 0.0 && std::fabs(polished.sum() - 1.0) < 1e-12) {
      const double value = objective(polished);
      if (value < best) best = value;
    }
  }
  return std::sqrt(std::max(best, 0.0));
}

MfqcReport check_mfqc(const NlpProblem& problem, const Vector& x, double active_tol) {
  if (!(active_tol >= 0.0)) throw std::invalid_argument("active tolerance must be nonnegative");
  MfqcReport report;
  report.partial = problem.simple_set.kind() != SimpleSet::Kind::kWholeSpace;
  std::vector<Vector> gradients;
  for (std::size_t i = 0; i < problem.num_constraints(); ++i) {
    const double value = problem.constraints[i](x);
    if (value > active_tol)
      throw std::invalid_argument(fmt::format("point violates constraint {} by {:.3e}", i + 1, value));
    if (std::fabs(value) <= active_tol) {
      report.active_set.push_back(i);
      gradients.push_back(problem.constraints[i].gradient(x));
    }
  }
  if (gradients.empty()) {
    report.hull_distance = std::numeric_limits<double>::max();
    report.satisfied = true;
    return report;
  }
  Matrix g(static_cast<Index>(gradients.size()), x.size());
  for (std::size_t i = 0; i < gradients.size(); ++i) g.row(static_cast<Index>(i)) = gradients[i].transpose();
  report.hull_distance = hull_distance(g);
  report.satisfied = report.hull_distance > kMfqcTolerance;
  return report;
}

const char* to_string(RateRegime regime) {
  switch (regime) {
    case RateRegime::kFiniteSteps: return "FiniteSteps";
    case RateRegime::kGeometric: return "Geometric";
    case RateRegime::kPower: return "Power";
    case RateRegime::kInconclusive: return "Inconclusive";
  }
  return "Unknown";
}

namespace {

struct LineFit {
  double slope{0.0};
  double r_squared{0.0};
};

LineFit least_squares(const std::vector<double>& t, const std::vector<double>& y) {
  const auto n = static_cast<double>(t.size());
  double mean_t = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    mean_t += t[i];
    mean_y += y[i];
  }
  mean_t /= n;
  mean_y /= n;
  double stt = 0.0;
  double sty = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    stt += (t[i] - mean_t) * (t[i] - mean_t);
    sty += (t[i] - mean_t) * (y[i] - mean_y);
    syy += (y[i] - mean_y) * (y[i] - mean_y);
  }
  LineFit fit;
  if (stt <= 0.0) return fit;
  fit.slope = sty / stt;
  fit.r_squared = syy > 0.0 ? std::clamp(sty * sty / (stt * syy), 0.0, 1.0) : 1.0;
  return fit;
}

}  // namespace

RateEstimate estimate_rate_from_distances(std::span<const double> d, double threshold, double noise_floor) {
  RateEstimate estimate;
  const std::size_t n = d.size();
  for (double value : d)
    if (!(value >= 0.0) || !std::isfinite(value)) throw std::invalid_argument("distances must be finite and >= 0");

  std::size_t trailing_zeros = 0;
  while (trailing_zeros < n && d[n - 1 - trailing_zeros] <= noise_floor) ++trailing_zeros;
  const auto finite_steps = [&] {
    estimate.regime = RateRegime::kFiniteSteps;
    estimate.fit_quality = 1.0;
    estimate.tail_start = n - trailing_zeros;
    return estimate;
  };
  if (trailing_zeros >= 2 && n < 10) return finite_steps();
  if (n < 10) throw std::invalid_argument(fmt::format("rate estimation needs at least 10 points, got {}", n));

  // Fit window: the second half of the points before the roundoff regime.
  std::size_t end = n - 3;
  while (end > 0 && d[end - 1] <= noise_floor) --end;
  estimate.tail_start = end / 2;
  std::vector<double> k;
  std::vector<double> log_k;
  std::vector<double> log_d;
  for (std::size_t i = estimate.tail_start; i < end; ++i) {
    if (d[i] <= noise_floor || i == 0) continue;
    k.push_back(static_cast<double>(i));
    log_k.push_back(std::log(static_cast<double>(i)));
    log_d.push_back(std::log(d[i]));
  }
  if (k.size() < 3) return trailing_zeros >= 2 ? finite_steps() : estimate;

  const LineFit geometric = least_squares(k, log_d);
  const LineFit power = least_squares(log_k, log_d);
  const bool geometric_ok = geometric.slope < 0.0 && geometric.r_squared >= threshold;
  const bool power_ok = power.slope < 0.0 && power.r_squared >= threshold;
  if (geometric_ok && (!power_ok || geometric.r_squared >= power.r_squared)) {
    estimate.regime = RateRegime::kGeometric;
    estimate.q = std::exp(geometric.slope);
    estimate.fit_quality = geometric.r_squared;
  } else if (power_ok) {
    estimate.regime = RateRegime::kPower;
    estimate.gamma = -power.slope;
    estimate.fit_quality = power.r_squared;
  } else {
    estimate.fit_quality = std::max(geometric.r_squared, power.r_squared);
  }
  return estimate;
}

RateEstimate estimate_rate(std::span<const Vector> points, const Vector& x_ref, double threshold) {
  std::vector<double> d;
  d.reserve(points.size());
  for (const Vector& p : points) {
    if (p.size() != x_ref.size()) throw std::invalid_argument("point dimension mismatch");
    d.push_back((p - x_ref).norm());
  }
  return estimate_rate_from_distances(d, threshold, kRoundoffLevel * std::max(1.0, x_ref.norm()));
}

namespace {

struct GridBest {
  Vector x;
  double value{std::numeric_limits<double>::infinity()};
};

// Scans the tensor grid lower + i * h, i = 0..resolution-1 per axis, in a fixed order.
void scan_grid(const NlpProblem& problem, const Vector& lower, const Vector& upper, int resolution,
               GridBest& best) {
  const Index n = lower.size();
  std::vector<int> index(static_cast<std::size_t>(n), 0);
  Vector point(n);
  const double steps = static_cast<double>(resolution - 1);
  for (;;) {
    for (Index j = 0; j < n; ++j) {
      const double t = resolution > 1 ? static_cast<double>(index[static_cast<std::size_t>(j)]) / steps : 0.5;
      point[j] = lower[j] + t * (upper[j] - lower[j]);
    }
    const Vector candidate = project(problem.simple_set, point);
    bool feasible = true;
    for (const SmoothFunction& c : problem.constraints) {
      if (c(candidate) > 0.0) {
        feasible = false;
        break;
      }
    }
    if (feasible) {
      const double value = problem.objective(candidate);
      if (value < best.value) {
        best.value = value;
        best.x = candidate;
      }
    }
    Index j = 0;
    while (j < n && ++index[static_cast<std::size_t>(j)] == resolution) index[static_cast<std::size_t>(j++)] = 0;
    if (j == n) break;
  }
}

}  // namespace

Vector oracle_solve(const NlpProblem& problem, const AxisBox& box, int resolution) {
  const Index n = problem.dimension();
  if (n > 3) throw std::invalid_argument("grid oracle supports at most 3 variables");
  if (box.dimension() != n) throw std::invalid_argument("search box dimension mismatch");
  if (resolution < 2) throw std::invalid_argument("grid resolution must be at least 2");
  if (!box.lower.allFinite() || !box.upper.allFinite() || (box.upper.array() < box.lower.array()).any())
    throw std::invalid_argument("search box must be bounded and nonempty");

  GridBest best;
  scan_grid(problem, box.lower, box.upper, resolution, best);
  if (!std::isfinite(best.value)) throw std::runtime_error("no feasible grid point found");

  const Vector spacing = (box.upper - box.lower) / static_cast<double>(resolution - 1);
  const Vector lower = (best.x - spacing).cwiseMax(box.lower);
  const Vector upper = (best.x + spacing).cwiseMin(box.upper);
  scan_grid(problem, lower, upper, resolution, best);
  return best.x;
}

}  // namespace mmp_nlp
