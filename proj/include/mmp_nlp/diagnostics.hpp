#pragma once

// Independent checks of solver output: KKT residuals, the Mangasarian-Fromovitz
// condition, convergence-rate classification and a brute-force grid minimizer.

#include <span>
#include <string>
#include <vector>

#include "mmp_nlp/poly.hpp"
#include "mmp_nlp/problem.hpp"
#include "mmp_nlp/types.hpp"

namespace mmp_nlp {

struct KktReport {
  double stationarity{0.0};     ///< ||x - P_Q(x - v)||, v = grad f + sum lambda_i grad f_i
  double feasibility{0.0};      ///< max_i max(f_i(x), 0)
  double complementarity{0.0};  ///< max_i |lambda_i f_i(x)|
  Vector multipliers;

  [[nodiscard]] double max_residual() const;
};

/// Throws std::invalid_argument on negative multipliers or size mismatch.
[[nodiscard]] KktReport kkt_residual(const NlpProblem& problem, const Vector& x, const Vector& lambda);

struct MfqcReport {
  std::vector<std::size_t> active_set;  ///< 0-based constraint indices
  double hull_distance{0.0};            ///< distance from 0 to conv{grad f_i(x) : i active}
  bool satisfied{true};
  bool partial{false};  ///< Q is not the whole space; only the gradient hull was examined
};

inline constexpr double kMfqcTolerance = 1e-8;

/// Throws std::invalid_argument when some f_i(x) > active_tol.
[[nodiscard]] MfqcReport check_mfqc(const NlpProblem& problem, const Vector& x, double active_tol);

/// min over the unit simplex of ||G^T u||, G holding one gradient per row.
[[nodiscard]] double hull_distance(const Matrix& gradients);

enum class RateRegime { kFiniteSteps, kGeometric, kPower, kInconclusive };

[[nodiscard]] const char* to_string(RateRegime regime);

struct RateEstimate {
  RateRegime regime{RateRegime::kInconclusive};
  double q{0.0};      ///< geometric ratio (Geometric only)
  double gamma{0.0};  ///< power exponent (Power only)
  double fit_quality{0.0};
  std::size_t tail_start{0};
};

/// Relative distance below which iterates are treated as roundoff around x_ref.
inline constexpr double kRoundoffLevel = 1e-13;

/// Classifies d_k = ||x_k - x_ref||. A trace whose last two or more points sit
/// at or below the noise floor, with too few points above it to fit, is
/// FiniteSteps. Throws std::invalid_argument for other traces shorter than 10.
[[nodiscard]] RateEstimate estimate_rate(std::span<const Vector> points, const Vector& x_ref,
                                         double threshold = 0.9);
/// Distances at or below noise_floor are left out of the fit.
[[nodiscard]] RateEstimate estimate_rate_from_distances(std::span<const double> distances,
                                                        double threshold = 0.9, double noise_floor = 0.0);

/// Grid minimizer of f over {f_i <= 0} intersected with Q, searched on the box
/// (grid points are projected onto Q), followed by one finer pass around the
/// best point. Throws std::runtime_error when no grid point is feasible.
[[nodiscard]] Vector oracle_solve(const NlpProblem& problem, const AxisBox& box, int resolution);

}  // namespace mmp_nlp
