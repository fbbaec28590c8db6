#pragma once

// Flat `key = value` run configuration files.
//
//   name = disk
//   dimension = 2
//   objective = (x1 - 2)^2 + (x2 - 1)^2
//   constraint.1 = x1^2 + x2^2 - 1
//   q_set = whole_space
//   method = esqm
//   x0 = 0 0
//
// Lines starting with # and trailing # comments are ignored.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "mmp_nlp/builtins.hpp"
#include "mmp_nlp/mmp.hpp"
#include "mmp_nlp/poly.hpp"
#include "mmp_nlp/problem.hpp"
#include "mmp_nlp/sqp.hpp"

namespace mmp_nlp {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, std::string key, const std::string& message);

  [[nodiscard]] std::size_t line() const noexcept { return line_; }  ///< 1-based; 0 when not tied to a line
  [[nodiscard]] const std::string& key() const noexcept { return key_; }

 private:
  std::size_t line_;
  std::string key_;
};

struct RunConfig {
  std::string name{"problem"};
  std::optional<std::string> builtin;
  Method method{Method::kMovingBalls};
  Vector x0;
  double beta0{1.0};
  double delta{1.0};
  std::optional<double> lambda;
  std::optional<double> lambda_prime;
  StopCriteria stop;
  SubproblemOptions subproblem;
  double feas_tol{1e-9};
  std::uint64_t seed{0};
  std::optional<std::string> output_dir;
  double rate_fit_threshold{0.9};
};

struct LoadedProblem {
  RunConfig config;
  NlpProblem problem;
  AxisBox trust_box;
};

[[nodiscard]] LoadedProblem parse_config(std::string_view text);
/// Throws ConfigError (also for unreadable files).
[[nodiscard]] LoadedProblem load_config(const std::filesystem::path& path);
/// The registry entry run with default parameters.
[[nodiscard]] LoadedProblem builtin_config(const Builtin& builtin, Method method);

/// Rejects method/problem combinations that the method does not cover.
void check_compatibility(const LoadedProblem& loaded);

}  // namespace mmp_nlp
