#pragma once

// Executes configured runs and writes trace CSV and JSON summary files.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mmp_nlp/config.hpp"
#include "mmp_nlp/diagnostics.hpp"
#include "mmp_nlp/sqp.hpp"

namespace mmp_nlp {

inline constexpr const char* kTraceHeader =
    "k,merit,f,F,step_norm,beta,max_constraint_violation,subproblem_iters,kkt_stationarity";

/// 0 Converged, 2 Diverged, 3 MaxIters, 4 SubproblemFailure.
[[nodiscard]] int exit_code(RunStatus status);

[[nodiscard]] MethodRun execute(const LoadedProblem& loaded);

/// Header plus one row per trace record, numbers printed with 17 significant digits.
[[nodiscard]] std::string trace_csv(const RunResult& run);

/// Rate of the iterates towards the final point; empty when the trace is too short.
[[nodiscard]] std::optional<RateEstimate> run_rate(const MethodRun& result, double threshold);

[[nodiscard]] std::string summary_json(const LoadedProblem& loaded, const MethodRun& result);

struct RunReport {
  std::string name;
  Method method{Method::kMovingBalls};
  MethodRun result;
  int exit_code{0};
  std::filesystem::path trace_path;
  std::filesystem::path summary_path;
  std::string error;  ///< set when the run could not start (exit code 1)
};

/// Runs and writes <out>/<name>.<method>.trace.csv and .summary.json.
[[nodiscard]] RunReport run_and_write(const LoadedProblem& loaded, const std::filesystem::path& out_dir);

/// --out, then MMP_NLP_OUT, then the config's output_dir, then ./mmp_out.
[[nodiscard]] std::filesystem::path resolve_output_dir(const std::optional<std::string>& cli_out,
                                                       const std::optional<std::string>& config_out);

/// Every builtin with every applicable method, `jobs` runs at a time. Reports
/// come back in registry order and suite_summary.csv is written to out_dir.
[[nodiscard]] std::vector<RunReport> run_suite(const std::filesystem::path& out_dir, int jobs);

}  // namespace mmp_nlp
