// mmp_nlp: run the SQP methods on config files or builtin problems.
//
//   mmp_nlp run problem.cfg [--out DIR]
//   mmp_nlp run --builtin disk-quadratic --method esqm
//   mmp_nlp list
//   mmp_nlp suite [--out DIR] [--jobs N]

#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "mmp_nlp/builtins.hpp"
#include "mmp_nlp/config.hpp"
#include "mmp_nlp/runner.hpp"

namespace {

int run_command(const std::string& config_path, const std::string& builtin, const std::string& method,
                const std::optional<std::string>& out) {
  using namespace mmp_nlp;
  LoadedProblem loaded = [&]() {
    if (!config_path.empty()) {
      if (!builtin.empty()) throw ConfigError(0, "--builtin", "give either a config file or --builtin");
      LoadedProblem l = load_config(config_path);
      if (!method.empty()) {
        const auto m = parse_method(method);
        if (!m) throw ConfigError(0, "--method", fmt::format("unknown method '{}'", method));
        l.config.method = *m;
        check_compatibility(l);
      }
      return l;
    }
    if (builtin.empty()) throw ConfigError(0, "run", "a config file or --builtin is required");
    const Builtin* b = find_builtin(builtin);
    if (b == nullptr) throw ConfigError(0, "--builtin", fmt::format("unknown builtin '{}'", builtin));
    Method m = b->methods.front();
    if (!method.empty()) {
      const auto parsed = parse_method(method);
      if (!parsed) throw ConfigError(0, "--method", fmt::format("unknown method '{}'", method));
      m = *parsed;
    }
    LoadedProblem l = builtin_config(*b, m);
    check_compatibility(l);
    return l;
  }();

  const auto out_dir = resolve_output_dir(out, loaded.config.output_dir);
  const RunReport report = run_and_write(loaded, out_dir);
  const RunResult& run = report.result.run;
  fmt::print("{} [{}]: {} after {} iterations\n", report.name, method_name(report.method), to_string(run.status),
             run.trace.size());
  if (!run.message.empty()) fmt::print("  {}\n", run.message);
  if (!report.result.diagnostic.empty()) fmt::print("  {}\n", report.result.diagnostic);
  if (report.result.kkt)
    fmt::print("  kkt: stationarity {:.3e}, feasibility {:.3e}, complementarity {:.3e}\n",
               report.result.kkt->stationarity, report.result.kkt->feasibility, report.result.kkt->complementarity);
  fmt::print("  trace: {}\n  summary: {}\n", report.trace_path.string(), report.summary_path.string());
  return report.exit_code;
}

int suite_command(const std::optional<std::string>& out, int jobs) {
  using namespace mmp_nlp;
  const auto out_dir = resolve_output_dir(out, std::nullopt);
  const auto reports = run_suite(out_dir, jobs);
  int unexpected = 0;
  for (const RunReport& r : reports) {
    const Builtin* b = find_builtin(r.name);
    const bool as_expected = r.error.empty() && b != nullptr && r.result.run.status == b->expected_status;
    if (!as_expected) ++unexpected;
    fmt::print("{:<22} {:<9} {:<18} {:>6} {}\n", r.name, method_name(r.method),
               r.error.empty() ? to_string(r.result.run.status) : "Error", r.result.run.trace.size(),
               as_expected ? "" : (r.error.empty() ? "(unexpected)" : r.error));
  }
  fmt::print("{} runs, {} unexpected; summary in {}\n", reports.size(), unexpected,
             (out_dir / "suite_summary.csv").string());
  return unexpected == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moving balls, ESQM and Sl1QP on small polynomial programs"};
  app.require_subcommand(1);

  std::string config_path;
  std::string builtin;
  std::string method;
  std::optional<std::string> out;
  auto* run = app.add_subcommand("run", "Run one problem and write its trace and summary");
  run->add_option("config", config_path, "Config file");
  run->add_option("--builtin", builtin, "Builtin problem name (see `list`)");
  run->add_option("--method", method, "mb, esqm, sl1qp or gradproj");
  run->add_option("--out", out, "Output directory");

  app.add_subcommand("list", "List builtin problems");

  int jobs = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  std::optional<std::string> suite_out;
  auto* suite = app.add_subcommand("suite", "Run every builtin with every applicable method");
  suite->add_option("--out", suite_out, "Output directory");
  suite->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand("list")) {
      std::fputs(mmp_nlp::list_problems().c_str(), stdout);
      return 0;
    }
    if (app.got_subcommand("suite")) return suite_command(suite_out, jobs);
    return run_command(config_path, builtin, method, out);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
}
