#include "mmp_nlp/runner.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

namespace mmp_nlp {

using nlohmann::json;

int exit_code(RunStatus status) {
  switch (status) {
    case RunStatus::kConverged: return 0;
    case RunStatus::kDiverged: return 2;
    case RunStatus::kMaxIters: return 3;
    case RunStatus::kSubproblemFailure: return 4;
  }
  return 1;
}

namespace {

PenaltyConfig penalty_config(const LoadedProblem& loaded) {
  const RunConfig& c = loaded.config;
  PenaltyConfig config(loaded.problem, c.method == Method::kEsqm ? PenaltyKind::kLinf : PenaltyKind::kL1);
  config.beta0 = c.beta0;
  config.delta = c.delta;
  if (c.lambda) config.lambda = *c.lambda;
  if (c.lambda_prime) config.lambda_prime = *c.lambda_prime;
  config.subproblem = c.subproblem;
  config.stop = c.stop;
  config.feas_tol = c.feas_tol;
  config.validate();
  return config;
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vector_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(number_or_null(v[i]));
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << content;
  if (!out) throw std::runtime_error(fmt::format("error writing {}", path.string()));
}

}  // namespace

MethodRun execute(const LoadedProblem& loaded) {
  check_compatibility(loaded);
  const RunConfig& c = loaded.config;
  switch (c.method) {
    case Method::kMovingBalls: {
      MovingBallsConfig config(loaded.problem);
      config.subproblem = c.subproblem;
      config.stop = c.stop;
      return solve_moving_balls(config, c.x0);
    }
    case Method::kEsqm:
    case Method::kSl1qp:
      return solve_penalty(penalty_config(loaded), c.x0);
    case Method::kGradientProjection:
      return solve_gradient_projection(loaded.problem, c.stop, c.x0);
  }
  throw std::logic_error("unhandled method");
}

std::string trace_csv(const RunResult& run) {
  std::string out = kTraceHeader;
  out += '\n';
  for (const TraceRecord& r : run.trace) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.k, num(r.merit), num(r.f), num(r.value_function),
                       num(r.step_norm), num(r.beta), num(r.max_constraint_violation), r.subproblem_iters,
                       num(r.kkt_stationarity));
  }
  return out;
}

std::optional<RateEstimate> run_rate(const MethodRun& result, double threshold) {
  if (result.run.status != RunStatus::kConverged || result.run.points.empty()) return std::nullopt;
  try {
    return estimate_rate(result.run.points, result.run.points.back(), threshold);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

std::string summary_json(const LoadedProblem& loaded, const MethodRun& result) {
  const RunConfig& c = loaded.config;
  const RunResult& run = result.run;
  json s;
  s["name"] = c.name;
  s["builtin"] = c.builtin ? json(*c.builtin) : json(nullptr);
  s["method"] = method_name(result.method);
  s["status"] = to_string(run.status);
  s["exit_code"] = exit_code(run.status);
  s["message"] = run.message;
  s["diagnostic"] = result.diagnostic;
  s["iterations"] = run.trace.size();
  s["dimension"] = loaded.problem.dimension();
  s["constraints"] = loaded.problem.num_constraints();
  s["q_set"] = loaded.problem.simple_set.name();

  json params;
  params["x0"] = vector_json(c.x0);
  params["tol_step"] = c.stop.tol_step;
  params["max_iters"] = c.stop.max_iters;
  params["divergence_radius"] = c.stop.divergence_radius;
  params["eps_sub"] = c.subproblem.eps_sub;
  params["max_inner_iters"] = c.subproblem.max_inner_iters;
  params["lipschitz_objective"] = loaded.problem.objective.lipschitz_grad();
  json li = json::array();
  for (const SmoothFunction& f : loaded.problem.constraints) li.push_back(f.lipschitz_grad());
  params["lipschitz_constraints"] = li;
  if (result.method == Method::kEsqm || result.method == Method::kSl1qp) {
    const PenaltyConfig pc = penalty_config(loaded);
    params["beta0"] = pc.beta0;
    params["delta"] = pc.delta;
    params["lambda"] = pc.lambda;
    params["lambda_prime"] = pc.lambda_prime;
    params["feas_tol"] = pc.feas_tol;
  }
  params["seed"] = c.seed;
  s["parameters"] = params;

  json fin;
  fin["x"] = vector_json(run.final_state.x);
  fin["f"] = number_or_null(loaded.problem.objective(run.final_state.x));
  fin["merit"] = number_or_null(run.final_state.merit);
  fin["value_function"] = number_or_null(run.final_state.value_function);
  fin["last_step_norm"] = number_or_null(run.final_state.last_step_norm);
  fin["max_constraint_violation"] = number_or_null(loaded.problem.max_violation(run.final_state.x));
  s["final"] = fin;

  if (result.penalty) {
    json p;
    p["beta"] = result.penalty->beta;
    p["update_count"] = result.penalty->update_count;
    p["stabilized_at"] = result.penalty->stabilized_at ? json(*result.penalty->stabilized_at) : json(nullptr);
    s["penalty"] = p;
  } else {
    s["penalty"] = nullptr;
  }

  if (result.kkt) {
    json k;
    k["stationarity"] = result.kkt->stationarity;
    k["feasibility"] = result.kkt->feasibility;
    k["complementarity"] = result.kkt->complementarity;
    k["multipliers"] = vector_json(result.kkt->multipliers);
    s["kkt"] = k;
  } else {
    s["kkt"] = nullptr;
  }

  if (result.mfqc) {
    json m;
    m["active_set"] = result.mfqc->active_set;
    m["hull_distance"] = result.mfqc->hull_distance;
    m["satisfied"] = result.mfqc->satisfied;
    m["suspected_violation"] = "MFQC";
    s["mfqc"] = m;
  } else {
    s["mfqc"] = nullptr;
  }

  if (const auto rate = run_rate(result, c.rate_fit_threshold)) {
    json r;
    r["regime"] = to_string(rate->regime);
    r["q"] = rate->q;
    r["gamma"] = rate->gamma;
    r["fit_quality"] = rate->fit_quality;
    r["tail_start"] = rate->tail_start;
    s["rate"] = r;
  } else {
    s["rate"] = nullptr;
  }
  return s.dump(2) + "\n";
}

RunReport run_and_write(const LoadedProblem& loaded, const std::filesystem::path& out_dir) {
  RunReport report;
  report.name = loaded.config.name;
  report.method = loaded.config.method;
  report.result = execute(loaded);
  report.exit_code = exit_code(report.result.run.status);
  std::filesystem::create_directories(out_dir);
  const std::string stem = fmt::format("{}.{}", loaded.config.name, method_name(loaded.config.method));
  report.trace_path = out_dir / (stem + ".trace.csv");
  report.summary_path = out_dir / (stem + ".summary.json");
  write_file(report.trace_path, trace_csv(report.result.run));
  write_file(report.summary_path, summary_json(loaded, report.result));
  return report;
}

std::filesystem::path resolve_output_dir(const std::optional<std::string>& cli_out,
                                         const std::optional<std::string>& config_out) {
  if (cli_out && !cli_out->empty()) return *cli_out;
  if (const char* env = std::getenv("MMP_NLP_OUT"); env != nullptr && *env != '\0') return env;
  if (config_out && !config_out->empty()) return *config_out;
  return "mmp_out";
}

std::vector<RunReport> run_suite(const std::filesystem::path& out_dir, int jobs) {
  std::vector<LoadedProblem> runs;
  for (const Builtin& b : builtin_registry())
    for (Method m : b.methods) runs.push_back(builtin_config(b, m));

  std::vector<RunReport> reports(runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      try {
        reports[i] = run_and_write(runs[i], out_dir);
      } catch (const std::exception& err) {
        reports[i].name = runs[i].config.name;
        reports[i].method = runs[i].config.method;
        reports[i].exit_code = 1;
        reports[i].error = err.what();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(runs.size())));
  std::filesystem::create_directories(out_dir);
  std::vector<std::thread> threads;
  for (int t = 1; t < workers; ++t) threads.emplace_back(worker);
  worker();
  for (std::thread& t : threads) t.join();

  std::string table =
      "name,method,status,exit_code,expected,iterations,f,max_constraint_violation,kkt_max_residual,beta,"
      "rate\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const RunReport& r = reports[i];
    const Builtin* b = find_builtin(r.name);
    const std::string expected = b ? to_string(b->expected_status) : "";
    if (!r.error.empty()) {
      table += fmt::format("{},{},Error,1,{},,,,,,\n", r.name, method_name(r.method), expected);
      continue;
    }
    const RunResult& run = r.result.run;
    const auto rate = run_rate(r.result, 0.9);
    table += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.name, method_name(r.method), to_string(run.status),
                         r.exit_code, expected, run.trace.size(), num(runs[i].problem.objective(run.final_state.x)),
                         num(runs[i].problem.max_violation(run.final_state.x)),
                         r.result.kkt ? num(r.result.kkt->max_residual()) : "",
                         r.result.penalty ? num(r.result.penalty->beta) : "",
                         rate ? to_string(rate->regime) : "");
  }
  write_file(out_dir / "suite_summary.csv", table);
  return reports;
}

}  // namespace mmp_nlp
