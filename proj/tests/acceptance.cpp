// Acceptance checks: one PASS/FAIL line per criterion, exit 1 if any fails.
// Usage: acceptance [scratch_dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "mmp_nlp/builtins.hpp"
#include "mmp_nlp/config.hpp"
#include "mmp_nlp/diagnostics.hpp"
#include "mmp_nlp/mmp.hpp"
#include "mmp_nlp/runner.hpp"
#include "mmp_nlp/simple_set.hpp"
#include "mmp_nlp/sqp.hpp"
#include "mmp_nlp/subproblems.hpp"
#include "oracles.hpp"

using namespace mmp_nlp;
namespace fs = std::filesystem;

namespace {

// Tolerances.
constexpr double kMbFeasibility = 1e-8;
constexpr double kKkt = 1e-6;
constexpr double kOracleValue = 1e-5;
constexpr double kOracleArgument = 1e-3;
constexpr double kRateQ = 1e-3;
constexpr double kRateGammaRel = 0.05;
constexpr double kFiniteDiff = 1e-6;
constexpr double kFiniteDiffStep = 1e-5;
constexpr double kIdempotence = 1e-12;
constexpr double kNonexpansive = 1e-12;
constexpr double kVariational = 1e-10;
constexpr int kStabilizationWindow = 200;
constexpr int kOracleInstances = 120;
constexpr int kProjectionPairs = 10000;

struct Outcome {
  bool pass{true};
  std::string detail;
};

bool has_method(const Builtin& b, Method m) { return std::find(b.methods.begin(), b.methods.end(), m) != b.methods.end(); }

MethodRun run_default(const Builtin& b, Method m) { return execute(builtin_config(b, m)); }

const Method kSqpMethods[] = {Method::kMovingBalls, Method::kEsqm, Method::kSl1qp};

Outcome mb_feasibility() {
  Outcome out;
  int runs = 0;
  double worst = 0.0;
  for (const Builtin& b : builtin_registry()) {
    if (!has_method(b, Method::kMovingBalls) || b.problem.max_violation(b.x0) > 0.0) continue;
    const MethodRun r = run_default(b, Method::kMovingBalls);
    ++runs;
    for (const Vector& x : r.run.points) worst = std::max(worst, b.problem.max_violation(x));
    for (const TraceRecord& row : r.run.trace) worst = std::max(worst, row.max_constraint_violation);
  }
  out.pass = runs > 0 && worst <= kMbFeasibility;
  out.detail = fmt::format("{} runs, worst violation {:.3e}", runs, worst);
  return out;
}

Outcome sandwich() {
  Outcome out;
  int runs = 0;
  std::size_t rows = 0;
  std::size_t violations = 0;
  for (const Builtin& b : builtin_registry()) {
    for (Method m : kSqpMethods) {
      if (!has_method(b, m)) continue;
      const LoadedProblem l = builtin_config(b, m);
      const MethodRun r = execute(l);
      if (r.run.status != RunStatus::kConverged) continue;
      ++runs;
      const auto monitored = r.run.monitored_rows();
      const auto mu = r.run.monitored_mu();
      rows += monitored.size();
      const auto bad = sandwich_check(monitored, mu, 10.0 * l.config.subproblem.eps_sub);
      violations += bad.size();
      if (!bad.empty()) out.detail += fmt::format(" [{} {}: {}]", b.name, method_name(m), bad.size());
    }
  }
  out.pass = runs > 0 && violations == 0;
  out.detail = fmt::format("{} converged runs, {} rows, {} violations", runs, rows, violations) + out.detail;
  return out;
}

Outcome beta_stabilization() {
  Outcome out;
  int runs = 0;
  for (const Builtin& b : builtin_registry()) {
    if (!b.penalty_qualified) continue;
    for (Method m : {Method::kEsqm, Method::kSl1qp}) {
      if (!has_method(b, m)) continue;
      // Probe past convergence so the window can fill.
      LoadedProblem l = builtin_config(b, m);
      l.config.stop.tol_step = 0.0;
      l.config.stop.max_iters = 2000;
      const MethodRun r = execute(l);
      ++runs;
      const auto& trace = r.run.trace;
      bool ok = r.penalty.has_value() && r.penalty->stabilized_at.has_value();
      if (static_cast<int>(trace.size()) > kStabilizationWindow) {
        for (std::size_t k = trace.size() - kStabilizationWindow + 1; k < trace.size(); ++k)
          ok = ok && trace[k].beta == trace[k - 1].beta;
      } else {
        // Exact fixed point reached before the window filled.
        ok = ok && r.run.status == RunStatus::kConverged;
      }
      if (!ok) {
        out.pass = false;
        out.detail += fmt::format(" [{} {}]", b.name, method_name(m));
      }
    }
  }
  out.pass = out.pass && runs > 0;
  out.detail = fmt::format("{} probe runs", runs) + out.detail;
  return out;
}

Outcome kkt() {
  Outcome out;
  int runs = 0;
  double worst = 0.0;
  for (const Builtin& b : builtin_registry()) {
    for (Method m : b.methods) {
      const MethodRun r = run_default(b, m);
      if (r.run.status != RunStatus::kConverged) continue;
      ++runs;
      if (!r.kkt) {
        out.pass = false;
        out.detail += fmt::format(" [{} {}: no multipliers]", b.name, method_name(m));
        continue;
      }
      const KktReport k = kkt_residual(b.problem, r.run.final_state.x, r.kkt->multipliers);
      const double w = std::max({k.stationarity, k.feasibility, k.complementarity});
      worst = std::max(worst, w);
      if (w > kKkt) {
        out.pass = false;
        out.detail += fmt::format(" [{} {}: {:.2e}]", b.name, method_name(m), w);
      }
    }
  }
  out.pass = out.pass && runs > 0;
  out.detail = fmt::format("{} converged runs, worst residual {:.3e}", runs, worst) + out.detail;
  return out;
}

Outcome subproblem_oracle() {
  Outcome out;
  testing::RandomInstances gen(101);
  double worst_value[3] = {0.0, 0.0, 0.0};
  double worst_arg[3] = {0.0, 0.0, 0.0};
  double worst_upper[3] = {-INFINITY, -INFINITY, -INFINITY};
  int count[3] = {0, 0, 0};
  auto record = [&](int s, double model, const testing::InnerOracle& o, const Vector& y) {
    ++count[s];
    worst_value[s] = std::max(worst_value[s], std::fabs(model - o.lower));
    worst_arg[s] = std::max(worst_arg[s], (y - o.x).norm());
    worst_upper[s] = std::max(worst_upper[s], model - o.upper);
  };
  for (int trial = 0; trial < kOracleInstances; ++trial) {
    const Index n = 1 + trial % 3;
    const int m = 1 + (trial / 3) % 3;
    const BallSubproblem ball = gen.ball(n, m);
    const auto sb = mb_subproblem(ball);
    if (sb.status != SubproblemStatus::kSolved) {
      out.pass = false;
      continue;
    }
    record(0, ball.model(sb.y), testing::grid_solve(ball), sb.y);

    const SimpleSet sets[] = {SimpleSet::whole_space(n), SimpleSet::box(Vector::Constant(n, -1.0), Vector::Ones(n)),
                              SimpleSet::ball(Vector::Zero(n), 1.5), SimpleSet::nonneg_orthant(n)};
    const PenaltySubproblem pen = gen.penalty(n, m, sets[(trial / 9) % 4]);
    for (PenaltyKind kind : {PenaltyKind::kLinf, PenaltyKind::kL1}) {
      const auto sp = kind == PenaltyKind::kLinf ? esqm_subproblem(pen) : sl1qp_subproblem(pen);
      if (sp.status != SubproblemStatus::kSolved) {
        out.pass = false;
        continue;
      }
      record(kind == PenaltyKind::kLinf ? 1 : 2, pen.model(kind, sp.y), testing::grid_solve(pen, kind), sp.y);
    }
  }
  const char* names[3] = {"mb", "esqm", "sl1qp"};
  for (int s = 0; s < 3; ++s) {
    const bool ok = count[s] >= 100 && worst_value[s] <= kOracleValue && worst_arg[s] <= kOracleArgument &&
                    worst_upper[s] <= 1e-9;
    out.pass = out.pass && ok;
    out.detail += fmt::format("{}{}: {} inst, value {:.1e}, arg {:.1e}", s ? "; " : "", names[s], count[s],
                              worst_value[s], worst_arg[s]);
  }
  return out;
}

Outcome rates() {
  Outcome out;
  for (double q : {0.5, 0.8}) {
    std::vector<double> d;
    for (int k = 0; k < 60; ++k) d.push_back(std::pow(q, k));
    const RateEstimate e = estimate_rate_from_distances(d);
    const bool ok = e.regime == RateRegime::kGeometric && std::fabs(e.q - q) <= kRateQ;
    out.pass = out.pass && ok;
    out.detail += fmt::format("q={} -> {} {:.6f}; ", q, to_string(e.regime), e.q);
  }
  for (double gamma : {1.0, 2.0}) {
    std::vector<double> d;
    for (int k = 1; k <= 200; ++k) d.push_back(std::pow(static_cast<double>(k), -gamma));
    const RateEstimate e = estimate_rate_from_distances(d);
    const bool ok = e.regime == RateRegime::kPower && std::fabs(e.gamma - gamma) <= kRateGammaRel * gamma;
    out.pass = out.pass && ok;
    out.detail += fmt::format("gamma={} -> {} {:.4f}; ", gamma, to_string(e.regime), e.gamma);
  }
  int runs = 0;
  for (const char* name : {"quadratic", "disk-quadratic", "two-disks", "clipped-quadratic", "infeasible-halfplane",
                           "infeasible-start-box", "simplex-quadratic"}) {
    const Builtin* b = find_builtin(name);
    for (Method m : b->methods) {
      // Default runs often stop in under 10 iterations; probe a longer trace.
      LoadedProblem l = builtin_config(*b, m);
      l.config.stop.tol_step = 0.0;
      l.config.stop.max_iters = 300;
      const MethodRun r = execute(l);
      ++runs;
      const RateEstimate e = estimate_rate(r.run.points, r.run.points.back());
      const bool ok = e.regime == RateRegime::kGeometric || e.regime == RateRegime::kFiniteSteps;
      if (!ok) {
        out.pass = false;
        out.detail += fmt::format("[{} {}: {}] ", name, method_name(m), to_string(e.regime));
      }
    }
  }
  out.detail += fmt::format("{} strongly convex runs", runs);
  return out;
}

Outcome derivatives() {
  Outcome out;
  std::mt19937_64 rng(7);
  double worst_fd = 0.0;
  double worst_ratio = 0.0;
  int functions = 0;
  for (const Builtin& b : builtin_registry()) {
    std::vector<const SmoothFunction*> fs{&b.problem.objective};
    for (const auto& c : b.problem.constraints) fs.push_back(&c);
    const Index n = b.problem.dimension();
    auto sample = [&]() {
      Vector x(n);
      for (Index j = 0; j < n; ++j)
        x[j] = std::uniform_real_distribution<double>(b.trust_box.lower[j], b.trust_box.upper[j])(rng);
      return x;
    };
    for (const SmoothFunction* f : fs) {
      ++functions;
      for (int k = 0; k < 10; ++k) worst_fd = std::max(worst_fd, finite_diff_check(*f, sample(), kFiniteDiffStep));
      const Polynomial& p = *f->polynomial();
      const double bound = lipschitz_grad_bound(p, b.trust_box);
      const auto grad = grad_poly(p);
      // Pairs of points on a 9^n grid of the trust box.
      std::vector<Vector> grid;
      const int side = 9;
      std::vector<int> idx(static_cast<std::size_t>(n), 0);
      for (;;) {
        Vector x(n);
        for (Index j = 0; j < n; ++j)
          x[j] = b.trust_box.lower[j] +
                 (b.trust_box.upper[j] - b.trust_box.lower[j]) * idx[static_cast<std::size_t>(j)] / (side - 1);
        grid.push_back(x);
        Index j = 0;
        while (j < n && ++idx[static_cast<std::size_t>(j)] == side) idx[static_cast<std::size_t>(j++)] = 0;
        if (j == n) break;
      }
      std::vector<Vector> grads;
      for (const Vector& x : grid) grads.push_back(eval_gradient(grad, x));
      for (std::size_t a = 0; a < grid.size(); ++a)
        for (std::size_t c = a + 1; c < grid.size(); ++c) {
          const double ratio = (grads[a] - grads[c]).norm() / (grid[a] - grid[c]).norm();
          if (bound > 0.0) worst_ratio = std::max(worst_ratio, ratio / bound);
          else if (ratio > 1e-12) worst_ratio = INFINITY;
        }
    }
  }
  out.pass = worst_fd <= kFiniteDiff && worst_ratio <= 1.0;
  out.detail = fmt::format("{} polynomials, worst fd error {:.3e}, worst ratio/bound {:.4f}", functions, worst_fd,
                           worst_ratio);
  return out;
}

Outcome projections() {
  Outcome out;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal(0.0, 3.0);
  const Index n = 3;
  Vector lower = Vector::Constant(n, -1.0);
  lower[0] = -INFINITY;
  const std::vector<SimpleSet> sets{SimpleSet::whole_space(n), SimpleSet::box(lower, Vector::Constant(n, 2.0)),
                                    SimpleSet::ball(Vector::Constant(n, 0.5), 1.5), SimpleSet::simplex(n, 2.0),
                                    SimpleSet::simplex_cap(n, 1.5), SimpleSet::nonneg_orthant(n)};
  double idem = 0.0;
  double expansion = -INFINITY;
  double vi = -INFINITY;
  for (const SimpleSet& q : sets) {
    for (int t = 0; t < kProjectionPairs; ++t) {
      Vector a(n), b(n), c(n);
      for (Index j = 0; j < n; ++j) {
        a[j] = normal(rng);
        b[j] = normal(rng);
        c[j] = normal(rng);
      }
      const Vector pa = project(q, a);
      const Vector pb = project(q, b);
      const Vector w = project(q, c);
      idem = std::max(idem, (project(q, pa) - pa).norm());
      expansion = std::max(expansion, (pa - pb).norm() - (a - b).norm());
      vi = std::max(vi, (a - pa).dot(w - pa));
    }
  }
  out.pass = idem <= kIdempotence && expansion <= kNonexpansive && vi <= kVariational;
  out.detail = fmt::format("{} variants x {} pairs, idempotence {:.1e}, expansion {:.1e}, vi {:.1e}", sets.size(),
                           kProjectionPairs, idem, expansion, vi);
  return out;
}

Outcome alternative() {
  Outcome out;
  int runs = 0;
  for (const Builtin& b : builtin_registry()) {
    for (Method m : b.methods) {
      const MethodRun r = run_default(b, m);
      ++runs;
      bool ok = r.run.status == b.expected_status && r.run.status != RunStatus::kMaxIters;
      if (b.name == "linear-unbounded") ok = ok && r.run.status == RunStatus::kDiverged;
      if (b.category != BuiltinCategory::kUnbounded && b.category != BuiltinCategory::kDegenerate)
        ok = ok && r.run.status == RunStatus::kConverged;
      if (!ok) {
        out.pass = false;
        out.detail += fmt::format(" [{} {}: {}]", b.name, method_name(m), to_string(r.run.status));
      }
    }
  }
  out.detail = fmt::format("{} runs", runs) + out.detail;
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism(const fs::path& scratch) {
  Outcome out;
  const fs::path a = scratch / "suite_a";
  const fs::path b = scratch / "suite_b";
  fs::remove_all(a);
  fs::remove_all(b);
  (void)run_suite(a, 1);
  (void)run_suite(b, 1);
  int files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    if (entry.path().extension() != ".csv") continue;
    ++files;
    const fs::path other = b / entry.path().filename();
    if (!fs::exists(other) || read_file(entry.path()) != read_file(other)) {
      out.pass = false;
      out.detail += " [" + entry.path().filename().string() + "]";
    }
  }
  int other_files = 0;
  for (const auto& entry : fs::directory_iterator(b))
    if (entry.path().extension() == ".csv") ++other_files;
  out.pass = out.pass && files > 0 && files == other_files;
  out.detail = fmt::format("{} csv files compared", files) + out.detail;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path scratch = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "mmp_nlp_acceptance";
  fs::create_directories(scratch);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"moving balls iterates stay feasible", mb_feasibility},
      {"sandwich inequality holds", sandwich},
      {"penalty parameter stabilizes", beta_stabilization},
      {"converged runs satisfy KKT", kkt},
      {"inner solvers match grid oracles", subproblem_oracle},
      {"rate classification", rates},
      {"derivatives and Lipschitz bounds", derivatives},
      {"projection properties", projections},
      {"diverge or converge, never stall", alternative},
      {"suite output is deterministic", [&] { return determinism(scratch); }},
  };

  int failures = 0;
  int index = 0;
  for (const auto& [title, check] : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    fmt::print("criterion {:2d}: {} {} ({:.2f} s) {}\n", index, o.pass ? "PASS" : "FAIL", title, seconds, o.detail);
  }
  return failures == 0 ? 0 : 1;
}
