#include "mmp_nlp/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include <fmt/format.h>

namespace mmp_nlp {

ConfigError::ConfigError(std::size_t line, std::string key, const std::string& message)
    : std::runtime_error(line > 0 ? fmt::format("line {}: {}: {}", line, key, message)
                                  : (key.empty() ? message : fmt::format("{}: {}", key, message))),
      line_(line),
      key_(std::move(key)) {}

namespace {

struct Entry {
  std::string value;
  std::size_t line{0};
  bool used{false};
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

class Entries {
 public:
  void add(std::string key, std::string value, std::size_t line) {
    if (auto it = map_.find(key); it != map_.end())
      throw ConfigError(line, key, fmt::format("duplicate key (first set on line {})", it->second.line));
    map_.emplace(std::move(key), Entry{std::move(value), line, false});
  }

  [[nodiscard]] bool has(const std::string& key) const { return map_.count(key) > 0; }

  const Entry* get(const std::string& key) {
    auto it = map_.find(key);
    if (it == map_.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  const Entry& require(const std::string& key) {
    const Entry* e = get(key);
    if (e == nullptr) throw ConfigError(0, key, "missing required key");
    return *e;
  }

  [[nodiscard]] std::vector<std::string> keys_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& [key, entry] : map_)
      if (key.rfind(prefix, 0) == 0) out.push_back(key);
    return out;
  }

  void reject_unused() const {
    for (const auto& [key, entry] : map_)
      if (!entry.used) throw ConfigError(entry.line, key, "unknown key");
  }

 private:
  std::map<std::string, Entry> map_;
};

double parse_double(const Entry& e, const std::string& key, std::string_view token) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  if (!token.empty() && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || token.empty())
    throw ConfigError(e.line, key, fmt::format("'{}' is not a number", token));
  return value;
}

std::vector<double> parse_numbers(const Entry& e, const std::string& key) {
  std::vector<double> out;
  std::string text = e.value;
  for (char& c : text)
    if (c == ',') c = ' ';
  std::istringstream stream(text);
  std::string token;
  while (stream >> token) out.push_back(parse_double(e, key, token));
  return out;
}

double number(Entries& entries, const std::string& key, double fallback) {
  const Entry* e = entries.get(key);
  if (e == nullptr) return fallback;
  const std::vector<double> values = parse_numbers(*e, key);
  if (values.size() != 1) throw ConfigError(e->line, key, "expected a single number");
  return values[0];
}

std::optional<double> optional_number(Entries& entries, const std::string& key) {
  if (!entries.has(key)) return std::nullopt;
  return number(entries, key, 0.0);
}

long long integer(Entries& entries, const std::string& key, long long fallback) {
  const Entry* e = entries.get(key);
  if (e == nullptr) return fallback;
  const std::string_view text = trim(e->value);
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw ConfigError(e->line, key, fmt::format("'{}' is not an integer", text));
  return value;
}

double positive(Entries& entries, const std::string& key, double fallback) {
  const double value = number(entries, key, fallback);
  if (!(value > 0.0) || !std::isfinite(value)) throw ConfigError(entries.get(key)->line, key, "must be positive");
  return value;
}

Vector exact_vector(const Entry& e, const std::string& key, Index n) {
  const std::vector<double> values = parse_numbers(e, key);
  if (static_cast<Index>(values.size()) != n)
    throw ConfigError(e.line, key, fmt::format("expected {} numbers, got {}", n, values.size()));
  return Eigen::Map<const Vector>(values.data(), n);
}

// Two numbers (same bounds on every axis) or 2n numbers (n lower bounds, then n upper bounds).
std::pair<Vector, Vector> bounds(const Entry& e, const std::string& key, Index n) {
  const std::vector<double> v = parse_numbers(e, key);
  if (v.size() == 2) return {Vector::Constant(n, v[0]), Vector::Constant(n, v[1])};
  if (static_cast<Index>(v.size()) == 2 * n)
    return {Eigen::Map<const Vector>(v.data(), n), Eigen::Map<const Vector>(v.data() + n, n)};
  throw ConfigError(e.line, key, fmt::format("expected 2 or {} numbers, got {}", 2 * n, v.size()));
}

SimpleSet parse_q(Entries& entries, Index n) {
  const Entry* kind_entry = entries.get("q_set");
  const Entry* params = entries.get("q_params");
  const std::string kind = kind_entry ? std::string(trim(kind_entry->value)) : "whole_space";
  const std::size_t line = kind_entry ? kind_entry->line : 0;
  const std::vector<double> values = params ? parse_numbers(*params, "q_params") : std::vector<double>{};
  auto wants = [&](std::size_t count) {
    if (values.size() != count)
      throw ConfigError(params ? params->line : line, "q_params",
                        fmt::format("q_set = {} takes {} parameters, got {}", kind, count, values.size()));
  };
  try {
    if (kind == "whole_space") {
      wants(0);
      return SimpleSet::whole_space(n);
    }
    if (kind == "nonneg_orthant") {
      wants(0);
      return SimpleSet::nonneg_orthant(n);
    }
    if (kind == "box") {
      if (params == nullptr) throw ConfigError(line, "q_params", "q_set = box needs bounds");
      auto [lower, upper] = bounds(*params, "q_params", n);
      return SimpleSet::box(std::move(lower), std::move(upper));
    }
    if (kind == "ball") {
      if (values.size() == 1) return SimpleSet::ball(Vector::Zero(n), values[0]);
      wants(static_cast<std::size_t>(n) + 1);
      return SimpleSet::ball(Eigen::Map<const Vector>(values.data(), n), values.back());
    }
    if (kind == "simplex" || kind == "simplex_cap") {
      double scale = 1.0;
      if (!values.empty()) {
        wants(1);
        scale = values[0];
      }
      return kind == "simplex" ? SimpleSet::simplex(n, scale) : SimpleSet::simplex_cap(n, scale);
    }
  } catch (const std::invalid_argument& err) {
    throw ConfigError(params ? params->line : line, "q_params", err.what());
  }
  throw ConfigError(line, "q_set", fmt::format("unknown set '{}'", kind));
}

Polynomial parse_poly_entry(const Entry& e, const std::string& key, std::size_t n) {
  try {
    return parse_polynomial(e.value, n);
  } catch (const ParseError& err) {
    throw ConfigError(e.line, key, err.what());
  }
}

std::optional<double> lipschitz_override(Entries& entries, const std::string& key) {
  if (!entries.has(key)) return std::nullopt;
  return positive(entries, key, 1.0);
}

void read_run_settings(Entries& entries, RunConfig& config, Index n) {
  if (const Entry* e = entries.get("name")) config.name = std::string(trim(e->value));
  if (const Entry* e = entries.get("method")) {
    const auto method = parse_method(trim(e->value));
    if (!method) throw ConfigError(e->line, "method", fmt::format("unknown method '{}'", trim(e->value)));
    config.method = *method;
  }
  if (const Entry* e = entries.get("x0")) config.x0 = exact_vector(*e, "x0", n);
  config.beta0 = positive(entries, "beta0", config.beta0);
  config.delta = positive(entries, "delta", config.delta);
  config.lambda = optional_number(entries, "lambda");
  config.lambda_prime = optional_number(entries, "lambda_prime");
  config.stop.tol_step = number(entries, "tol_step", config.stop.tol_step);
  if (!(config.stop.tol_step >= 0.0)) throw ConfigError(entries.get("tol_step")->line, "tol_step", "must be >= 0");
  const long long max_iters = integer(entries, "max_iters", config.stop.max_iters);
  if (max_iters < 0 || max_iters > 1'000'000'000)
    throw ConfigError(entries.get("max_iters")->line, "max_iters", "out of range");
  config.stop.max_iters = static_cast<int>(max_iters);
  config.stop.divergence_radius = positive(entries, "divergence_radius", config.stop.divergence_radius);
  config.subproblem.eps_sub = positive(entries, "eps_sub", config.subproblem.eps_sub);
  const long long inner = integer(entries, "max_inner_iters", config.subproblem.max_inner_iters);
  if (inner < 1 || inner > 1'000'000'000)
    throw ConfigError(entries.get("max_inner_iters")->line, "max_inner_iters", "out of range");
  config.subproblem.max_inner_iters = static_cast<int>(inner);
  config.feas_tol = number(entries, "feas_tol", config.feas_tol);
  if (!(config.feas_tol >= 0.0)) throw ConfigError(entries.get("feas_tol")->line, "feas_tol", "must be >= 0");
  const long long seed = integer(entries, "seed", 0);
  if (seed < 0) throw ConfigError(entries.get("seed")->line, "seed", "must be >= 0");
  config.seed = static_cast<std::uint64_t>(seed);
  if (const Entry* e = entries.get("output_dir")) config.output_dir = std::string(trim(e->value));
  config.rate_fit_threshold = number(entries, "rate_fit_threshold", config.rate_fit_threshold);
  if (!(config.rate_fit_threshold > 0.0 && config.rate_fit_threshold <= 1.0))
    throw ConfigError(entries.get("rate_fit_threshold")->line, "rate_fit_threshold", "must lie in (0, 1]");
}

}  // namespace

LoadedProblem builtin_config(const Builtin& builtin, Method method) {
  LoadedProblem loaded{RunConfig{}, builtin.problem, builtin.trust_box};
  loaded.config.name = builtin.name;
  loaded.config.builtin = builtin.name;
  loaded.config.method = method;
  loaded.config.x0 = builtin.x0;
  return loaded;
}

LoadedProblem parse_config(std::string_view text) {
  Entries entries;
  std::size_t line_number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_number;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(line_number, std::string(line), "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError(line_number, "", "empty key");
    entries.add(key, std::string(trim(line.substr(eq + 1))), line_number);
  }

  if (const Entry* base = entries.get("problem")) {
    const Builtin* builtin = find_builtin(trim(base->value));
    if (builtin == nullptr)
      throw ConfigError(base->line, "problem", fmt::format("unknown builtin '{}'", trim(base->value)));
    for (const char* key : {"dimension", "objective", "q_set", "q_params", "trust_box", "lipschitz.objective"})
      if (entries.has(key)) throw ConfigError(entries.get(key)->line, key, "cannot be combined with problem");
    for (const std::string& key : entries.keys_with_prefix("constraint."))
      throw ConfigError(entries.get(key)->line, key, "cannot be combined with problem");
    for (const std::string& key : entries.keys_with_prefix("lipschitz.constraint."))
      throw ConfigError(entries.get(key)->line, key, "cannot be combined with problem");
    LoadedProblem loaded = builtin_config(*builtin, builtin->methods.front());
    read_run_settings(entries, loaded.config, builtin->problem.dimension());
    entries.reject_unused();
    check_compatibility(loaded);
    return loaded;
  }

  const long long dim = integer(entries, "dimension", -1);
  if (dim == -1) throw ConfigError(0, "dimension", "missing required key");
  if (dim < 1 || dim > 1000) throw ConfigError(entries.get("dimension")->line, "dimension", "must be in 1..1000");
  const auto n = static_cast<std::size_t>(dim);
  const auto ni = static_cast<Index>(dim);

  const Entry& objective_entry = entries.require("objective");
  Polynomial objective = parse_poly_entry(objective_entry, "objective", n);

  std::vector<Polynomial> constraints;
  const std::size_t m = entries.keys_with_prefix("constraint.").size();
  for (std::size_t i = 1; i <= m; ++i) {
    const std::string key = fmt::format("constraint.{}", i);
    const Entry* e = entries.get(key);
    if (e == nullptr)
      throw ConfigError(0, key, fmt::format("constraints must be numbered 1..{} without gaps", m));
    constraints.push_back(parse_poly_entry(*e, key, n));
  }

  SimpleSet q = parse_q(entries, ni);
  AxisBox trust = AxisBox::symmetric(n, 10.0);
  if (q.kind() == SimpleSet::Kind::kBox) {
    const auto& box = std::get<Box>(q.variant());
    if (box.lower.allFinite() && box.upper.allFinite()) trust = AxisBox{box.lower, box.upper};
  }
  if (const Entry* e = entries.get("trust_box")) {
    auto [lower, upper] = bounds(*e, "trust_box", ni);
    if (!lower.allFinite() || !upper.allFinite() || (upper.array() < lower.array()).any())
      throw ConfigError(e->line, "trust_box", "must be bounded with lower <= upper");
    trust = AxisBox{std::move(lower), std::move(upper)};
  }

  auto make = [&](Polynomial p, std::optional<double> lipschitz) {
    const double l = lipschitz ? *lipschitz : lipschitz_grad_bound(p, trust);
    return SmoothFunction::from_polynomial(std::move(p), l);
  };
  SmoothFunction f = make(std::move(objective), lipschitz_override(entries, "lipschitz.objective"));
  std::vector<SmoothFunction> fs;
  for (std::size_t i = 0; i < m; ++i)
    fs.push_back(make(std::move(constraints[i]),
                      lipschitz_override(entries, fmt::format("lipschitz.constraint.{}", i + 1))));

  LoadedProblem loaded{RunConfig{}, NlpProblem(std::move(f), std::move(fs), std::move(q)), std::move(trust)};
  if (!entries.has("method")) throw ConfigError(0, "method", "missing required key");
  if (!entries.has("x0")) throw ConfigError(0, "x0", "missing required key");
  read_run_settings(entries, loaded.config, ni);
  entries.reject_unused();
  check_compatibility(loaded);
  return loaded;
}

LoadedProblem load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(0, path.string(), "cannot open config file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  LoadedProblem loaded = parse_config(buffer.str());
  if (loaded.config.name == "problem" && !loaded.config.builtin) loaded.config.name = path.stem().string();
  return loaded;
}

void check_compatibility(const LoadedProblem& loaded) {
  const RunConfig& c = loaded.config;
  const NlpProblem& p = loaded.problem;
  if (c.x0.size() != p.dimension()) throw ConfigError(0, "x0", "dimension mismatch");
  switch (c.method) {
    case Method::kMovingBalls:
      if (p.simple_set.kind() != SimpleSet::Kind::kWholeSpace)
        throw ConfigError(0, "method", "mb requires q_set = whole_space");
      if (c.lambda || c.lambda_prime) throw ConfigError(0, "method", "lambda and lambda_prime apply to esqm/sl1qp only");
      break;
    case Method::kGradientProjection:
      if (p.num_constraints() != 0) throw ConfigError(0, "method", "gradproj requires a problem without constraints");
      break;
    case Method::kEsqm:
    case Method::kSl1qp: {
      PenaltyConfig penalty(p, c.method == Method::kEsqm ? PenaltyKind::kLinf : PenaltyKind::kL1);
      if (c.lambda && *c.lambda < penalty.lambda)
        throw ConfigError(0, "lambda", fmt::format("must be >= L = {:g}", penalty.lambda));
      if (c.lambda_prime && *c.lambda_prime < penalty.lambda_prime)
        throw ConfigError(0, "lambda_prime", fmt::format("must be >= {:g}", penalty.lambda_prime));
      break;
    }
  }
}

}  // namespace mmp_nlp
