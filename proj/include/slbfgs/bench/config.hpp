#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "slbfgs/problems/libsvm.hpp"
#include "slbfgs/problems/logistic.hpp"
#include "slbfgs/problems/poisson_control.hpp"
#include "slbfgs/problems/quartic.hpp"
#include "slbfgs/problems/structured_quadratic.hpp"
#include "slbfgs/solver.hpp"
#include "slbfgs/types.hpp"

// Declarative benchmark configuration: one JSON file lists the problem
// instances (generator + parameters + seeds) and the solver variants to run
// over them. All validation errors are ConfigError with a JSON field path.

namespace slbfgs::bench {

using json = nlohmann::json;

/// A constructed problem together with its generator's default start point.
struct GeneratedProblem {
  std::shared_ptr<const StructuredProblem> problem;
  Vector x0;
};

namespace detail_config {

inline bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    if (!ok) return false;
  }
  return true;
}

inline void check_keys(const json& obj, const std::vector<std::string>& allowed,
                       const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const auto& k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError(where + "." + it.key() + ": unknown field");
  }
}

inline double get_number(const json& obj, const std::string& key, double fallback,
                         const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number())
    throw ConfigError(where + "." + key + ": expected a number");
  return obj[key].get<double>();
}

inline std::int64_t get_int(const json& obj, const std::string& key,
                            std::int64_t fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer())
    throw ConfigError(where + "." + key + ": expected an integer");
  return obj[key].get<std::int64_t>();
}

inline std::string get_string(const json& obj, const std::string& key,
                              const std::string& fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string())
    throw ConfigError(where + "." + key + ": expected a string");
  return obj[key].get<std::string>();
}

}  // namespace detail_config

/// Maps generator names to problem factories. Each entry may also carry a
/// normalizer that validates/completes the parameter object up front (so a
/// bad config fails at parse time, not mid-suite). The registry is mutable so
/// tests can inject synthetic generators (e.g. one that throws on evaluation).
class GeneratorRegistry {
 public:
  using Factory = std::function<GeneratedProblem(const json& params, std::uint64_t seed)>;
  /// Validates `params` (throwing ConfigError whose message starts with
  /// "params...") and returns the normalized parameter object to store.
  using Normalize =
      std::function<json(const json& params, const std::filesystem::path& base_dir)>;

  void add(const std::string& name, Factory factory, Normalize normalize = {}) {
    entries_[name] = Entry{std::move(factory), std::move(normalize)};
  }

  bool contains(const std::string& name) const { return entries_.count(name) != 0; }

  json normalize(const std::string& name, const json& params,
                 const std::filesystem::path& base_dir) const {
    const auto& e = entry(name);
    return e.normalize ? e.normalize(params, base_dir) : params;
  }

  GeneratedProblem make(const std::string& name, const json& params,
                        std::uint64_t seed) const {
    return entry(name).factory(params, seed);
  }

  /// Process-wide registry preloaded with the built-in generators.
  static GeneratorRegistry& global();

 private:
  struct Entry {
    Factory factory;
    Normalize normalize;
  };

  const Entry& entry(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end())
      throw ConfigError("unknown problem generator '" + name + "'");
    return it->second;
  }

  std::map<std::string, Entry> entries_;
};

/// One problem block from the config: a named family instantiated per seed.
struct ProblemSpec {
  std::string name;
  std::string generator;
  json params;
  std::vector<std::uint64_t> seeds;
  std::string x0_mode;  // "default", "zeros", or "ones"
};

/// One solver block: a display name plus a fully validated SolverConfig.
struct SolverSpec {
  std::string name;
  SolverConfig config;
};

struct BenchConfig {
  std::filesystem::path output_dir;
  std::vector<ProblemSpec> problems;
  std::vector<SolverSpec> solvers;
};

namespace detail_config {

inline SolverConfig parse_solver_block(const json& obj, const std::string& where) {
  check_keys(obj,
             {"name", "variant", "memory", "sigma", "sigma0", "sigma_min", "epsilon",
              "max_iters", "minus_init", "delta_mode", "delta_eps", "dense_cap",
              "structured_curvature", "wolfe"},
             where);
  SolverConfig cfg;

  const std::string variant = get_string(obj, "variant", "", where);
  if (variant == "minus")
    cfg.variant = Variant::kMinus;
  else if (variant == "plus")
    cfg.variant = Variant::kPlus;
  else
    throw ConfigError(where + ".variant: expected \"minus\" or \"plus\", got \"" +
                      variant + "\"");

  cfg.memory = static_cast<Index>(get_int(obj, "memory", cfg.memory, where));

  const std::string sigma = get_string(obj, "sigma", "init1", where);
  if (sigma == "init1")
    cfg.sigma_strategy = SigmaStrategy::kInit1;
  else if (sigma == "init2")
    cfg.sigma_strategy = SigmaStrategy::kInit2;
  else if (sigma == "init3")
    cfg.sigma_strategy = SigmaStrategy::kInit3;
  else if (sigma == "init4")
    cfg.sigma_strategy = SigmaStrategy::kInit4;
  else if (sigma == "constant")
    cfg.sigma_strategy = SigmaStrategy::kConstant;
  else
    throw ConfigError(where +
                      ".sigma: expected one of init1, init2, init3, init4, "
                      "constant; got \"" +
                      sigma + "\"");

  cfg.sigma0 = get_number(obj, "sigma0", cfg.sigma0, where);
  cfg.sigma_min = get_number(obj, "sigma_min", cfg.sigma_min, where);
  cfg.epsilon = get_number(obj, "epsilon", cfg.epsilon, where);
  cfg.max_iters = static_cast<Index>(get_int(obj, "max_iters", cfg.max_iters, where));
  cfg.delta_eps = get_number(obj, "delta_eps", cfg.delta_eps, where);
  cfg.dense_cap = static_cast<Index>(get_int(obj, "dense_cap", cfg.dense_cap, where));

  const std::string minus_init = get_string(obj, "minus_init", "scalar", where);
  if (minus_init == "scalar")
    cfg.minus_init = MinusInitMode::kScalar;
  else if (minus_init == "operator")
    cfg.minus_init = MinusInitMode::kOperator;
  else
    throw ConfigError(where + ".minus_init: expected \"scalar\" or \"operator\"");

  const std::string delta_mode = get_string(obj, "delta_mode", "power", where);
  if (delta_mode == "power")
    cfg.delta_mode = DeltaMode::kPowerOfTen;
  else if (delta_mode == "cheap")
    cfg.delta_mode = DeltaMode::kCheapFormula;
  else
    throw ConfigError(where + ".delta_mode: expected \"power\" or \"cheap\"");

  const std::string curv = get_string(obj, "structured_curvature", "auto", where);
  if (curv == "auto")
    cfg.structured_curvature = CurvatureMode::kAuto;
  else if (curv == "on")
    cfg.structured_curvature = CurvatureMode::kOn;
  else if (curv == "off")
    cfg.structured_curvature = CurvatureMode::kOff;
  else
    throw ConfigError(where +
                      ".structured_curvature: expected \"auto\", \"on\", or \"off\"");

  if (obj.contains("wolfe")) {
    const json& w = obj["wolfe"];
    if (!w.is_object()) throw ConfigError(where + ".wolfe: expected an object");
    const std::string wwhere = where + ".wolfe";
    check_keys(w, {"c1", "c2", "alpha_init", "alpha_max", "max_evals"}, wwhere);
    cfg.wolfe.c1 = get_number(w, "c1", cfg.wolfe.c1, wwhere);
    cfg.wolfe.c2 = get_number(w, "c2", cfg.wolfe.c2, wwhere);
    cfg.wolfe.alpha_init = get_number(w, "alpha_init", cfg.wolfe.alpha_init, wwhere);
    cfg.wolfe.alpha_max = get_number(w, "alpha_max", cfg.wolfe.alpha_max, wwhere);
    cfg.wolfe.max_evals =
        static_cast<Index>(get_int(w, "max_evals", cfg.wolfe.max_evals, wwhere));
  }

  try {
    detail_solver::validate(cfg);
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return cfg;
}

}  // namespace detail_config

/// Parses and fully validates a benchmark config. `base_dir` anchors relative
/// data-file paths (callers pass the config file's directory).
inline BenchConfig parse_bench_config_json(const json& root,
                                           const std::filesystem::path& base_dir,
                                           const GeneratorRegistry& registry =
                                               GeneratorRegistry::global()) {
  using detail_config::check_keys;
  using detail_config::get_string;
  using detail_config::valid_name;

  if (!root.is_object()) throw ConfigError("config root: expected a JSON object");
  check_keys(root, {"output_dir", "problems", "solvers"}, "config");

  BenchConfig cfg;
  cfg.output_dir = get_string(root, "output_dir", "results", "config");

  if (!root.contains("problems") || !root["problems"].is_array() ||
      root["problems"].empty())
    throw ConfigError("problems: expected a non-empty array");
  if (!root.contains("solvers") || !root["solvers"].is_array() ||
      root["solvers"].empty())
    throw ConfigError("solvers: expected a non-empty array");

  std::map<std::string, bool> seen_problems, seen_solvers;
  for (std::size_t i = 0; i < root["problems"].size(); ++i) {
    const std::string where = "problems[" + std::to_string(i) + "]";
    const json& obj = root["problems"][i];
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    check_keys(obj, {"name", "generator", "params", "seeds", "x0"}, where);

    ProblemSpec spec;
    spec.name = get_string(obj, "name", "", where);
    if (!valid_name(spec.name))
      throw ConfigError(where +
                        ".name: required, characters limited to [A-Za-z0-9_.-]");
    if (!seen_problems.emplace(spec.name, true).second)
      throw ConfigError(where + ".name: duplicate problem name '" + spec.name + "'");

    spec.generator = get_string(obj, "generator", "", where);
    if (!registry.contains(spec.generator))
      throw ConfigError(where + ".generator: unknown generator '" + spec.generator +
                        "'");

    json params = obj.contains("params") ? obj["params"] : json::object();
    if (!params.is_object()) throw ConfigError(where + ".params: expected an object");
    try {
      spec.params = registry.normalize(spec.generator, params, base_dir);
    } catch (const ConfigError& e) {
      throw ConfigError(where + "." + e.what());
    }

    if (obj.contains("seeds")) {
      if (!obj["seeds"].is_array() || obj["seeds"].empty())
        throw ConfigError(where + ".seeds: expected a non-empty array of integers");
      for (const auto& s : obj["seeds"]) {
        if (!s.is_number_integer() || s.get<std::int64_t>() < 0)
          throw ConfigError(where + ".seeds: expected non-negative integers");
        spec.seeds.push_back(s.get<std::uint64_t>());
      }
    } else {
      spec.seeds = {0};
    }

    spec.x0_mode = get_string(obj, "x0", "default", where);
    if (spec.x0_mode != "default" && spec.x0_mode != "zeros" && spec.x0_mode != "ones")
      throw ConfigError(where + ".x0: expected \"default\", \"zeros\", or \"ones\"");
    cfg.problems.push_back(std::move(spec));
  }

  for (std::size_t i = 0; i < root["solvers"].size(); ++i) {
    const std::string where = "solvers[" + std::to_string(i) + "]";
    const json& obj = root["solvers"][i];
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");

    SolverSpec spec;
    spec.name = get_string(obj, "name", "", where);
    if (!valid_name(spec.name))
      throw ConfigError(where +
                        ".name: required, characters limited to [A-Za-z0-9_.-]");
    if (!seen_solvers.emplace(spec.name, true).second)
      throw ConfigError(where + ".name: duplicate solver name '" + spec.name + "'");
    spec.config = detail_config::parse_solver_block(obj, where);
    cfg.solvers.push_back(std::move(spec));
  }
  return cfg;
}

inline BenchConfig parse_bench_config_file(const std::filesystem::path& path,
                                           const GeneratorRegistry& registry =
                                               GeneratorRegistry::global()) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " +
                      e.what());
  }
  return parse_bench_config_json(root, path.parent_path(), registry);
}

// ---------------------------------------------------------------------------
// Built-in generators.

namespace detail_config {

inline json normalize_structured_quadratic(const json& params,
                                           const std::filesystem::path&) {
  check_keys(params, {"n", "r", "phi", "d_min", "d_max"}, "params");
  json out = json::object();
  const std::int64_t n = get_int(params, "n", -1, "params");
  if (n < 1) throw ConfigError("params.n: required integer >= 1");
  const std::int64_t r = get_int(params, "r", std::max<std::int64_t>(1, n / 10),
                                 "params");
  if (r < 0 || r > n) throw ConfigError("params.r: expected 0 <= r <= n");
  const double phi = get_number(params, "phi", 1.0, "params");
  if (!(phi > 0)) throw ConfigError("params.phi: expected > 0");
  const double d_min = get_number(params, "d_min", 0.0, "params");
  const double d_max = get_number(params, "d_max", 999.0, "params");
  if (!(d_min >= 0) || !(d_max >= d_min))
    throw ConfigError("params.d_min/d_max: expected 0 <= d_min <= d_max");
  out["n"] = n;
  out["r"] = r;
  out["phi"] = phi;
  out["d_min"] = d_min;
  out["d_max"] = d_max;
  return out;
}

inline GeneratedProblem make_structured_quadratic(const json& params,
                                                  std::uint64_t seed) {
  const auto n = static_cast<Index>(params["n"].get<std::int64_t>());
  auto problem = std::make_shared<StructuredQuadratic>(
      n, static_cast<Index>(params["r"].get<std::int64_t>()),
      params["phi"].get<double>(), params["d_min"].get<double>(),
      params["d_max"].get<double>(), seed);
  return {std::move(problem), Vector::Zero(n)};
}

inline json normalize_structured_quartic(const json& params,
                                         const std::filesystem::path&) {
  check_keys(params, {"n"}, "params");
  const std::int64_t n = get_int(params, "n", -1, "params");
  if (n < 1) throw ConfigError("params.n: required integer >= 1");
  json out = json::object();
  out["n"] = n;
  return out;
}

inline GeneratedProblem make_structured_quartic(const json& params,
                                                std::uint64_t seed) {
  const auto n = static_cast<Index>(params["n"].get<std::int64_t>());
  auto problem = std::make_shared<StructuredQuartic>(n, seed);
  return {std::move(problem), Vector::Ones(n)};
}

inline json normalize_poisson_control(const json& params,
                                      const std::filesystem::path&) {
  check_keys(params, {"mesh_index"}, "params");
  const std::int64_t j = get_int(params, "mesh_index", -1, "params");
  if (j < 1) throw ConfigError("params.mesh_index: required integer >= 1");
  json out = json::object();
  out["mesh_index"] = j;
  return out;
}

inline GeneratedProblem make_poisson_control(const json& params, std::uint64_t) {
  const auto j = static_cast<Index>(params["mesh_index"].get<std::int64_t>());
  auto problem = std::make_shared<PoissonControl>(j);
  const Index n = problem->dim();
  return {std::move(problem), Vector::Zero(n)};
}

inline json normalize_logistic(const json& params,
                               const std::filesystem::path& base_dir) {
  check_keys(params, {"data", "lambda"}, "params");
  const std::string data = get_string(params, "data", "", "params");
  if (data.empty()) throw ConfigError("params.data: required path to a LIBSVM file");
  std::filesystem::path p(data);
  if (p.is_relative()) p = base_dir / p;
  if (!std::filesystem::exists(p))
    throw ConfigError("params.data: file not found: " + p.string());
  const double lambda = get_number(params, "lambda", 1e-3, "params");
  if (!(lambda > 0)) throw ConfigError("params.lambda: expected > 0");
  json out = json::object();
  out["data"] = p.string();
  out["lambda"] = lambda;
  return out;
}

inline GeneratedProblem make_logistic(const json& params, std::uint64_t) {
  auto dataset = parse_libsvm_file(params["data"].get<std::string>());
  auto problem = std::make_shared<LogisticRegression>(
      std::move(dataset), params["lambda"].get<double>());
  const Index n = problem->dim();
  return {std::move(problem), Vector::Zero(n)};
}

}  // namespace detail_config

inline GeneratorRegistry& GeneratorRegistry::global() {
  static GeneratorRegistry registry = [] {
    GeneratorRegistry r;
    r.add("structured_quadratic", detail_config::make_structured_quadratic,
          detail_config::normalize_structured_quadratic);
    r.add("structured_quartic", detail_config::make_structured_quartic,
          detail_config::normalize_structured_quartic);
    r.add("poisson_control", detail_config::make_poisson_control,
          detail_config::normalize_poisson_control);
    r.add("logistic", detail_config::make_logistic, detail_config::normalize_logistic);
    return r;
  }();
  return registry;
}

}  // namespace slbfgs::bench
