#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "slbfgs/bench/config.hpp"
#include "slbfgs/bench/csv.hpp"
#include "slbfgs/solver.hpp"
#include "slbfgs/types.hpp"

// Suite runner: executes every (problem, seed, solver) combination from a
// BenchConfig on a bounded worker pool, writes one convergence trace per run
// plus summary.csv and a per-seed-averaged summary_avg.csv. A run that throws
// is recorded with status "error"; the suite always completes.

namespace slbfgs::bench {

struct RunRecord {
  std::string problem;
  std::uint64_t seed = 0;
  std::string solver;
  std::string status;  // solver status, or "error"
  std::string error_message;
  RunReport report;
};

struct SuiteResult {
  std::filesystem::path output_dir;
  std::filesystem::path summary_path;
  std::filesystem::path summary_avg_path;
  std::vector<RunRecord> runs;
};

namespace detail_suite {

inline int env_worker_count() {
  const char* raw = std::getenv("SLBFGS_WORKERS");
  if (raw == nullptr) return 0;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || v < 1) return 0;
  return static_cast<int>(std::min<long>(v, 256));
}

inline void write_trace(const std::filesystem::path& path,
                        const std::vector<TraceRow>& trace) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write trace file '" + path.string() + "'");
  out << "k,f,gnorm_inf,alpha,sigma,delta,s_dot_u\n";
  for (const auto& row : trace) {
    out << row.k << ',' << format_double(row.f) << ',' << format_double(row.gnorm_inf)
        << ',' << format_double(row.alpha) << ',' << format_double(row.sigma) << ','
        << format_double(row.delta) << ',' << format_double(row.s_dot_u) << '\n';
  }
}

}  // namespace detail_suite

/// Runs the whole suite. `workers` = 0 means: use SLBFGS_WORKERS if set,
/// otherwise the hardware concurrency, never more than the number of runs.
inline SuiteResult run_suite(const BenchConfig& cfg, Index workers = 0,
                             const GeneratorRegistry& registry =
                                 GeneratorRegistry::global()) {
  namespace fs = std::filesystem;

  SuiteResult result;
  result.output_dir = cfg.output_dir;
  std::error_code ec;
  fs::create_directories(result.output_dir, ec);
  if (ec)
    throw ConfigError("cannot create output directory '" +
                      result.output_dir.string() + "': " + ec.message());

  // Instantiate each (problem, seed) once; instances are immutable and shared
  // across solver runs and worker threads.
  struct Instance {
    std::string name;
    std::uint64_t seed;
    GeneratedProblem gen;
    bool construction_failed = false;
    std::string error_message;
  };
  std::vector<Instance> instances;
  for (const auto& ps : cfg.problems) {
    for (const std::uint64_t seed : ps.seeds) {
      Instance inst;
      inst.name = ps.name;
      inst.seed = seed;
      try {
        inst.gen = registry.make(ps.generator, ps.params, seed);
        if (ps.x0_mode == "zeros")
          inst.gen.x0 = Vector::Zero(inst.gen.problem->dim());
        else if (ps.x0_mode == "ones")
          inst.gen.x0 = Vector::Ones(inst.gen.problem->dim());
      } catch (const std::exception& e) {
        inst.construction_failed = true;
        inst.error_message = e.what();
      }
      instances.push_back(std::move(inst));
    }
  }

  const Index n_runs = static_cast<Index>(instances.size() * cfg.solvers.size());
  result.runs.resize(static_cast<std::size_t>(n_runs));

  Index pool = workers;
  if (pool <= 0) pool = detail_suite::env_worker_count();
  if (pool <= 0) pool = static_cast<Index>(std::max(1u, std::thread::hardware_concurrency()));
  pool = std::min(pool, std::max<Index>(1, n_runs));

  std::atomic<Index> next{0};
  auto worker = [&]() {
    while (true) {
      const Index id = next.fetch_add(1);
      if (id >= n_runs) break;
      const auto& inst = instances[static_cast<std::size_t>(
          id / static_cast<Index>(cfg.solvers.size()))];
      const auto& solver =
          cfg.solvers[static_cast<std::size_t>(id % static_cast<Index>(cfg.solvers.size()))];
      RunRecord rec;
      rec.problem = inst.name;
      rec.seed = inst.seed;
      rec.solver = solver.name;
      if (inst.construction_failed) {
        rec.status = "error";
        rec.error_message = inst.error_message;
      } else {
        try {
          rec.report = minimize(*inst.gen.problem, inst.gen.x0, solver.config);
          rec.status = to_string(rec.report.status);
        } catch (const std::exception& e) {
          rec.status = "error";
          rec.error_message = e.what();
        }
      }
      result.runs[static_cast<std::size_t>(id)] = std::move(rec);
    }
  };

  if (pool == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(pool));
    for (Index t = 0; t < pool; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  // Single-threaded aggregation, rows in config order.
  for (const auto& rec : result.runs) {
    const fs::path trace_path =
        result.output_dir / ("trace_" + rec.problem + "_s" + std::to_string(rec.seed) +
                             "_" + rec.solver + ".csv");
    detail_suite::write_trace(trace_path, rec.report.trace);
  }

  result.summary_path = result.output_dir / "summary.csv";
  {
    std::ofstream out(result.summary_path);
    if (!out)
      throw ConfigError("cannot write summary file '" + result.summary_path.string() +
                        "'");
    out << "problem,seed,solver,status,iters,f_evals,time\n";
    for (const auto& rec : result.runs) {
      out << rec.problem << ',' << rec.seed << ',' << rec.solver << ',' << rec.status
          << ',' << rec.report.iterations << ',' << rec.report.f_evals << ','
          << format_double(rec.report.wall_time_seconds) << '\n';
    }
  }

  result.summary_avg_path = result.output_dir / "summary_avg.csv";
  {
    std::ofstream out(result.summary_avg_path);
    if (!out)
      throw ConfigError("cannot write summary file '" +
                        result.summary_avg_path.string() + "'");
    out << "problem,solver,status,iters,f_evals,time,runs,solved\n";
    for (const auto& ps : cfg.problems) {
      for (const auto& ss : cfg.solvers) {
        double iters = 0, fev = 0, time = 0;
        Index runs = 0, solved = 0;
        for (const auto& rec : result.runs) {
          if (rec.problem != ps.name || rec.solver != ss.name) continue;
          ++runs;
          iters += static_cast<double>(rec.report.iterations);
          fev += static_cast<double>(rec.report.f_evals);
          time += rec.report.wall_time_seconds;
          if (rec.status == "converged") ++solved;
        }
        if (runs == 0) continue;
        const std::string status =
            solved == runs ? "converged" : (solved == 0 ? "failed" : "mixed");
        out << ps.name << ',' << ss.name << ',' << status << ','
            << format_double(iters / static_cast<double>(runs)) << ','
            << format_double(fev / static_cast<double>(runs)) << ','
            << format_double(time / static_cast<double>(runs)) << ',' << runs << ','
            << solved << '\n';
      }
    }
  }
  return result;
}

}  // namespace slbfgs::bench
