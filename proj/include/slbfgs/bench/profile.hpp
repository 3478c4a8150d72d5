#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "slbfgs/bench/csv.hpp"
#include "slbfgs/types.hpp"

// Extended performance profiles. For each (problem p, solver s) with cost
// t[p][s], the ratio is taken against the best of the *other* solvers,
//
//   pi[p][s] = t[p][s] / min_{i != s} t[p][i],
//
// so ratios below one indicate that a solver strictly beat every competitor.
// Failed runs carry an infinite cost and never count as within any ratio.
// The profile of solver s is rho_s(tau) = |{p : pi[p][s] <= tau}| / n_p.

namespace slbfgs::bench {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct ProfileTable {
  std::vector<std::string> solvers;
  std::vector<std::string> problems;
  std::string metric;
  /// Raw per-problem costs, problems x solvers; failures are +inf.
  Matrix t;
  /// Ratios to the best competing solver, problems x solvers.
  Matrix pi;
  /// Log-spaced ratio grid covering all finite positive ratios.
  std::vector<double> tau_grid;
  /// rho(grid point, solver): fraction of problems with pi <= tau.
  Matrix rho;

  /// Exact profile value for one solver at an arbitrary ratio.
  double rho_at(Index solver, double tau) const {
    const Index np = static_cast<Index>(problems.size());
    if (np == 0) return 0.0;
    Index hits = 0;
    for (Index p = 0; p < np; ++p)
      if (pi(p, solver) <= tau) ++hits;
    return static_cast<double>(hits) / static_cast<double>(np);
  }
};

namespace detail_profile {

inline double ratio_to_best_competitor(const Matrix& t, Index p, Index s) {
  if (!std::isfinite(t(p, s))) return kInf;
  double best_other = kInf;
  for (Index i = 0; i < t.cols(); ++i)
    if (i != s && std::isfinite(t(p, i))) best_other = std::min(best_other, t(p, i));
  if (best_other == kInf) return 0.0;  // only this solver succeeded
  if (best_other == 0.0) return t(p, s) == 0.0 ? 1.0 : kInf;
  return t(p, s) / best_other;
}

inline std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> grid;
  if (!(lo > 0.0) || !(hi >= lo)) return {1.0};
  if (lo == hi || points < 2) return {lo};
  grid.reserve(static_cast<std::size_t>(points));
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < points; ++i) {
    const double f = static_cast<double>(i) / (points - 1);
    grid.push_back(std::exp(llo + f * (lhi - llo)));
  }
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

}  // namespace detail_profile

/// Builds a profile from a fully populated cost matrix (problems x solvers).
inline ProfileTable performance_profile(std::vector<std::string> solvers,
                                        std::vector<std::string> problems,
                                        const Matrix& t, std::string metric,
                                        int grid_points = 101) {
  if (solvers.size() < 2)
    throw TooFewSolvers("performance profiles need at least two solvers, got " +
                        std::to_string(solvers.size()));
  detail::require(t.rows() == static_cast<Index>(problems.size()) &&
                      t.cols() == static_cast<Index>(solvers.size()),
                  "cost matrix must be problems x solvers");

  ProfileTable table;
  table.solvers = std::move(solvers);
  table.problems = std::move(problems);
  table.metric = std::move(metric);
  table.t = t;
  table.pi.resize(t.rows(), t.cols());
  for (Index p = 0; p < t.rows(); ++p)
    for (Index s = 0; s < t.cols(); ++s)
      table.pi(p, s) = detail_profile::ratio_to_best_competitor(t, p, s);

  double lo = kInf, hi = 0.0;
  for (Index p = 0; p < table.pi.rows(); ++p)
    for (Index s = 0; s < table.pi.cols(); ++s) {
      const double r = table.pi(p, s);
      if (std::isfinite(r) && r > 0.0) {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
    }
  table.tau_grid = detail_profile::log_grid(lo, hi, grid_points);

  table.rho.resize(static_cast<Index>(table.tau_grid.size()),
                   static_cast<Index>(table.solvers.size()));
  for (Index g = 0; g < table.rho.rows(); ++g)
    for (Index s = 0; s < table.rho.cols(); ++s)
      table.rho(g, s) = table.rho_at(s, table.tau_grid[static_cast<std::size_t>(g)]);
  return table;
}

/// One parsed summary.csv row.
struct SummaryRow {
  std::string problem;
  std::string seed;  // empty when the file has no seed column
  std::string solver;
  std::string status;
  double iters = 0.0;
  double f_evals = 0.0;
  double time = 0.0;
};

inline std::vector<SummaryRow> parse_summary(const CsvTable& csv) {
  const int c_problem = csv.column("problem");
  const int c_seed = csv.column("seed");
  const int c_solver = csv.column("solver");
  const int c_status = csv.column("status");
  const int c_iters = csv.column("iters");
  const int c_fev = csv.column("f_evals");
  const int c_time = csv.column("time");
  if (c_problem < 0 || c_solver < 0 || c_status < 0 || c_iters < 0 || c_fev < 0 ||
      c_time < 0)
    throw ConfigError(
        "summary CSV must have columns problem,solver,status,iters,f_evals,time");
  std::vector<SummaryRow> rows;
  rows.reserve(csv.rows.size());
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& f = csv.rows[r];
    const std::size_t needed = static_cast<std::size_t>(
        std::max({c_problem, c_seed, c_solver, c_status, c_iters, c_fev, c_time})) + 1;
    if (f.size() < needed)
      throw ConfigError("summary CSV row " + std::to_string(r + 2) +
                        " has too few fields");
    SummaryRow row;
    row.problem = f[static_cast<std::size_t>(c_problem)];
    if (c_seed >= 0) row.seed = f[static_cast<std::size_t>(c_seed)];
    row.solver = f[static_cast<std::size_t>(c_solver)];
    row.status = f[static_cast<std::size_t>(c_status)];
    try {
      row.iters = std::stod(f[static_cast<std::size_t>(c_iters)]);
      row.f_evals = std::stod(f[static_cast<std::size_t>(c_fev)]);
      row.time = std::stod(f[static_cast<std::size_t>(c_time)]);
    } catch (const std::exception&) {
      throw ConfigError("summary CSV row " + std::to_string(r + 2) +
                        " has a non-numeric metric field");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Builds a profile from summary rows. Each (problem, seed) pair is one
/// profile instance; a solver missing an instance, or any run whose status is
/// not "converged", counts as a failure on it.
inline ProfileTable performance_profile(const std::vector<SummaryRow>& rows,
                                        const std::string& metric,
                                        int grid_points = 101) {
  if (metric != "iterations" && metric != "time" && metric != "f_evals")
    throw ConfigError("unknown profile metric '" + metric +
                      "' (expected iterations, time, or f_evals)");

  std::vector<std::string> solvers, problems;
  std::map<std::string, Index> solver_index, problem_index;
  for (const auto& row : rows) {
    if (solver_index.emplace(row.solver, static_cast<Index>(solvers.size())).second)
      solvers.push_back(row.solver);
    const std::string key =
        row.seed.empty() ? row.problem : row.problem + "#s" + row.seed;
    if (problem_index.emplace(key, static_cast<Index>(problems.size())).second)
      problems.push_back(key);
  }
  if (solvers.size() < 2)
    throw TooFewSolvers("performance profiles need at least two solvers, got " +
                        std::to_string(solvers.size()));

  Matrix t = Matrix::Constant(static_cast<Index>(problems.size()),
                              static_cast<Index>(solvers.size()), kInf);
  Matrix seen = Matrix::Zero(t.rows(), t.cols());
  for (const auto& row : rows) {
    const std::string key =
        row.seed.empty() ? row.problem : row.problem + "#s" + row.seed;
    const Index p = problem_index.at(key);
    const Index s = solver_index.at(row.solver);
    if (seen(p, s) != 0.0)
      throw ConfigError("duplicate summary row for problem '" + key +
                        "', solver '" + row.solver + "'");
    seen(p, s) = 1.0;
    if (row.status == "converged") {
      if (metric == "iterations")
        t(p, s) = row.iters;
      else if (metric == "time")
        t(p, s) = row.time;
      else
        t(p, s) = row.f_evals;
    }
  }
  return performance_profile(std::move(solvers), std::move(problems), t, metric,
                             grid_points);
}

/// Long-format plot data: one series per solver over the ratio grid, plus a
/// two-point vertical marker series "tau_ref" at the classical tau = 1 line.
/// An empty problem set yields just the header.
inline std::string emit_profile_plotdata(const ProfileTable& table) {
  std::string out = "series,tau,rho\n";
  if (table.problems.empty()) return out;
  for (Index s = 0; s < static_cast<Index>(table.solvers.size()); ++s) {
    for (std::size_t g = 0; g < table.tau_grid.size(); ++g) {
      out += table.solvers[static_cast<std::size_t>(s)];
      out += ',';
      out += format_double(table.tau_grid[g], 12);
      out += ',';
      out += format_double(table.rho(static_cast<Index>(g), s), 12);
      out += '\n';
    }
  }
  out += "tau_ref,1,0\n";
  out += "tau_ref,1,1\n";
  return out;
}

}  // namespace slbfgs::bench
