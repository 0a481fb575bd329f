#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "slsdp/model.hpp"

namespace slsdp {

/// Cell ranges and protocol for a timing sweep. Cells are the cartesian
/// product of the dimension lists; nu/ny left empty track nx cell-wise.
/// Allowance entries are absolute when positive and horizon-relative when
/// zero or negative (value + T), so one config can say "T-2" for every T.
struct SweepConfig {
  std::vector<Eigen::Index> nx;
  std::vector<Eigen::Index> nu;  // empty: match nx
  std::vector<Eigen::Index> ny;  // empty: match nx
  std::vector<Eigen::Index> horizons;
  double alpha = 0.2;
  std::vector<std::string> objectives = {"h2"};
  std::vector<std::string> solvers = {"dp"};
  std::vector<long> allowances;  // used by dp-approx only
  int repetitions = 5;

  static SweepConfig from_json(const nlohmann::json& doc);
  void validate() const;
};

/// One timed run. Residuals come from verify_response on the returned
/// response; the clock covers the solver call only (which itself includes
/// building the vectorized matrices), never serialization or verification.
struct BenchRecord {
  Eigen::Index nx = 0, nu = 0, ny = 0, horizon = 0;
  double alpha = 0.0;
  std::string objective;
  std::string solver;
  Eigen::Index allowance = 0;  // 0 when the solver takes none
  int rep = 0;
  double wall_time_s = 0.0;
  double objective_value = 0.0;
  double max_residual = 0.0;
  double termination_residual = 0.0;
  bool success = false;
};

/// Runs every (cell x objective x solver x allowance x repetition) task.
/// Failures are recorded per task and do not stop the sweep. With
/// parallel = true, tasks run on worker threads (capped by SLS_DP_THREADS);
/// sequential execution is the default to keep timings contention-free.
/// progress, when non-null, receives one line per finished task.
std::vector<BenchRecord> run_sweep(const SweepConfig& config, bool parallel,
                                   std::ostream* progress = nullptr);

/// Fixed schema: nx,nu,ny,T,alpha,objective,solver,allowance,rep,
/// wall_time_s,objective_value,max_residual,termination_residual,success.
void write_csv(const std::vector<BenchRecord>& records, std::ostream& out);
std::vector<BenchRecord> read_csv(std::istream& in);

/// Medians over repetitions for each (cell, objective, solver, allowance)
/// group, successes only; failures surface through "success_rate".
nlohmann::json summarize(const std::vector<BenchRecord>& records);

/// {x: [...], series: {name: [...]}} with one median wall-time series per
/// solver along the chosen axis (nx | nu | ny | T | allowance); the
/// allowance axis adds a termination-residual series per solver.
nlohmann::json plot_series(const std::vector<BenchRecord>& records,
                           const std::string& axis);

}  // namespace slsdp
