#include "slsdp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "slsdp/dp.hpp"
#include "slsdp/objectives.hpp"
#include "slsdp/qp_oracle.hpp"

namespace slsdp {

namespace {

std::vector<Eigen::Index> index_list(const nlohmann::json& doc,
                                     const std::string& key) {
  std::vector<Eigen::Index> out;
  if (!doc.contains(key)) return out;
  const auto& v = doc.at(key);
  if (v.is_number()) {
    out.push_back(v.get<Eigen::Index>());
  } else {
    for (const auto& e : v) out.push_back(e.get<Eigen::Index>());
  }
  return out;
}

std::vector<std::string> string_list(const nlohmann::json& doc,
                                     const std::string& key) {
  std::vector<std::string> out;
  if (!doc.contains(key)) return out;
  const auto& v = doc.at(key);
  if (v.is_string()) {
    out.push_back(v.get<std::string>());
  } else {
    for (const auto& e : v) out.push_back(e.get<std::string>());
  }
  return out;
}

void require_range(const std::vector<Eigen::Index>& values,
                   const std::string& name, Eigen::Index lo,
                   Eigen::Index hi) {
  for (const auto v : values) {
    if (v < lo || v > hi) {
      std::ostringstream msg;
      msg << name << " = " << v << " outside the supported range [" << lo
          << ", " << hi << "]";
      throw std::invalid_argument(msg.str());
    }
  }
}

unsigned worker_cap() {
  unsigned cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SLS_DP_THREADS")) {
    const long parsed = std::strtol(env, nullptr, 10);
    if (parsed >= 1) {
      cap = std::min<unsigned>(cap, static_cast<unsigned>(parsed));
    }
  }
  return cap;
}

struct Task {
  Eigen::Index nx, nu, ny, horizon;
  std::string objective;
  std::string solver;
  Eigen::Index allowance;  // resolved, 0 = not applicable
  int rep;
};

std::unique_ptr<CostToGoModel> make_objective(const std::string& name,
                                              Eigen::Index state_dim,
                                              Eigen::Index input_dim) {
  if (name == "h2") {
    return std::make_unique<H2Objective>(
        h2_default_weights(state_dim, input_dim));
  }
  if (name == "lq") {
    return std::make_unique<LqObjective>(
        lq_default_weights(state_dim, input_dim));
  }
  throw std::invalid_argument("unknown objective: " + name);
}

BenchRecord run_task(const Task& task, double alpha) {
  BenchRecord rec;
  rec.nx = task.nx;
  rec.nu = task.nu;
  rec.ny = task.ny;
  rec.horizon = task.horizon;
  rec.alpha = alpha;
  rec.objective = task.objective;
  rec.solver = task.solver;
  rec.allowance = task.allowance;
  rec.rep = task.rep;
  rec.objective_value = std::numeric_limits<double>::quiet_NaN();
  rec.max_residual = std::numeric_limits<double>::quiet_NaN();
  rec.termination_residual = std::numeric_limits<double>::quiet_NaN();

  const auto started = std::chrono::steady_clock::now();
  try {
    const Plant plant = stochastic_chain(task.nx, task.nu, task.ny, alpha);
    const Eigen::Index state_dim =
        task.nx * task.nx + task.nx * task.ny + task.nu * task.nx;
    const Eigen::Index input_dim = task.nu * task.ny;
    const auto objective =
        make_objective(task.objective, state_dim, input_dim);

    SystemResponse resp;
    if (task.solver == "dp") {
      const auto timer = std::chrono::steady_clock::now();
      const SolveResult result = solve(plant, *objective, task.horizon);
      rec.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                        timer)
              .count();
      rec.objective_value = result.objective;
      rec.termination_residual = result.termination_residual;
      resp = result.response;
    } else if (task.solver == "dp-approx") {
      const auto timer = std::chrono::steady_clock::now();
      const SolveResult result =
          solve_approx(plant, *objective, task.horizon, task.allowance);
      rec.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                        timer)
              .count();
      rec.objective_value = result.objective;
      rec.termination_residual = result.termination_residual;
      resp = result.response;
    } else if (task.solver == "qp") {
      const auto timer = std::chrono::steady_clock::now();
      const StackedProgram prog = assemble(plant, *objective, task.horizon);
      const QpSolution result = solve_kkt(prog);
      rec.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                        timer)
              .count();
      rec.objective_value = result.objective;
      resp = result.response;
    } else {
      throw std::invalid_argument("unknown solver: " + task.solver);
    }

    const ResidualReport report = verify_response(plant, resp);
    rec.max_residual = report.max_residual();
    if (task.solver == "qp") {
      rec.termination_residual = report.termination;
    }
    rec.success = true;
  } catch (const std::exception&) {
    rec.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      started)
            .count();
    rec.success = false;
  }
  return rec;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<long>(mid),
                   values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    const double lower =
        *std::max_element(values.begin(), values.begin() + static_cast<long>(mid));
    m = 0.5 * (m + lower);
  }
  return m;
}

}  // namespace

SweepConfig SweepConfig::from_json(const nlohmann::json& doc) {
  SweepConfig cfg;
  cfg.nx = index_list(doc, "nx");
  cfg.nu = index_list(doc, "nu");
  cfg.ny = index_list(doc, "ny");
  cfg.horizons = index_list(doc, "T");
  if (doc.contains("alpha")) cfg.alpha = doc.at("alpha").get<double>();
  if (doc.contains("objective")) {
    cfg.objectives = string_list(doc, "objective");
  }
  if (doc.contains("solvers")) cfg.solvers = string_list(doc, "solvers");
  if (doc.contains("allowances")) {
    for (const auto& e : doc.at("allowances")) {
      cfg.allowances.push_back(e.get<long>());
    }
  }
  if (doc.contains("repetitions")) {
    cfg.repetitions = doc.at("repetitions").get<int>();
  }
  cfg.validate();
  return cfg;
}

void SweepConfig::validate() const {
  if (nx.empty() || horizons.empty()) {
    throw std::invalid_argument("config needs at least one nx and one T");
  }
  require_range(nx, "nx", 5, 15);
  require_range(nu, "nu", 5, 15);
  require_range(ny, "ny", 5, 15);
  require_range(horizons, "T", 10, 30);
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1)");
  }
  if (repetitions < 1) {
    throw std::invalid_argument("repetitions must be at least 1");
  }
  for (const auto& o : objectives) {
    if (o != "h2" && o != "lq") {
      throw std::invalid_argument("unknown objective: " + o);
    }
  }
  bool wants_allowance = false;
  for (const auto& s : solvers) {
    if (s != "dp" && s != "dp-approx" && s != "qp") {
      throw std::invalid_argument("unknown solver: " + s);
    }
    wants_allowance = wants_allowance || s == "dp-approx";
  }
  if (wants_allowance && allowances.empty()) {
    throw std::invalid_argument("dp-approx requires an allowance list");
  }
  const auto& nu_cells = nu.empty() ? nx : nu;
  const auto& ny_cells = ny.empty() ? nx : ny;
  for (const auto x : nx) {
    for (const auto u : nu_cells) {
      if (!nu.empty() && u > x) {
        throw std::invalid_argument("cell has nu > nx");
      }
    }
    for (const auto y : ny_cells) {
      if (!ny.empty() && y > x) {
        throw std::invalid_argument("cell has ny > nx");
      }
    }
  }
}

std::vector<BenchRecord> run_sweep(const SweepConfig& config, bool parallel,
                                   std::ostream* progress) {
  config.validate();

  std::vector<Task> tasks;
  const auto& nu_list =
      config.nu.empty() ? std::vector<Eigen::Index>{} : config.nu;
  const auto& ny_list =
      config.ny.empty() ? std::vector<Eigen::Index>{} : config.ny;
  for (const auto nx : config.nx) {
    const std::vector<Eigen::Index> nus =
        nu_list.empty() ? std::vector<Eigen::Index>{nx} : nu_list;
    const std::vector<Eigen::Index> nys =
        ny_list.empty() ? std::vector<Eigen::Index>{nx} : ny_list;
    for (const auto nu : nus) {
      for (const auto ny : nys) {
        for (const auto T : config.horizons) {
          for (const auto& objective : config.objectives) {
            for (const auto& solver : config.solvers) {
              std::vector<Eigen::Index> allowances{0};
              if (solver == "dp-approx") {
                allowances.clear();
                for (const long a : config.allowances) {
                  allowances.push_back(a > 0 ? a : T + a);
                }
              }
              for (const auto allowance : allowances) {
                for (int rep = 0; rep < config.repetitions; ++rep) {
                  tasks.push_back(Task{nx, nu, ny, T, objective, solver,
                                       allowance, rep});
                }
              }
            }
          }
        }
      }
    }
  }

  std::vector<BenchRecord> records(tasks.size());
  std::mutex progress_mutex;
  const auto report = [&](std::size_t i) {
    if (!progress) return;
    const std::lock_guard<std::mutex> lock(progress_mutex);
    const BenchRecord& r = records[i];
    *progress << r.solver << " nx=" << r.nx << " nu=" << r.nu
              << " ny=" << r.ny << " T=" << r.horizon;
    if (r.allowance > 0) *progress << " Ta=" << r.allowance;
    *progress << " " << r.objective << " rep=" << r.rep << ": "
              << (r.success ? "ok" : "FAILED") << " (" << std::fixed
              << std::setprecision(4) << r.wall_time_s << " s)\n"
              << std::defaultfloat;
  };

  const unsigned workers =
      parallel ? std::min<unsigned>(worker_cap(),
                                    static_cast<unsigned>(tasks.size()))
               : 1;
  if (workers <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      records[i] = run_task(tasks[i], config.alpha);
      report(i);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < tasks.size();
             i = next.fetch_add(1)) {
          records[i] = run_task(tasks[i], config.alpha);
          report(i);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  return records;
}

void write_csv(const std::vector<BenchRecord>& records, std::ostream& out) {
  out << "nx,nu,ny,T,alpha,objective,solver,allowance,rep,wall_time_s,"
         "objective_value,max_residual,termination_residual,success\n";
  for (const auto& r : records) {
    out << r.nx << ',' << r.nu << ',' << r.ny << ',' << r.horizon << ','
        << std::setprecision(10) << r.alpha << ',' << r.objective << ','
        << r.solver << ',' << r.allowance << ',' << r.rep << ',' << std::fixed
        << std::setprecision(9) << r.wall_time_s << std::defaultfloat << ','
        << std::setprecision(17) << r.objective_value << ','
        << std::setprecision(6) << r.max_residual << ','
        << r.termination_residual << ',' << (r.success ? 1 : 0) << '\n';
  }
}

std::vector<BenchRecord> read_csv(std::istream& in) {
  std::vector<BenchRecord> records;
  std::string line;
  if (!std::getline(in, line)) return records;

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 14) {
      throw std::invalid_argument("malformed record: " + line);
    }
    BenchRecord r;
    r.nx = std::stol(fields[0]);
    r.nu = std::stol(fields[1]);
    r.ny = std::stol(fields[2]);
    r.horizon = std::stol(fields[3]);
    r.alpha = std::stod(fields[4]);
    r.objective = fields[5];
    r.solver = fields[6];
    r.allowance = std::stol(fields[7]);
    r.rep = std::stoi(fields[8]);
    r.wall_time_s = std::stod(fields[9]);
    r.objective_value = std::stod(fields[10]);
    r.max_residual = std::stod(fields[11]);
    r.termination_residual = std::stod(fields[12]);
    r.success = fields[13] == "1";
    records.push_back(std::move(r));
  }
  return records;
}

nlohmann::json summarize(const std::vector<BenchRecord>& records) {
  using Key = std::tuple<Eigen::Index, Eigen::Index, Eigen::Index,
                         Eigen::Index, std::string, std::string, Eigen::Index>;
  struct Group {
    double alpha = 0.0;
    std::vector<double> times, objectives, residuals, terminations;
    int total = 0, succeeded = 0;
  };
  std::map<Key, Group> groups;
  for (const auto& r : records) {
    auto& g = groups[Key{r.nx, r.nu, r.ny, r.horizon, r.objective, r.solver,
                         r.allowance}];
    g.alpha = r.alpha;
    ++g.total;
    if (r.success) {
      ++g.succeeded;
      g.times.push_back(r.wall_time_s);
      g.objectives.push_back(r.objective_value);
      g.residuals.push_back(r.max_residual);
      g.terminations.push_back(r.termination_residual);
    }
  }

  nlohmann::json out = nlohmann::json::array();
  for (auto& [key, g] : groups) {
    nlohmann::json entry;
    entry["nx"] = std::get<0>(key);
    entry["nu"] = std::get<1>(key);
    entry["ny"] = std::get<2>(key);
    entry["T"] = std::get<3>(key);
    entry["alpha"] = g.alpha;
    entry["objective"] = std::get<4>(key);
    entry["solver"] = std::get<5>(key);
    entry["allowance"] = std::get<6>(key);
    entry["repetitions"] = g.total;
    entry["success_rate"] =
        g.total > 0 ? static_cast<double>(g.succeeded) / g.total : 0.0;
    entry["median_wall_time_s"] = median(g.times);
    entry["median_objective_value"] = median(g.objectives);
    entry["median_max_residual"] = median(g.residuals);
    entry["median_termination_residual"] = median(g.terminations);
    out.push_back(std::move(entry));
  }
  return out;
}

nlohmann::json plot_series(const std::vector<BenchRecord>& records,
                           const std::string& axis) {
  const auto value_of = [&](const BenchRecord& r) -> Eigen::Index {
    if (axis == "nx") return r.nx;
    if (axis == "nu") return r.nu;
    if (axis == "ny") return r.ny;
    if (axis == "T") return r.horizon;
    if (axis == "allowance") return r.allowance;
    throw std::invalid_argument("unknown axis: " + axis +
                                " (use nx | nu | ny | T | allowance)");
  };

  std::vector<Eigen::Index> xs;
  for (const auto& r : records) xs.push_back(value_of(r));
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  std::map<std::string, std::map<Eigen::Index, std::vector<double>>> times;
  std::map<std::string, std::map<Eigen::Index, std::vector<double>>> terms;
  for (const auto& r : records) {
    if (!r.success) continue;
    times[r.solver][value_of(r)].push_back(r.wall_time_s);
    terms[r.solver][value_of(r)].push_back(r.termination_residual);
  }

  nlohmann::json series = nlohmann::json::object();
  for (auto& [solver, by_x] : times) {
    nlohmann::json ys = nlohmann::json::array();
    for (const auto x : xs) {
      auto it = by_x.find(x);
      ys.push_back(it == by_x.end()
                       ? std::numeric_limits<double>::quiet_NaN()
                       : median(it->second));
    }
    series[solver] = std::move(ys);
  }
  if (axis == "allowance") {
    for (auto& [solver, by_x] : terms) {
      nlohmann::json ys = nlohmann::json::array();
      for (const auto x : xs) {
        auto it = by_x.find(x);
        ys.push_back(it == by_x.end()
                         ? std::numeric_limits<double>::quiet_NaN()
                         : median(it->second));
      }
      series[solver + ":termination_residual"] = std::move(ys);
    }
  }

  nlohmann::json out;
  out["axis"] = axis;
  out["x"] = xs;
  out["series"] = std::move(series);
  return out;
}

}  // namespace slsdp
