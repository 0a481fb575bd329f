#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "slsdp/bench.hpp"
#include "slsdp/dp.hpp"
#include "slsdp/json_io.hpp"
#include "slsdp/model.hpp"
#include "slsdp/objectives.hpp"

namespace {

struct SolveArgs {
  Eigen::Index nx = 5, nu = 5, ny = 5, horizon = 10;
  double alpha = 0.2;
  std::string objective = "h2";
  Eigen::Index allowance = 0;  // 0: full recursion
  std::string out;
};

struct VerifyArgs {
  std::string response_file;
  double tol = 1e-6;
  Eigen::Index nx = 0, nu = 0, ny = 0;
  double alpha = 0.2;
};

struct SweepArgs {
  std::string config_file;
  std::string csv_out = "results.csv";
  std::string summary_out;
  bool parallel = false;
  bool quiet = false;
};

struct PlotArgs {
  std::string csv_file;
  std::string axis = "nx";
  std::string out;
};

std::unique_ptr<slsdp::CostToGoModel> make_objective(const std::string& name,
                                                     Eigen::Index state_dim,
                                                     Eigen::Index input_dim) {
  if (name == "lq") {
    return std::make_unique<slsdp::LqObjective>(
        slsdp::lq_default_weights(state_dim, input_dim));
  }
  return std::make_unique<slsdp::H2Objective>(
      slsdp::h2_default_weights(state_dim, input_dim));
}

int cmd_solve(const SolveArgs& args) {
  const slsdp::Plant plant =
      slsdp::stochastic_chain(args.nx, args.nu, args.ny, args.alpha);
  const Eigen::Index state_dim =
      args.nx * args.nx + args.nx * args.ny + args.nu * args.nx;
  const auto objective =
      make_objective(args.objective, state_dim, args.nu * args.ny);

  const auto started = std::chrono::steady_clock::now();
  const slsdp::SolveResult result =
      args.allowance > 0
          ? slsdp::solve_approx(plant, *objective, args.horizon,
                                args.allowance)
          : slsdp::solve(plant, *objective, args.horizon);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();

  const slsdp::ResidualReport report =
      slsdp::verify_response(plant, result.response);
  const nlohmann::json doc = slsdp::response_document(plant, result.response);

  std::ostream* summary = &std::cout;
  if (args.out.empty()) {
    std::cout << doc.dump(2) << '\n';
    summary = &std::cerr;
  } else {
    std::ofstream file(args.out);
    if (!file) {
      std::cerr << "cannot write " << args.out << '\n';
      return 2;
    }
    file << doc.dump(2) << '\n';
  }
  *summary << "objective=" << result.objective
           << " max_residual=" << report.max_residual()
           << " termination_residual=" << result.termination_residual
           << " time_s=" << seconds << '\n';
  return 0;
}

int cmd_verify(const VerifyArgs& args) {
  std::ifstream file(args.response_file);
  if (!file) {
    std::cerr << "cannot read " << args.response_file << '\n';
    return 2;
  }
  nlohmann::json doc;
  file >> doc;
  const slsdp::SystemResponse resp = slsdp::response_from_json(doc);

  std::unique_ptr<slsdp::Plant> plant;
  if (doc.contains("A") && doc.contains("B") && doc.contains("C")) {
    plant = std::make_unique<slsdp::Plant>(slsdp::plant_from_json(doc));
  } else if (args.nx > 0) {
    plant = std::make_unique<slsdp::Plant>(slsdp::stochastic_chain(
        args.nx, args.nu > 0 ? args.nu : args.nx,
        args.ny > 0 ? args.ny : args.nx, args.alpha));
  } else {
    std::cerr << "response file has no plant; pass --nx/--nu/--ny/--alpha\n";
    return 2;
  }

  const slsdp::ResidualReport report = slsdp::verify_response(*plant, resp);
  std::cout << slsdp::to_json(report).dump(2) << '\n';
  return report.max_residual() <= args.tol ? 0 : 1;
}

int cmd_sweep(const SweepArgs& args) {
  std::ifstream file(args.config_file);
  if (!file) {
    std::cerr << "cannot read " << args.config_file << '\n';
    return 2;
  }
  nlohmann::json doc;
  file >> doc;
  const slsdp::SweepConfig config = slsdp::SweepConfig::from_json(doc);

  const std::vector<slsdp::BenchRecord> records =
      slsdp::run_sweep(config, args.parallel,
                       args.quiet ? nullptr : &std::cerr);

  std::ofstream csv(args.csv_out);
  if (!csv) {
    std::cerr << "cannot write " << args.csv_out << '\n';
    return 2;
  }
  slsdp::write_csv(records, csv);

  const std::string summary_path =
      args.summary_out.empty() ? args.csv_out + ".summary.json"
                               : args.summary_out;
  std::ofstream summary(summary_path);
  if (!summary) {
    std::cerr << "cannot write " << summary_path << '\n';
    return 2;
  }
  summary << slsdp::summarize(records).dump(2) << '\n';

  std::size_t failures = 0;
  for (const auto& r : records) {
    if (!r.success) ++failures;
  }
  std::cout << records.size() << " runs, " << failures << " failed; csv="
            << args.csv_out << " summary=" << summary_path << '\n';
  return 0;
}

int cmd_plotdata(const PlotArgs& args) {
  std::ifstream file(args.csv_file);
  if (!file) {
    std::cerr << "cannot read " << args.csv_file << '\n';
    return 2;
  }
  const std::vector<slsdp::BenchRecord> records = slsdp::read_csv(file);
  const nlohmann::json doc = slsdp::plot_series(records, args.axis);
  if (args.out.empty()) {
    std::cout << doc.dump(2) << '\n';
  } else {
    std::ofstream out(args.out);
    if (!out) {
      std::cerr << "cannot write " << args.out << '\n';
      return 2;
    }
    out << doc.dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FIR output-feedback controller synthesis and benchmarks"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  CLI::App* solve = app.add_subcommand(
      "solve", "Synthesize a controller for a stochastic chain");
  solve->add_option("--nx", solve_args.nx, "State dimension")->required();
  solve->add_option("--nu", solve_args.nu, "Input dimension")->required();
  solve->add_option("--ny", solve_args.ny, "Measurement dimension")
      ->required();
  solve->add_option("--horizon", solve_args.horizon, "FIR horizon T")
      ->required();
  solve->add_option("--alpha", solve_args.alpha, "Chain mixing rate");
  solve->add_option("--objective", solve_args.objective, "h2 or lq")
      ->check(CLI::IsMember({"h2", "lq"}));
  solve->add_option("--allowance", solve_args.allowance,
                    "Approximate mode: constrain steps allowance..T only");
  solve->add_option("--out", solve_args.out,
                    "Response JSON path (default: stdout)");

  VerifyArgs verify_args;
  CLI::App* verify = app.add_subcommand(
      "verify", "Check the constraint residuals of a response file");
  verify->add_option("response", verify_args.response_file,
                     "Response JSON document")
      ->required();
  verify->add_option("--tol", verify_args.tol,
                     "Maximum residual accepted as feasible");
  verify->add_option("--nx", verify_args.nx,
                     "Chain plant fallback when the file embeds none");
  verify->add_option("--nu", verify_args.nu, "Fallback input dimension");
  verify->add_option("--ny", verify_args.ny, "Fallback measurement dimension");
  verify->add_option("--alpha", verify_args.alpha, "Fallback mixing rate");

  SweepArgs sweep_args;
  CLI::App* sweep =
      app.add_subcommand("sweep", "Run a timing sweep from a JSON config");
  sweep->add_option("--config", sweep_args.config_file, "SweepConfig JSON")
      ->required();
  sweep->add_option("--csv-out", sweep_args.csv_out, "Record CSV path");
  sweep->add_option("--summary-out", sweep_args.summary_out,
                    "Median summary JSON path (default: <csv>.summary.json)");
  sweep->add_flag("--parallel", sweep_args.parallel,
                  "Run cells on worker threads (SLS_DP_THREADS caps)");
  sweep->add_flag("--quiet", sweep_args.quiet, "Suppress progress lines");

  PlotArgs plot_args;
  CLI::App* plot = app.add_subcommand(
      "plotdata", "Aggregate a sweep CSV into plottable series");
  plot->add_option("--csv", plot_args.csv_file, "Sweep CSV")->required();
  plot->add_option("--axis", plot_args.axis, "nx | nu | ny | T | allowance");
  plot->add_option("--out", plot_args.out, "Series JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(solve)) return cmd_solve(solve_args);
    if (app.got_subcommand(verify)) return cmd_verify(verify_args);
    if (app.got_subcommand(sweep)) return cmd_sweep(sweep_args);
    if (app.got_subcommand(plot)) return cmd_plotdata(plot_args);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
