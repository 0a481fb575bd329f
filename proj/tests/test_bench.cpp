#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "slsdp/bench.hpp"

using namespace slsdp;

namespace {

BenchRecord make_record(Eigen::Index nx, Eigen::Index horizon,
                        const std::string& solver, int rep, double wall,
                        double objective) {
  BenchRecord r;
  r.nx = nx;
  r.nu = nx;
  r.ny = nx;
  r.horizon = horizon;
  r.alpha = 0.2;
  r.objective = "h2";
  r.solver = solver;
  r.allowance = 0;
  r.rep = rep;
  r.wall_time_s = wall;
  r.objective_value = objective;
  r.max_residual = 3.25e-12;
  r.termination_residual = 1.5e-13;
  r.success = true;
  return r;
}

nlohmann::json base_config() {
  nlohmann::json doc;
  doc["nx"] = {5};
  doc["T"] = {10};
  return doc;
}

}  // namespace

TEST_CASE("csv header names every column in order") {
  std::ostringstream out;
  write_csv({}, out);
  CHECK(out.str() ==
        "nx,nu,ny,T,alpha,objective,solver,allowance,rep,wall_time_s,"
        "objective_value,max_residual,termination_residual,success\n");
}

TEST_CASE("csv round trip preserves every field") {
  std::vector<BenchRecord> records;
  records.push_back(make_record(5, 10, "dp", 0, 0.123456789123, 42.5));
  records.push_back(make_record(8, 12, "qp", 1, 17.75, 1.0 / 3.0));
  records[1].allowance = 6;
  records[1].objective = "lq";
  BenchRecord failed = make_record(5, 10, "dp-approx", 2, 0.25, 0.0);
  failed.success = false;
  failed.objective_value = std::nan("");
  failed.max_residual = std::nan("");
  failed.termination_residual = std::nan("");
  records.push_back(failed);

  std::stringstream io;
  write_csv(records, io);
  const std::vector<BenchRecord> back = read_csv(io);
  REQUIRE(back.size() == 3);

  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].nx == records[i].nx);
    CHECK(back[i].nu == records[i].nu);
    CHECK(back[i].ny == records[i].ny);
    CHECK(back[i].horizon == records[i].horizon);
    CHECK(back[i].alpha == records[i].alpha);
    CHECK(back[i].objective == records[i].objective);
    CHECK(back[i].solver == records[i].solver);
    CHECK(back[i].allowance == records[i].allowance);
    CHECK(back[i].rep == records[i].rep);
    CHECK(std::abs(back[i].wall_time_s - records[i].wall_time_s) <= 1e-9);
    CHECK(back[i].success == records[i].success);
  }
  CHECK(std::abs(back[0].objective_value - 42.5) <= 1e-13);
  CHECK(std::abs(back[1].objective_value - 1.0 / 3.0) <= 1e-15);
  CHECK(std::abs(back[0].max_residual - 3.25e-12) <= 1e-16);
  CHECK(std::abs(back[0].termination_residual - 1.5e-13) <= 1e-17);
  CHECK(std::isnan(back[2].objective_value));
  CHECK(std::isnan(back[2].max_residual));

  std::istringstream bad("header\n1,2,3\n");
  CHECK_THROWS_AS(read_csv(bad), std::invalid_argument);
}

TEST_CASE("configs outside the supported grid are rejected") {
  auto expect_throw = [](nlohmann::json doc) {
    CHECK_THROWS_AS(SweepConfig::from_json(doc), std::invalid_argument);
  };

  expect_throw(nlohmann::json::object());  // no nx / T at all

  auto doc = base_config();
  doc["nx"] = {4};
  expect_throw(doc);

  doc = base_config();
  doc["nx"] = {16};
  expect_throw(doc);

  doc = base_config();
  doc["T"] = {9};
  expect_throw(doc);

  doc = base_config();
  doc["T"] = {31};
  expect_throw(doc);

  doc = base_config();
  doc["solvers"] = {"newton"};
  expect_throw(doc);

  doc = base_config();
  doc["objective"] = {"h1"};
  expect_throw(doc);

  doc = base_config();
  doc["solvers"] = {"dp-approx"};
  expect_throw(doc);  // no allowance list

  doc = base_config();
  doc["repetitions"] = 0;
  expect_throw(doc);

  doc = base_config();
  doc["alpha"] = 1.0;
  expect_throw(doc);

  doc = base_config();
  doc["nu"] = {6};
  expect_throw(doc);  // wider than the state

  // scalars are accepted in place of one-element lists
  doc = nlohmann::json::object();
  doc["nx"] = 5;
  doc["T"] = 10;
  doc["objective"] = "lq";
  const SweepConfig cfg = SweepConfig::from_json(doc);
  CHECK(cfg.nx == std::vector<Eigen::Index>{5});
  CHECK(cfg.objectives == std::vector<std::string>{"lq"});
  CHECK(cfg.repetitions == 5);
}

TEST_CASE("negative allowances resolve against the horizon") {
  auto doc = base_config();
  doc["solvers"] = {"dp-approx"};
  doc["allowances"] = {-2};
  doc["repetitions"] = 1;
  const SweepConfig cfg = SweepConfig::from_json(doc);

  const std::vector<BenchRecord> records = run_sweep(cfg, false);
  REQUIRE(records.size() == 1);
  CHECK(records[0].allowance == 8);
  CHECK(records[0].solver == "dp-approx");
  CHECK(records[0].success);
  CHECK(records[0].wall_time_s > 0.0);
  CHECK(std::isfinite(records[0].termination_residual));
}

TEST_CASE("summaries group records and take medians of successes") {
  std::vector<BenchRecord> records;
  records.push_back(make_record(5, 10, "dp", 0, 3.0, 10.0));
  records.push_back(make_record(5, 10, "dp", 1, 1.0, 30.0));
  records.push_back(make_record(5, 10, "dp", 2, 2.0, 20.0));
  BenchRecord failed = make_record(5, 10, "dp", 3, 0.5, 0.0);
  failed.success = false;
  records.push_back(failed);
  records.push_back(make_record(5, 20, "dp", 0, 4.0, 1.0));
  records.push_back(make_record(5, 20, "dp", 1, 2.0, 3.0));

  const nlohmann::json summary = summarize(records);
  REQUIRE(summary.size() == 2);

  const auto& first = summary[0];
  CHECK(first["T"] == 10);
  CHECK(first["repetitions"] == 4);
  CHECK(first["success_rate"].get<double>() == doctest::Approx(0.75));
  CHECK(first["median_wall_time_s"].get<double>() == doctest::Approx(2.0));
  CHECK(first["median_objective_value"].get<double>() ==
        doctest::Approx(20.0));

  const auto& second = summary[1];
  CHECK(second["T"] == 20);
  CHECK(second["median_wall_time_s"].get<double>() == doctest::Approx(3.0));
}

TEST_CASE("plot series aligns solvers on a shared axis") {
  std::vector<BenchRecord> records;
  records.push_back(make_record(5, 10, "dp", 0, 1.0, 1.0));
  records.push_back(make_record(5, 10, "dp", 1, 3.0, 1.0));
  records.push_back(make_record(5, 20, "qp", 0, 7.0, 1.0));

  const nlohmann::json doc = plot_series(records, "T");
  CHECK(doc["axis"] == "T");
  CHECK(doc["x"] == nlohmann::json({10, 20}));
  CHECK(doc["series"]["dp"][0].get<double>() == doctest::Approx(2.0));
  CHECK(std::isnan(doc["series"]["dp"][1].get<double>()));
  CHECK(std::isnan(doc["series"]["qp"][0].get<double>()));
  CHECK(doc["series"]["qp"][1].get<double>() == doctest::Approx(7.0));

  CHECK_THROWS_AS(plot_series(records, "beta"), std::invalid_argument);

  const nlohmann::json empty = plot_series({}, "nx");
  CHECK(empty["x"].empty());
}

TEST_CASE("allowance plots carry the tail residual alongside the timing") {
  std::vector<BenchRecord> records;
  BenchRecord r = make_record(5, 10, "dp-approx", 0, 1.0, 1.0);
  r.allowance = 8;
  r.termination_residual = 2.5e-7;
  records.push_back(r);
  r.allowance = 9;
  r.termination_residual = 4.0e-3;
  r.rep = 1;
  records.push_back(r);

  const nlohmann::json doc = plot_series(records, "allowance");
  CHECK(doc["x"] == nlohmann::json({8, 9}));
  REQUIRE(doc["series"].contains("dp-approx:termination_residual"));
  CHECK(doc["series"]["dp-approx:termination_residual"][0].get<double>() ==
        doctest::Approx(2.5e-7));
  CHECK(doc["series"]["dp-approx:termination_residual"][1].get<double>() ==
        doctest::Approx(4.0e-3));
}

TEST_CASE("parallel sweeps produce the same set of records") {
  auto doc = base_config();
  doc["repetitions"] = 2;
  doc["objective"] = {"h2"};
  const SweepConfig cfg = SweepConfig::from_json(doc);

  const std::vector<BenchRecord> records = run_sweep(cfg, true);
  REQUIRE(records.size() == 2);
  for (const auto& r : records) {
    CHECK(r.success);
    CHECK(r.nx == 5);
    CHECK(r.horizon == 10);
    CHECK(r.solver == "dp");
    CHECK(std::isfinite(r.objective_value));
    CHECK(r.max_residual <= 1e-6);
  }
  CHECK(std::abs(records[0].objective_value - records[1].objective_value) <=
        1e-12 * (1.0 + std::abs(records[0].objective_value)));
}
