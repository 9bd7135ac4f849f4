#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "edmcal/geometry.hpp"
#include "edmcal/harness.hpp"
#include "edmcal/matrix_csv.hpp"

using edmcal::Matrix;
namespace geometry = edmcal::geometry;
namespace harness = edmcal::harness;
namespace observation = edmcal::observation;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("edmcal_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

harness::ExperimentConfig tiny_config() {
  harness::ExperimentConfig config;
  config.kind = harness::ScenarioKind::kDisc;
  config.n = 10;
  config.dim = 2;
  config.disc_radius = 2.0;
  config.d_max = 3.0;
  config.p = 0.95;
  config.varsigma = 0.01;
  config.solvers = {"emc2", "mds-map"};
  config.trials = 2;
  config.seed = 7;
  config.n_values = {8, 10};
  return config;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config loading applies defaults and overrides") {
  const std::string dir = temp_dir("config");
  const std::string path = dir + "/config.json";
  {
    std::ofstream out(path);
    out << R"({
      "scenario": {"kind": "cube", "n": 40},
      "trials": 5,
      "seed": 99,
      "sstress": {"restarts": 2},
      "sweep": {"missing_values": [0.1, 0.5]}
    })";
  }
  const auto config = harness::load_config(path);
  CHECK(config.kind == harness::ScenarioKind::kCube);
  CHECK(config.n == 40);       // override
  CHECK(config.dim == 3);      // cube default
  CHECK(config.additive_std == doctest::Approx(0.02));
  CHECK(config.trials == 5);
  CHECK(config.seed == 99);
  CHECK(config.sstress.restarts == 2);
  CHECK(config.missing_values == std::vector<double>{0.1, 0.5});
}

TEST_CASE("unknown config keys are rejected") {
  const std::string dir = temp_dir("badconfig");
  const std::string path = dir + "/config.json";
  {
    std::ofstream out(path);
    out << R"({"scenario": {"kind": "disc", "sigma": 0.1}})";
  }
  CHECK_THROWS(harness::load_config(path));
}

TEST_CASE("fixed layouts have the documented shapes") {
  CHECK(harness::layout_distributed_18().rows() == 18);
  CHECK(harness::layout_distributed_15().rows() == 15);
  const Matrix x11 = harness::layout_planar_11();
  CHECK(x11.rows() == 11);
  // center microphone at the origin, two outer microphones 0.7 m out
  CHECK(x11.row(8).norm() == doctest::Approx(0.0));
  CHECK(x11.row(9).norm() == doctest::Approx(0.7));
  CHECK(x11.row(10).norm() == doctest::Approx(0.7));

  const Matrix x12 = harness::layout_planar_12();
  CHECK(x12.rows() == 12);
  // the extra microphone mirrors microphone 10 through the origin
  CHECK((x12.row(11) + x12.row(9)).norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("eleven-element layout masks the documented pairs at the cutoff") {
  const Matrix x = harness::layout_planar_11();
  const Matrix d = geometry::build_squared_distances(x).cwiseSqrt();
  const auto mask = observation::make_mask(d, 0.73, 1.0, 0);
  const std::vector<std::pair<int, int>> expected_missing = {
      {9, 10}, {0, 9}, {6, 9}, {7, 9}, {4, 10}, {5, 10}, {6, 10}};
  int missing = 0;
  for (int i = 0; i < 11; ++i) {
    for (int j = i + 1; j < 11; ++j) {
      if (!mask.known(i, j)) {
        ++missing;
        CHECK(std::find(expected_missing.begin(), expected_missing.end(),
                        std::make_pair(i, j)) != expected_missing.end());
      }
    }
  }
  CHECK(missing == 7);
}

TEST_CASE("twelve-element layout adds the documented missing pairs") {
  const Matrix x = harness::layout_planar_12();
  const Matrix d = geometry::build_squared_distances(x).cwiseSqrt();
  const auto mask = observation::make_mask(d, 0.73, 1.0, 0);
  // extra pairs, 1-indexed: (12,11),(10,12),(3,12),(4,12),(5,12)
  const std::vector<std::pair<int, int>> extra = {
      {10, 11}, {9, 11}, {2, 11}, {3, 11}, {4, 11}};
  for (const auto& [i, j] : extra) {
    CAPTURE(i);
    CAPTURE(j);
    CHECK_FALSE(mask.known(i, j));
  }
  int missing = 0;
  for (int i = 0; i < 12; ++i)
    for (int j = i + 1; j < 12; ++j)
      if (!mask.known(i, j)) ++missing;
  CHECK(missing == 7 + 5);
}

TEST_CASE("simulation is deterministic in the seed") {
  const auto config = tiny_config();
  const Matrix truth = harness::make_scenario_positions(config, 3);
  const auto a = harness::simulate_observation(config, truth, 12);
  const auto b = harness::simulate_observation(config, truth, 12);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sweeps emit deterministic files and exact aggregates") {
  const auto config = tiny_config();
  const auto sweep = harness::run_sweep(config, harness::SweepAxis::kN);
  CHECK(sweep.trials.size() == 2 /*axis*/ * 2 /*trials*/ * 2 /*solvers*/);

  const std::string dir_a = temp_dir("sweep_a");
  const std::string dir_b = temp_dir("sweep_b");
  harness::emit_results(sweep, dir_a);
  const auto replay = harness::run_sweep(config, harness::SweepAxis::kN);
  harness::emit_results(replay, dir_b);
  CHECK(slurp(dir_a + "/trials.csv") == slurp(dir_b + "/trials.csv"));
  CHECK(slurp(dir_a + "/aggregate.csv") == slurp(dir_b + "/aggregate.csv"));
  CHECK(slurp(dir_a + "/plot.csv") == slurp(dir_b + "/plot.csv"));

  // aggregate mean equals the arithmetic mean of the per-trial column
  const auto aggregate = sweep.aggregate();
  for (const auto& row : aggregate) {
    double sum = 0.0;
    int count = 0;
    for (const auto& trial : sweep.trials) {
      if (trial.axis_value == row.axis_value && trial.solver == row.solver &&
          !trial.failed) {
        sum += trial.calibration_error;
        ++count;
      }
    }
    REQUIRE(count == row.trials - row.failures);
    if (count > 0)
      CHECK(row.mean_calibration == doctest::Approx(sum / count).epsilon(1e-12));
  }
}

TEST_CASE("empty axis lists produce header-only files") {
  auto config = tiny_config();
  config.n_values.clear();
  const auto sweep = harness::run_sweep(config, harness::SweepAxis::kN);
  CHECK(sweep.trials.empty());
  const std::string dir = temp_dir("empty");
  harness::emit_results(sweep, dir);
  CHECK(slurp(dir + "/trials.csv") ==
        "axis,axis_value,trial,solver,seed,calibration_error,position_error,"
        "iterations,status\n");
  CHECK(slurp(dir + "/aggregate.csv") ==
        "axis,axis_value,solver,trials,failures,mean_calibration_error,"
        "std_calibration_error,mean_position_error,std_position_error\n");
}

TEST_CASE("failed solvers are recorded and the sweep continues") {
  // two separated triangles: every row has observations, so completion runs,
  // while the shortest-path baseline sees a disconnected graph and fails
  Matrix x(6, 2);
  x << 0, 0, 1, 0, 0, 1, 50, 50, 51, 50, 50, 51;
  const Matrix m = geometry::build_squared_distances(x);
  const auto mask = observation::make_mask(m.cwiseSqrt(), 3.0, 1.0, 0);
  const auto observed = observation::observe(m, mask);

  auto config = tiny_config();
  config.solvers = {"mds-map", "emc2"};
  const auto result = harness::run_real_layout(observed, x, config);
  REQUIRE(result.trials.size() == 2);
  CHECK(result.trials[0].solver == "mds-map");
  CHECK(result.trials[0].failed);
  CHECK(result.trials[0].status.find("disconnected") != std::string::npos);
  CHECK(std::isnan(result.trials[0].calibration_error));
  CHECK(result.trials[1].solver == "emc2");
  CHECK_FALSE(result.trials[1].failed);

  // a sweep with occasional failures still yields one row per trial/solver
  auto sparse = tiny_config();
  sparse.solvers = {"mds-map", "emc2"};
  sparse.d_max = 1.2;
  sparse.trials = 3;
  sparse.n_values = {10};
  const auto sweep = harness::run_sweep(sparse, harness::SweepAxis::kN);
  CHECK(sweep.trials.size() == 6);
  for (const auto& trial : sweep.trials) CHECK_FALSE(trial.status.empty());
}

TEST_CASE("real layout run covers every solver") {
  auto config = tiny_config();
  config.kind = harness::ScenarioKind::kRealLayout11;
  config.n = 11;
  config.d_max = 0.73;
  config.p = 1.0;
  config.varsigma = 0.02;
  config.solvers = {"mc", "mc2", "emc2", "mds-map", "s-stress"};
  const Matrix truth = harness::layout_planar_11();
  const auto observed = harness::simulate_observation(config, truth, 4);
  const auto result = harness::run_real_layout(observed, truth, config);
  CHECK(result.trials.size() == 5);
  for (const auto& trial : result.trials) {
    CAPTURE(trial.solver);
    CHECK_FALSE(trial.failed);
    CHECK(trial.position_error < 0.5);
  }
}

TEST_CASE("bound reports serialize to csv") {
  edmcal::theory::BoundScenario scenario;
  scenario.n_values = {20};
  scenario.trials = 2;
  const auto reports = edmcal::theory::verify_bounds(scenario);
  const std::string dir = temp_dir("bounds");
  harness::emit_bound_reports(reports, dir + "/bounds.csv");
  const std::string content = slurp(dir + "/bounds.csv");
  CHECK(content.find("norm_structured") != std::string::npos);
  CHECK(std::count(content.begin(), content.end(), '\n') == 3);
}

}  // TEST_SUITE
