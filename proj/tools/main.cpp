// Command-line front end: scenario simulation, calibration from a partial
// distance matrix, Monte Carlo sweeps, bound verification, and coherence
// fitting. Exit codes: 0 success, 1 solver failure, 2 input error.

#include <CLI11.hpp>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "edmcal/baselines.hpp"
#include "edmcal/coherence.hpp"
#include "edmcal/completion.hpp"
#include "edmcal/geometry.hpp"
#include "edmcal/harness.hpp"
#include "edmcal/matrix_csv.hpp"
#include "edmcal/rng.hpp"
#include "edmcal/theory.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSolverFailure = 1;
constexpr int kExitInputError = 2;

using edmcal::Matrix;
using edmcal::Vector;
namespace harness = edmcal::harness;
namespace io = edmcal::io;

struct CommonOptions {
  std::string config_path;
  std::string outdir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<int> n;
  std::optional<double> varsigma;
  std::optional<double> d_max;
  std::optional<double> p;
  std::optional<double> jitter;
  std::optional<std::string> scenario;
  std::optional<std::vector<std::string>> solvers;
  std::optional<int> workers;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_out = true) {
  cmd->add_option("--config", opts.config_path, "JSON config file");
  if (with_out) cmd->add_option("--out", opts.outdir, "output directory");
  cmd->add_option("--seed", opts.seed, "base seed override");
  cmd->add_option("--trials", opts.trials, "trial count override");
  cmd->add_option("--n", opts.n, "point count override");
  cmd->add_option("--varsigma", opts.varsigma, "relative noise level override");
  cmd->add_option("--d-max", opts.d_max, "locality cutoff override (meters)");
  cmd->add_option("--p", opts.p, "random retention probability override");
  cmd->add_option("--jitter", opts.jitter, "jitter half width override (meters)");
  cmd->add_option("--scenario", opts.scenario,
                  "scenario kind (disc|cube|distributed-18mic|distributed-15mic|"
                  "real-layout-11mic|coherence-pipeline)");
  cmd->add_option("--solvers", opts.solvers, "solver list override");
  cmd->add_option("--workers", opts.workers, "concurrent trial workers");
}

harness::ExperimentConfig resolve_config(const CommonOptions& opts) {
  harness::ExperimentConfig config;
  if (!opts.config_path.empty()) {
    config = harness::load_config(opts.config_path);
  }
  if (opts.scenario)
    harness::apply_scenario_defaults(config, harness::scenario_from_string(*opts.scenario));
  if (opts.seed) config.seed = *opts.seed;
  if (opts.trials) config.trials = *opts.trials;
  if (opts.n) config.n = *opts.n;
  if (opts.varsigma) config.varsigma = *opts.varsigma;
  if (opts.d_max) config.d_max = *opts.d_max;
  if (opts.p) config.p = *opts.p;
  if (opts.jitter) config.jitter_halfwidth = *opts.jitter;
  if (opts.solvers) config.solvers = *opts.solvers;
  if (opts.workers) config.workers = *opts.workers;
  return config;
}

int run_simulate(const CommonOptions& opts) {
  const auto config = resolve_config(opts);
  std::filesystem::create_directories(opts.outdir);
  const Matrix truth =
      harness::make_scenario_positions(config, edmcal::mix_seed(config.seed, 1));
  const auto observed = harness::simulate_observation(config, truth, config.seed);
  io::write_positions_csv(opts.outdir + "/positions.csv", truth);
  io::write_observed_csv(opts.outdir + "/observed.csv", observed);
  std::cout << "scenario " << harness::to_string(config.kind) << ": n=" << truth.rows()
            << " known=" << observed.mask.known_count()
            << " missing_fraction=" << observed.missing_fraction() << "\n";
  std::cout << "wrote " << opts.outdir << "/positions.csv and observed.csv\n";
  return kExitOk;
}

int run_calibrate(const CommonOptions& opts, const std::string& observed_path,
                  const std::string& solver, int dim, int eta,
                  const std::string& truth_path) {
  const auto config_base = resolve_config(opts);
  auto observed = io::read_observed_csv(observed_path);
  std::filesystem::create_directories(opts.outdir);

  Matrix positions;
  Matrix completed;
  std::vector<edmcal::completion::IterationStat> history;
  if (solver == "mc" || solver == "mc2" || solver == "emc2") {
    edmcal::completion::SolverOptions solver_opts = config_base.solver;
    solver_opts.seed = edmcal::mix_seed(config_base.seed, 4);
    const auto result = edmcal::completion::solve(
        observed, dim, edmcal::completion::variant_from_string(solver), solver_opts, eta);
    positions = result.positions;
    completed = result.completed;
    history = result.history;
  } else if (solver == "mds-map") {
    positions = edmcal::baselines::mds_map(edmcal::observation::to_distances(observed), dim);
    completed = edmcal::geometry::build_squared_distances(positions);
  } else if (solver == "s-stress") {
    auto sstress_opts = config_base.sstress;
    sstress_opts.seed = edmcal::mix_seed(config_base.seed, 4);
    positions = edmcal::baselines::sstress_solve(
                    edmcal::observation::to_distances(observed), dim, sstress_opts)
                    .positions;
    completed = edmcal::geometry::build_squared_distances(positions);
  } else {
    std::cerr << "unknown solver: " << solver << "\n";
    return kExitInputError;
  }

  io::write_positions_csv(opts.outdir + "/positions.csv", positions);
  io::write_matrix_csv(opts.outdir + "/completed.csv", completed);
  {
    std::ofstream diag(opts.outdir + "/diagnostics.csv");
    diag << "iteration,cost,known_rmse\n";
    for (const auto& stat : history)
      diag << stat.iteration << ',' << io::format_double(stat.cost) << ','
           << io::format_double(stat.known_rmse) << '\n';
  }
  std::cout << "solver " << solver << ": wrote positions.csv, completed.csv, "
               "diagnostics.csv under "
            << opts.outdir << "\n";
  if (!truth_path.empty()) {
    const Matrix truth = io::read_positions_csv(truth_path);
    std::cout << "calibration_error=" << edmcal::geometry::calibration_error(truth, positions)
              << " position_error=" << edmcal::geometry::position_error(truth, positions)
              << "\n";
  }
  return kExitOk;
}

int run_sweep_cmd(const CommonOptions& opts, const std::string& axis) {
  const auto config = resolve_config(opts);
  const auto result = harness::run_sweep(config, harness::axis_from_string(axis));
  harness::emit_results(result, opts.outdir);
  int failures = 0;
  for (const auto& trial : result.trials) failures += trial.failed ? 1 : 0;
  std::cout << "sweep axis=" << axis << ": " << result.trials.size() << " rows, "
            << failures << " failures; wrote trials.csv, aggregate.csv, plot.csv under "
            << opts.outdir << "\n";
  return failures == 0 ? kExitOk : kExitSolverFailure;
}

int run_verify_bounds(const CommonOptions& opts) {
  const auto config = resolve_config(opts);
  auto scenario = config.bounds;
  if (opts.seed) scenario.seed = *opts.seed;
  const auto reports = edmcal::theory::verify_bounds(scenario);
  std::filesystem::create_directories(opts.outdir);
  harness::emit_bound_reports(reports, opts.outdir + "/bounds.csv");

  // per-size worst ratios against the two envelopes
  std::cout << "n,max_structured_ratio,max_noise_ratio\n";
  for (const int n : scenario.n_values) {
    double structured = 0.0, noise = 0.0;
    for (const auto& r : reports) {
      if (r.n != n) continue;
      structured = std::max(structured,
                            r.norm_structured / (scenario.a * scenario.a * std::log2(n)));
      if (r.varsigma > 0.0)
        noise = std::max(noise, r.norm_noise / (r.d_max * r.d_max * r.varsigma *
                                                std::sqrt(r.p * n)));
    }
    std::cout << n << ',' << structured << ',' << noise << "\n";
  }
  std::cout << "wrote " << opts.outdir << "/bounds.csv\n";
  return kExitOk;
}

int run_coherence_fit(const std::string& curve_path, double search_max, double cutoff,
                      const std::string& out_path) {
  // two columns: omega, gamma -> single fit printed to stdout
  // four columns: i, j, omega, gamma -> one fit per pair, squared matrix CSV
  std::ifstream in(curve_path);
  if (!in) {
    std::cerr << "cannot open " << curve_path << "\n";
    return kExitInputError;
  }
  std::vector<std::array<double, 4>> rows;
  std::size_t width = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::array<double, 4> row{0, 0, 0, 0};
    std::size_t count = 0;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',') && count < 4) row[count++] = std::stod(cell);
    if (width == 0) width = count;
    if (count != width) {
      std::cerr << "ragged rows in " << curve_path << "\n";
      return kExitInputError;
    }
    rows.push_back(row);
  }
  if (rows.empty() || (width != 2 && width != 4)) {
    std::cerr << "expected (omega,gamma) or (i,j,omega,gamma) rows\n";
    return kExitInputError;
  }

  edmcal::coherence::FitOptions fit_opts;
  fit_opts.reliability_cutoff = cutoff;

  if (width == 2) {
    edmcal::coherence::CoherenceCurve curve;
    curve.omega.resize(static_cast<Eigen::Index>(rows.size()));
    curve.gamma.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      curve.omega(static_cast<Eigen::Index>(k)) = rows[k][0];
      curve.gamma(static_cast<Eigen::Index>(k)) = rows[k][1];
    }
    const auto fit = edmcal::coherence::fit_distance(curve, search_max, fit_opts);
    std::cout << "distance=" << fit.distance << " residual=" << fit.residual
              << " reliable=" << (fit.reliable ? "yes" : "no") << "\n";
    return kExitOk;
  }

  Eigen::Index n = 0;
  for (const auto& row : rows)
    n = std::max<Eigen::Index>(n, static_cast<Eigen::Index>(std::max(row[0], row[1])) + 1);
  Matrix squared = Matrix::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
  squared.diagonal().setZero();
  std::map<std::pair<Eigen::Index, Eigen::Index>, std::vector<std::pair<double, double>>>
      curves;
  for (const auto& row : rows) {
    const auto i = static_cast<Eigen::Index>(row[0]);
    const auto j = static_cast<Eigen::Index>(row[1]);
    curves[{std::min(i, j), std::max(i, j)}].emplace_back(row[2], row[3]);
  }
  for (const auto& [pair, samples] : curves) {
    edmcal::coherence::CoherenceCurve curve;
    curve.omega.resize(static_cast<Eigen::Index>(samples.size()));
    curve.gamma.resize(static_cast<Eigen::Index>(samples.size()));
    for (std::size_t k = 0; k < samples.size(); ++k) {
      curve.omega(static_cast<Eigen::Index>(k)) = samples[k].first;
      curve.gamma(static_cast<Eigen::Index>(k)) = samples[k].second;
    }
    const auto fit = edmcal::coherence::fit_distance(curve, search_max, fit_opts);
    if (fit.reliable) {
      squared(pair.first, pair.second) = fit.distance * fit.distance;
      squared(pair.second, pair.first) = squared(pair.first, pair.second);
    }
  }
  io::write_matrix_csv(out_path, squared);
  std::cout << "wrote " << out_path << " (" << curves.size() << " pair curves)\n";
  return kExitOk;
}

int run_real_layout_cmd(const CommonOptions& opts, const std::string& observed_path,
                        const std::string& truth_path, bool with_extra_mic) {
  auto config = resolve_config(opts);
  if (opts.config_path.empty() && !opts.scenario)
    config.kind = harness::ScenarioKind::kRealLayout11;

  Matrix truth;
  edmcal::observation::ObservedMatrix observed;
  if (!observed_path.empty()) {
    observed = io::read_observed_csv(observed_path);
    if (truth_path.empty()) {
      std::cerr << "--truth is required with --observed\n";
      return kExitInputError;
    }
    truth = io::read_positions_csv(truth_path);
  } else {
    truth = with_extra_mic ? harness::layout_planar_12() : harness::layout_planar_11();
    config.n = static_cast<int>(truth.rows());
    observed = harness::simulate_observation(config, truth, config.seed);
  }

  const auto result = harness::run_real_layout(observed, truth, config);
  harness::emit_results(result, opts.outdir);
  std::cout << "solver,calibration_error,position_error,status\n";
  int failures = 0;
  for (const auto& trial : result.trials) {
    std::cout << trial.solver << ',' << io::format_double(trial.calibration_error) << ','
              << io::format_double(trial.position_error) << ',' << trial.status << "\n";
    failures += trial.failed ? 1 : 0;
  }
  return failures == 0 ? kExitOk : kExitSolverFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sensor-array geometry recovery from partial pairwise distances"};
  app.require_subcommand(1);

  CommonOptions opts;

  auto* simulate = app.add_subcommand(
      "simulate", "generate a scenario and write truth + observed CSVs");
  add_common(simulate, opts);

  auto* calibrate = app.add_subcommand(
      "calibrate", "recover geometry from an observed squared-distance CSV");
  std::string observed_path, solver = "emc2", truth_path;
  int dim = 2, eta = 0;
  calibrate->add_option("--observed", observed_path, "observed matrix CSV (nan = missing)")
      ->required();
  calibrate->add_option("--solver", solver, "mc|mc2|emc2|mds-map|s-stress");
  calibrate->add_option("--dim", dim, "embedding dimension");
  calibrate->add_option("--eta", eta, "target rank override (default dim+2)");
  calibrate->add_option("--truth", truth_path, "optional ground-truth positions CSV");
  add_common(calibrate, opts);

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep along one axis");
  std::string axis = "n";
  sweep->add_option("--axis", axis, "n|sigma|missing|jitter")->required();
  add_common(sweep, opts);

  auto* bounds = app.add_subcommand("verify-bounds",
                                    "spectral-norm envelope verification runs");
  add_common(bounds, opts);

  auto* cohfit = app.add_subcommand("coherence-fit",
                                    "fit distances from coherence curve CSVs");
  std::string curve_path, cohout = "coherence_observed.csv";
  double search_max = 1.46, cutoff = 0.73;
  cohfit->add_option("--curve", curve_path, "curve CSV: (omega,gamma) or (i,j,omega,gamma)")
      ->required();
  cohfit->add_option("--search-max", search_max, "largest candidate distance");
  cohfit->add_option("--cutoff", cutoff, "reliability cutoff (meters)");
  cohfit->add_option("--out-matrix", cohout, "output matrix CSV for batch input");

  auto* real = app.add_subcommand("real-layout",
                                  "run all solvers on a partial layout matrix");
  std::string real_observed, real_truth;
  bool with_extra_mic = false;
  real->add_option("--observed", real_observed, "observed squared-distance CSV");
  real->add_option("--truth", real_truth, "ground-truth positions CSV");
  real->add_flag("--twelve", with_extra_mic, "use the 12-element synthetic layout");
  add_common(real, opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return run_simulate(opts);
    if (calibrate->parsed())
      return run_calibrate(opts, observed_path, solver, dim, eta, truth_path);
    if (sweep->parsed()) return run_sweep_cmd(opts, axis);
    if (bounds->parsed()) return run_verify_bounds(opts);
    if (cohfit->parsed())
      return run_coherence_fit(curve_path, search_max, cutoff, cohout);
    if (real->parsed())
      return run_real_layout_cmd(opts, real_observed, real_truth, with_extra_mic);
  } catch (const std::invalid_argument& error) {
    std::cerr << "input error: " << error.what() << "\n";
    return kExitInputError;
  } catch (const edmcal::baselines::DisconnectedGraphError& error) {
    std::cerr << "solver failure: " << error.what() << "\n";
    return kExitSolverFailure;
  } catch (const std::runtime_error& error) {
    const std::string what = error.what();
    if (what.find("insufficient observations") != std::string::npos) {
      std::cerr << "solver failure: " << what << "\n";
      return kExitSolverFailure;
    }
    std::cerr << "input error: " << what << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
