#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "edmcal/baselines.hpp"
#include "edmcal/coherence.hpp"
#include "edmcal/completion.hpp"
#include "edmcal/observation.hpp"
#include "edmcal/theory.hpp"

namespace edmcal::harness {

enum class ScenarioKind {
  kDisc,
  kCube,
  kDistributed18,
  kDistributed15,
  kRealLayout11,
  kCoherencePipeline,
};

ScenarioKind scenario_from_string(const std::string& name);
const char* to_string(ScenarioKind kind);

struct ExperimentConfig {
  ScenarioKind kind = ScenarioKind::kDisc;
  int n = 45;
  int dim = 2;
  double disc_radius = 9.5;  // disc scenarios; cube uses unit dimensions
  double d_max = 7.5;
  double p = 0.95;
  double varsigma = 0.0167;
  double jitter_halfwidth = 0.0;
  double additive_std = 0.0;
  observation::NoiseDistribution distribution =
      observation::NoiseDistribution::kGaussian;

  std::vector<std::string> solvers = {"mc", "mc2", "emc2", "mds-map", "s-stress"};
  int trials = 100;
  std::uint64_t seed = 1;
  int workers = 1;

  completion::SolverOptions solver;
  baselines::SStressOptions sstress;

  // coherence-pipeline scenario
  double coherence_noise_std = 0.02;
  double coherence_cutoff = 0.73;

  // sweep axis values
  std::vector<double> n_values = {15, 30, 45, 60, 120};
  std::vector<double> sigma_values = {0.0056, 0.01, 0.0167, 0.03, 0.056, 0.1};
  std::vector<double> missing_values = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  std::vector<double> jitter_sigma_values = {0.0056, 0.01, 0.0167, 0.03, 0.056, 0.1};

  theory::BoundScenario bounds;
};

/// Loads a JSON config file; unknown keys are rejected, absent keys keep
/// their defaults.
ExperimentConfig load_config(const std::string& path);

/// Fills the scenario fields (n, dim, cutoff, noise, ...) with the defaults
/// of the given kind, keeping everything else.
void apply_scenario_defaults(ExperimentConfig& config, ScenarioKind kind);

/// Fixed layouts used by the distributed and partial-matrix experiments.
Matrix layout_distributed_18();           // two 9-mic circles, centers 1 m apart
Matrix layout_distributed_15();           // 9-mic circle inside a 6-mic circle
Matrix layout_planar_11();                // 8 on a 20 cm circle + center + two at 70 cm
Matrix layout_planar_12();                // the 11-mic layout plus a mirrored outer mic

/// Ground-truth positions for a scenario draw.
Matrix make_scenario_positions(const ExperimentConfig& config, std::uint64_t seed);

/// One simulated observation: noise on the true distances, locality cutoff,
/// random erasure.
observation::ObservedMatrix simulate_observation(const ExperimentConfig& config,
                                                 const Matrix& positions,
                                                 std::uint64_t seed);

struct TrialResult {
  std::string axis;
  double axis_value = 0.0;
  int trial = 0;
  std::string solver;
  std::uint64_t seed = 0;
  double calibration_error = 0.0;  // squared length
  double position_error = 0.0;     // length
  double runtime_s = 0.0;
  int iterations = 0;
  std::string status;  // "ok" or a short failure reason
  bool failed = false;
};

struct AggregateRow {
  double axis_value = 0.0;
  std::string solver;
  int trials = 0;
  int failures = 0;
  double mean_calibration = 0.0;
  double std_calibration = 0.0;
  double mean_position = 0.0;
  double std_position = 0.0;
  double mean_runtime_s = 0.0;
};

struct SweepResult {
  std::string axis;
  std::vector<TrialResult> trials;
  std::vector<AggregateRow> aggregate() const;
};

enum class SweepAxis { kN, kSigma, kMissing, kJitter };

SweepAxis axis_from_string(const std::string& name);
const char* to_string(SweepAxis axis);

/// Runs `trials` seeded trials per solver for every axis value. Solver
/// failures are recorded and the sweep continues. Deterministic for a fixed
/// config and base seed, independent of the worker count.
SweepResult run_sweep(const ExperimentConfig& config, SweepAxis axis);

/// Runs every configured solver on one externally provided partial matrix
/// against a known ground-truth layout.
SweepResult run_real_layout(const observation::ObservedMatrix& observed_squared,
                            const Matrix& truth, const ExperimentConfig& config);

/// Runs a single solver on one observation; shared by the sweep and the CLI.
TrialResult run_single(const observation::ObservedMatrix& observed_squared,
                       const Matrix& truth, const std::string& solver,
                       const ExperimentConfig& config, std::uint64_t seed);

/// Writes trials.csv, aggregate.csv and plot.csv with a stable column order.
void emit_results(const SweepResult& result, const std::string& outdir);

/// Writes the per-trial bound reports as CSV.
void emit_bound_reports(const std::vector<theory::BoundReport>& reports,
                        const std::string& path);

}  // namespace edmcal::harness
