#include "edmcal/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "edmcal/geometry.hpp"
#include "edmcal/matrix_csv.hpp"
#include "edmcal/rng.hpp"

namespace edmcal::harness {

namespace {

constexpr double kPi = 3.14159265358979323846;

using nlohmann::json;

Matrix circle_points(int count, double radius, double center_x, double center_y,
                     double phase = 0.0) {
  Matrix x(count, 2);
  for (int k = 0; k < count; ++k) {
    const double angle = phase + 2.0 * kPi * k / count;
    x(k, 0) = center_x + radius * std::cos(angle);
    x(k, 1) = center_y + radius * std::sin(angle);
  }
  return x;
}

std::string sanitize(std::string text) {
  for (auto& c : text)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return text;
}

void require_keys(const json& object, std::initializer_list<const char*> allowed,
                  const std::string& where) {
  for (const auto& item : object.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* key) {
          return item.key() == key;
        }) == allowed.end())
      throw std::runtime_error("unknown config key '" + item.key() + "' in " + where);
  }
}

}  // namespace

ScenarioKind scenario_from_string(const std::string& name) {
  if (name == "disc") return ScenarioKind::kDisc;
  if (name == "cube") return ScenarioKind::kCube;
  if (name == "distributed-18mic") return ScenarioKind::kDistributed18;
  if (name == "distributed-15mic") return ScenarioKind::kDistributed15;
  if (name == "real-layout-11mic") return ScenarioKind::kRealLayout11;
  if (name == "coherence-pipeline") return ScenarioKind::kCoherencePipeline;
  throw std::invalid_argument("unknown scenario kind: " + name);
}

const char* to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kDisc: return "disc";
    case ScenarioKind::kCube: return "cube";
    case ScenarioKind::kDistributed18: return "distributed-18mic";
    case ScenarioKind::kDistributed15: return "distributed-15mic";
    case ScenarioKind::kRealLayout11: return "real-layout-11mic";
    case ScenarioKind::kCoherencePipeline: return "coherence-pipeline";
  }
  return "unknown";
}

SweepAxis axis_from_string(const std::string& name) {
  if (name == "n") return SweepAxis::kN;
  if (name == "sigma") return SweepAxis::kSigma;
  if (name == "missing") return SweepAxis::kMissing;
  if (name == "jitter") return SweepAxis::kJitter;
  throw std::invalid_argument("unknown sweep axis: " + name);
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kN: return "n";
    case SweepAxis::kSigma: return "sigma";
    case SweepAxis::kMissing: return "missing";
    case SweepAxis::kJitter: return "jitter";
  }
  return "unknown";
}

void apply_scenario_defaults(ExperimentConfig& config, ScenarioKind kind) {
  config.kind = kind;
  switch (config.kind) {
    case ScenarioKind::kDisc:
      config.n = 45;
      config.dim = 2;
      config.disc_radius = 9.5;
      config.d_max = 7.5;
      config.p = 0.95;
      config.varsigma = 0.0167;
      break;
    case ScenarioKind::kCube:
      config.n = 60;
      config.dim = 3;
      config.d_max = std::numeric_limits<double>::infinity();
      config.p = 0.9;
      config.varsigma = 0.0;
      config.additive_std = 0.02;
      break;
    case ScenarioKind::kDistributed18:
      config.n = 18;
      config.dim = 2;
      config.d_max = 1.01;
      config.p = 1.0;
      config.varsigma = 0.06;
      break;
    case ScenarioKind::kDistributed15:
      config.n = 15;
      config.dim = 2;
      config.d_max = 0.73;
      config.p = 1.0;
      config.varsigma = 0.06;
      break;
    case ScenarioKind::kRealLayout11:
      config.n = 11;
      config.dim = 2;
      config.d_max = 0.73;
      config.p = 1.0;
      config.varsigma = 0.05;
      break;
    case ScenarioKind::kCoherencePipeline:
      config.n = 11;
      config.dim = 2;
      config.d_max = 0.73;
      config.p = 1.0;
      config.varsigma = 0.0;
      break;
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  json root = json::parse(in);
  require_keys(root,
               {"scenario", "solvers", "trials", "seed", "workers", "solver_options",
                "sstress", "coherence", "sweep", "bounds"},
               "config root");

  ExperimentConfig config;
  if (root.contains("scenario")) {
    const json& s = root["scenario"];
    require_keys(s,
                 {"kind", "n", "dim", "radius", "d_max", "p", "varsigma", "jitter",
                  "additive_std", "distribution"},
                 "scenario");
    if (s.contains("kind")) {
      apply_scenario_defaults(config, scenario_from_string(s["kind"].get<std::string>()));
    }
    if (s.contains("n")) config.n = s["n"].get<int>();
    if (s.contains("dim")) config.dim = s["dim"].get<int>();
    if (s.contains("radius")) config.disc_radius = s["radius"].get<double>();
    if (s.contains("d_max")) config.d_max = s["d_max"].get<double>();
    if (s.contains("p")) config.p = s["p"].get<double>();
    if (s.contains("varsigma")) config.varsigma = s["varsigma"].get<double>();
    if (s.contains("jitter")) config.jitter_halfwidth = s["jitter"].get<double>();
    if (s.contains("additive_std")) config.additive_std = s["additive_std"].get<double>();
    if (s.contains("distribution")) {
      const std::string d = s["distribution"].get<std::string>();
      if (d == "gaussian")
        config.distribution = observation::NoiseDistribution::kGaussian;
      else if (d == "bounded")
        config.distribution = observation::NoiseDistribution::kUniformBounded;
      else
        throw std::runtime_error("unknown noise distribution: " + d);
    }
  }
  if (root.contains("solvers"))
    config.solvers = root["solvers"].get<std::vector<std::string>>();
  if (config.solvers.empty()) throw std::runtime_error("solver list must be nonempty");
  if (root.contains("trials")) config.trials = root["trials"].get<int>();
  if (config.trials < 1) throw std::runtime_error("trials must be >= 1");
  if (root.contains("seed")) config.seed = root["seed"].get<std::uint64_t>();
  if (root.contains("workers")) config.workers = root["workers"].get<int>();

  if (root.contains("solver_options")) {
    const json& o = root["solver_options"];
    require_keys(o,
                 {"max_iterations", "rel_tolerance", "edm_max_sweeps",
                  "edm_coord_tolerance", "max_backtracks"},
                 "solver_options");
    if (o.contains("max_iterations")) config.solver.max_iterations = o["max_iterations"].get<int>();
    if (o.contains("rel_tolerance")) config.solver.rel_tolerance = o["rel_tolerance"].get<double>();
    if (o.contains("edm_max_sweeps")) config.solver.edm_max_sweeps = o["edm_max_sweeps"].get<int>();
    if (o.contains("edm_coord_tolerance"))
      config.solver.edm_coord_tolerance = o["edm_coord_tolerance"].get<double>();
    if (o.contains("max_backtracks")) config.solver.max_backtracks = o["max_backtracks"].get<int>();
  }
  if (root.contains("sstress")) {
    const json& o = root["sstress"];
    require_keys(o, {"weight_exponent", "restarts", "max_iterations", "rel_tolerance"},
                 "sstress");
    if (o.contains("weight_exponent"))
      config.sstress.weight_exponent = o["weight_exponent"].get<int>();
    if (o.contains("restarts")) config.sstress.restarts = o["restarts"].get<int>();
    if (o.contains("max_iterations"))
      config.sstress.max_iterations = o["max_iterations"].get<int>();
    if (o.contains("rel_tolerance"))
      config.sstress.rel_tolerance = o["rel_tolerance"].get<double>();
  }
  if (root.contains("coherence")) {
    const json& o = root["coherence"];
    require_keys(o, {"noise_std", "cutoff"}, "coherence");
    if (o.contains("noise_std")) config.coherence_noise_std = o["noise_std"].get<double>();
    if (o.contains("cutoff")) config.coherence_cutoff = o["cutoff"].get<double>();
  }
  if (root.contains("sweep")) {
    const json& o = root["sweep"];
    require_keys(o, {"n_values", "sigma_values", "missing_values", "jitter_sigma_values"},
                 "sweep");
    if (o.contains("n_values")) config.n_values = o["n_values"].get<std::vector<double>>();
    if (o.contains("sigma_values"))
      config.sigma_values = o["sigma_values"].get<std::vector<double>>();
    if (o.contains("missing_values"))
      config.missing_values = o["missing_values"].get<std::vector<double>>();
    if (o.contains("jitter_sigma_values"))
      config.jitter_sigma_values = o["jitter_sigma_values"].get<std::vector<double>>();
  }
  if (root.contains("bounds")) {
    const json& o = root["bounds"];
    require_keys(o,
                 {"a", "n_values", "p", "varsigma", "d_max", "scale_dmax", "q_anchor",
                  "trials", "seed"},
                 "bounds");
    if (o.contains("a")) config.bounds.a = o["a"].get<double>();
    if (o.contains("n_values")) config.bounds.n_values = o["n_values"].get<std::vector<int>>();
    if (o.contains("p")) config.bounds.p = o["p"].get<double>();
    if (o.contains("varsigma")) config.bounds.varsigma = o["varsigma"].get<double>();
    if (o.contains("d_max")) config.bounds.d_max = o["d_max"].get<double>();
    if (o.contains("scale_dmax")) config.bounds.scale_dmax = o["scale_dmax"].get<bool>();
    if (o.contains("q_anchor")) config.bounds.q_anchor = o["q_anchor"].get<double>();
    if (o.contains("trials")) config.bounds.trials = o["trials"].get<int>();
    if (o.contains("seed")) config.bounds.seed = o["seed"].get<std::uint64_t>();
  }
  return config;
}

Matrix layout_distributed_18() {
  Matrix x(18, 2);
  x.topRows(9) = circle_points(9, 0.1, 0.0, 0.0);
  x.bottomRows(9) = circle_points(9, 0.1, 1.0, 0.0);
  return x;
}

Matrix layout_distributed_15() {
  Matrix x(15, 2);
  x.topRows(9) = circle_points(9, 0.1, 0.0, 0.0);
  x.bottomRows(6) = circle_points(6, 0.35, 0.0, 0.0);
  return x;
}

Matrix layout_planar_11() {
  Matrix x(11, 2);
  x.topRows(8) = circle_points(8, 0.1, 0.0, 0.0);
  x.row(8) << 0.0, 0.0;
  x.row(9) << 0.7 * std::cos(3.0 * kPi / 4.0), 0.7 * std::sin(3.0 * kPi / 4.0);
  x.row(10) << 0.7 * std::cos(kPi / 4.0), 0.7 * std::sin(kPi / 4.0);
  return x;
}

Matrix layout_planar_12() {
  Matrix x(12, 2);
  x.topRows(11) = layout_planar_11();
  x.row(11) << 0.7 * std::cos(-kPi / 4.0), 0.7 * std::sin(-kPi / 4.0);
  return x;
}

Matrix make_scenario_positions(const ExperimentConfig& config, std::uint64_t seed) {
  switch (config.kind) {
    case ScenarioKind::kDisc:
      return theory::sample_disc_positions(config.n, config.disc_radius, seed);
    case ScenarioKind::kCube: {
      Rng rng(seed);
      Matrix x(config.n, 3);
      for (int i = 0; i < config.n; ++i)
        for (int d = 0; d < 3; ++d) x(i, d) = rng.uniform();
      return x;
    }
    case ScenarioKind::kDistributed18:
      return layout_distributed_18();
    case ScenarioKind::kDistributed15:
      return layout_distributed_15();
    case ScenarioKind::kRealLayout11:
      return layout_planar_11();
    case ScenarioKind::kCoherencePipeline:
      return layout_planar_11();
  }
  throw std::logic_error("unhandled scenario kind");
}

observation::ObservedMatrix simulate_observation(const ExperimentConfig& config,
                                                 const Matrix& positions,
                                                 std::uint64_t seed) {
  if (config.kind == ScenarioKind::kCoherencePipeline) {
    return coherence::build_observed_from_coherence(
        positions, coherence::default_frequency_grid(), config.coherence_noise_std,
        config.coherence_cutoff, mix_seed(seed, 2));
  }
  const Matrix squared = geometry::build_squared_distances(positions);
  const Matrix distances = squared.cwiseSqrt();

  observation::NoiseModel noise;
  noise.varsigma = config.varsigma;
  noise.distribution = config.distribution;
  noise.jitter_halfwidth = config.jitter_halfwidth;
  noise.additive_std = config.additive_std;
  noise.seed = mix_seed(seed, 2);
  const Matrix noisy = observation::add_noise(distances, noise);

  const observation::ObservationMask mask =
      observation::make_mask(distances, config.d_max, config.p, mix_seed(seed, 3));
  return observation::observe(noisy.cwiseProduct(noisy), mask);
}

TrialResult run_single(const observation::ObservedMatrix& observed_squared,
                       const Matrix& truth, const std::string& solver,
                       const ExperimentConfig& config, std::uint64_t seed) {
  TrialResult result;
  result.solver = solver;
  result.seed = seed;
  const auto start = std::chrono::steady_clock::now();
  try {
    Matrix estimate;
    if (solver == "mc" || solver == "mc2" || solver == "emc2") {
      completion::SolverOptions opts = config.solver;
      opts.seed = mix_seed(seed, 4);
      const completion::SolveResult solved = completion::solve(
          observed_squared, config.dim, completion::variant_from_string(solver), opts);
      estimate = solved.positions;
      result.iterations = static_cast<int>(solved.history.size());
      result.status = to_string(solved.status);
    } else if (solver == "mds-map") {
      estimate = baselines::mds_map(observation::to_distances(observed_squared), config.dim);
      result.status = "ok";
    } else if (solver == "s-stress") {
      baselines::SStressOptions opts = config.sstress;
      opts.seed = mix_seed(seed, 4);
      const baselines::SStressResult solved =
          baselines::sstress_solve(observation::to_distances(observed_squared),
                                   config.dim, opts);
      estimate = solved.positions;
      result.iterations = solved.iterations;
      result.status = "ok";
    } else {
      throw std::invalid_argument("unknown solver: " + solver);
    }
    result.calibration_error = geometry::calibration_error(truth, estimate);
    result.position_error = geometry::position_error(truth, estimate);
  } catch (const std::exception& error) {
    result.failed = true;
    result.status = sanitize(error.what());
    result.calibration_error = std::numeric_limits<double>::quiet_NaN();
    result.position_error = std::numeric_limits<double>::quiet_NaN();
  }
  result.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

namespace {

struct TrialTask {
  ExperimentConfig config;
  std::string axis;
  double axis_value = 0.0;
  int trial = 0;
  std::uint64_t trial_seed = 0;
};

std::vector<TrialResult> run_tasks(const std::vector<TrialTask>& tasks, int workers) {
  // one slot per (task, solver); slots keep the output order deterministic
  std::vector<std::vector<TrialResult>> slots(tasks.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    while (true) {
      const std::size_t index = next.fetch_add(1);
      if (index >= tasks.size()) break;
      const TrialTask& task = tasks[index];
      const Matrix truth =
          make_scenario_positions(task.config, mix_seed(task.trial_seed, 1));
      const observation::ObservedMatrix observed =
          simulate_observation(task.config, truth, task.trial_seed);
      std::vector<TrialResult> results;
      for (const auto& solver : task.config.solvers) {
        TrialResult r = run_single(observed, truth, solver, task.config, task.trial_seed);
        r.axis = task.axis;
        r.axis_value = task.axis_value;
        r.trial = task.trial;
        results.push_back(std::move(r));
      }
      slots[index] = std::move(results);
    }
  };
  const int thread_count = std::max(1, workers);
  if (thread_count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::vector<TrialResult> flat;
  for (auto& slot : slots)
    for (auto& r : slot) flat.push_back(std::move(r));
  return flat;
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& config, SweepAxis axis) {
  const std::vector<double>* values = nullptr;
  switch (axis) {
    case SweepAxis::kN: values = &config.n_values; break;
    case SweepAxis::kSigma: values = &config.sigma_values; break;
    case SweepAxis::kMissing: values = &config.missing_values; break;
    case SweepAxis::kJitter: values = &config.jitter_sigma_values; break;
  }

  SweepResult sweep;
  sweep.axis = to_string(axis);
  std::vector<TrialTask> tasks;
  for (std::size_t axis_index = 0; axis_index < values->size(); ++axis_index) {
    const double value = (*values)[axis_index];
    ExperimentConfig cell = config;
    switch (axis) {
      case SweepAxis::kN:
        cell.n = static_cast<int>(value);
        break;
      case SweepAxis::kSigma:
        cell.varsigma = value;
        break;
      case SweepAxis::kMissing:
        cell.p = 1.0 - value;
        break;
      case SweepAxis::kJitter:
        cell.varsigma = value;
        if (cell.jitter_halfwidth <= 0.0)
          cell.jitter_halfwidth = 340.0 / (2.0 * 16000.0);  // sync jitter at 16 kHz
        break;
    }
    for (int trial = 0; trial < config.trials; ++trial) {
      TrialTask task;
      task.config = cell;
      task.axis = sweep.axis;
      task.axis_value = value;
      task.trial = trial;
      task.trial_seed = config.seed ^ static_cast<std::uint64_t>(trial) ^
                        static_cast<std::uint64_t>(axis_index);
      tasks.push_back(std::move(task));
    }
  }
  sweep.trials = run_tasks(tasks, config.workers);
  return sweep;
}

SweepResult run_real_layout(const observation::ObservedMatrix& observed_squared,
                            const Matrix& truth, const ExperimentConfig& config) {
  SweepResult sweep;
  sweep.axis = "layout";
  for (const auto& solver : config.solvers) {
    TrialResult r = run_single(observed_squared, truth, solver, config, config.seed);
    r.axis = sweep.axis;
    r.axis_value = static_cast<double>(truth.rows());
    r.trial = 0;
    sweep.trials.push_back(std::move(r));
  }
  return sweep;
}

std::vector<AggregateRow> SweepResult::aggregate() const {
  // cells keyed by (axis value, solver) in first-seen order
  std::vector<AggregateRow> rows;
  for (const auto& trial : trials) {
    AggregateRow* row = nullptr;
    for (auto& existing : rows) {
      if (existing.axis_value == trial.axis_value && existing.solver == trial.solver) {
        row = &existing;
        break;
      }
    }
    if (!row) {
      rows.push_back({});
      row = &rows.back();
      row->axis_value = trial.axis_value;
      row->solver = trial.solver;
    }
    ++row->trials;
    if (trial.failed) {
      ++row->failures;
    } else {
      row->mean_calibration += trial.calibration_error;
      row->mean_position += trial.position_error;
      row->mean_runtime_s += trial.runtime_s;
    }
  }
  for (auto& row : rows) {
    const int ok = row.trials - row.failures;
    if (ok > 0) {
      row.mean_calibration /= ok;
      row.mean_position /= ok;
      row.mean_runtime_s /= ok;
    } else {
      row.mean_calibration = std::numeric_limits<double>::quiet_NaN();
      row.mean_position = std::numeric_limits<double>::quiet_NaN();
      row.mean_runtime_s = std::numeric_limits<double>::quiet_NaN();
    }
  }
  // second pass for the spread
  for (auto& row : rows) {
    double ss_cal = 0.0, ss_pos = 0.0;
    int ok = 0;
    for (const auto& trial : trials) {
      if (trial.failed || trial.axis_value != row.axis_value || trial.solver != row.solver)
        continue;
      ss_cal += (trial.calibration_error - row.mean_calibration) *
                (trial.calibration_error - row.mean_calibration);
      ss_pos += (trial.position_error - row.mean_position) *
                (trial.position_error - row.mean_position);
      ++ok;
    }
    row.std_calibration = ok > 1 ? std::sqrt(ss_cal / (ok - 1)) : 0.0;
    row.std_position = ok > 1 ? std::sqrt(ss_pos / (ok - 1)) : 0.0;
  }
  return rows;
}

void emit_results(const SweepResult& result, const std::string& outdir) {
  std::filesystem::create_directories(outdir);
  {
    std::ofstream out(outdir + "/trials.csv");
    if (!out) throw std::runtime_error("cannot write " + outdir + "/trials.csv");
    out << "axis,axis_value,trial,solver,seed,calibration_error,position_error,"
           "iterations,status\n";
    for (const auto& t : result.trials) {
      out << t.axis << ',' << io::format_double(t.axis_value) << ',' << t.trial << ','
          << t.solver << ',' << t.seed << ',' << io::format_double(t.calibration_error)
          << ',' << io::format_double(t.position_error) << ',' << t.iterations << ','
          << t.status << '\n';
    }
  }
  const auto aggregate = result.aggregate();
  {
    std::ofstream out(outdir + "/aggregate.csv");
    out << "axis,axis_value,solver,trials,failures,mean_calibration_error,"
           "std_calibration_error,mean_position_error,std_position_error\n";
    for (const auto& row : aggregate) {
      out << result.axis << ',' << io::format_double(row.axis_value) << ',' << row.solver
          << ',' << row.trials << ',' << row.failures << ','
          << io::format_double(row.mean_calibration) << ','
          << io::format_double(row.std_calibration) << ','
          << io::format_double(row.mean_position) << ','
          << io::format_double(row.std_position) << '\n';
    }
  }
  {
    // wall-clock data lives apart so the result files above stay
    // byte-identical across reruns
    std::ofstream out(outdir + "/timings.csv");
    out << "axis,axis_value,trial,solver,runtime_s\n";
    for (const auto& t : result.trials)
      out << t.axis << ',' << io::format_double(t.axis_value) << ',' << t.trial << ','
          << t.solver << ',' << io::format_double(t.runtime_s) << '\n';
  }
  {
    std::ofstream out(outdir + "/plot.csv");
    out << "axis,axis_value,solver,mean_calibration_error,std_calibration_error,"
           "mean_position_error,std_position_error\n";
    for (const auto& row : aggregate) {
      out << result.axis << ',' << io::format_double(row.axis_value) << ',' << row.solver
          << ',' << io::format_double(row.mean_calibration) << ','
          << io::format_double(row.std_calibration) << ','
          << io::format_double(row.mean_position) << ','
          << io::format_double(row.std_position) << '\n';
    }
  }
}

void emit_bound_reports(const std::vector<theory::BoundReport>& reports,
                        const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "a,n,p,varsigma,d_max,q_min,q_max,mu1,mu2,kappa_eta,term1,term2,"
         "norm_structured,norm_noise,trial,seed\n";
  for (const auto& r : reports) {
    out << io::format_double(r.a) << ',' << r.n << ',' << io::format_double(r.p) << ','
        << io::format_double(r.varsigma) << ',' << io::format_double(r.d_max) << ','
        << io::format_double(r.q_min) << ',' << io::format_double(r.q_max) << ','
        << io::format_double(r.mu1) << ',' << io::format_double(r.mu2) << ','
        << io::format_double(r.kappa_eta) << ',' << io::format_double(r.term1) << ','
        << io::format_double(r.term2) << ',' << io::format_double(r.norm_structured)
        << ',' << io::format_double(r.norm_noise) << ',' << r.trial << ',' << r.seed
        << '\n';
  }
}

}  // namespace edmcal::harness
