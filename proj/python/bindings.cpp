#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "edmcal/baselines.hpp"
#include "edmcal/coherence.hpp"
#include "edmcal/completion.hpp"
#include "edmcal/geometry.hpp"
#include "edmcal/harness.hpp"
#include "edmcal/observation.hpp"
#include "edmcal/theory.hpp"

namespace py = pybind11;
using namespace edmcal;

namespace {

observation::ObservedMatrix observed_from_numpy(const Matrix& values_with_nan) {
  const Eigen::Index n = values_with_nan.rows();
  if (values_with_nan.cols() != n)
    throw std::invalid_argument("observed matrix must be square");
  observation::ObservedMatrix out;
  out.values = Matrix::Zero(n, n);
  out.mask.known = BoolMatrix::Constant(n, n, false);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      if (!std::isnan(values_with_nan(i, j))) {
        out.values(i, j) = values_with_nan(i, j);
        out.mask.known(i, j) = true;
      }
    }
  }
  return out;
}

Matrix observed_to_numpy(const observation::ObservedMatrix& observed) {
  const Eigen::Index n = observed.size();
  Matrix out = Matrix::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
  out.diagonal().setZero();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && observed.known(i, j)) out(i, j) = observed.values(i, j);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "sensor-array geometry recovery from partial pairwise distances";

  // geometry
  m.def("build_squared_distances", &geometry::build_squared_distances, py::arg("positions"));
  m.def("double_center", &geometry::double_center, py::arg("matrix"));
  m.def("calibration_error", &geometry::calibration_error, py::arg("truth"),
        py::arg("estimate"));
  m.def("position_error", &geometry::position_error, py::arg("truth"), py::arg("estimate"));
  m.def("procrustes_align", &geometry::procrustes_align, py::arg("truth"),
        py::arg("estimate"));

  // observation: NaN-marked numpy matrices stand in for ObservedMatrix
  m.def(
      "add_noise",
      [](const Matrix& distances, double varsigma, double jitter_halfwidth,
         double additive_std, const std::string& distribution, std::uint64_t seed) {
        observation::NoiseModel model;
        model.varsigma = varsigma;
        model.jitter_halfwidth = jitter_halfwidth;
        model.additive_std = additive_std;
        model.seed = seed;
        if (distribution == "gaussian")
          model.distribution = observation::NoiseDistribution::kGaussian;
        else if (distribution == "bounded")
          model.distribution = observation::NoiseDistribution::kUniformBounded;
        else
          throw std::invalid_argument("distribution must be 'gaussian' or 'bounded'");
        return observation::add_noise(distances, model);
      },
      py::arg("distances"), py::arg("varsigma") = 0.0, py::arg("jitter_halfwidth") = 0.0,
      py::arg("additive_std") = 0.0, py::arg("distribution") = "gaussian",
      py::arg("seed") = 0);
  m.def(
      "observe",
      [](const Matrix& squared, double d_max, double p, std::uint64_t seed) {
        const Matrix distances = squared.cwiseMax(0.0).cwiseSqrt();
        const auto mask = observation::make_mask(distances, d_max, p, seed);
        return observed_to_numpy(observation::observe(squared, mask));
      },
      py::arg("squared_distances"), py::arg("d_max"), py::arg("p") = 1.0,
      py::arg("seed") = 0,
      "Mask a squared-distance matrix by locality cutoff plus random erasure; "
      "missing entries come back as NaN.");

  // completion
  m.def(
      "solve",
      [](const Matrix& observed_with_nan, int dim, const std::string& variant,
         int eta, int max_iterations, double rel_tolerance, std::uint64_t seed) {
        completion::SolverOptions opts;
        opts.max_iterations = max_iterations;
        opts.rel_tolerance = rel_tolerance;
        opts.seed = seed;
        const auto result =
            completion::solve(observed_from_numpy(observed_with_nan), dim,
                              completion::variant_from_string(variant), opts, eta);
        py::dict diagnostics;
        diagnostics["status"] = completion::to_string(result.status);
        diagnostics["iterations"] = result.history.size();
        std::vector<double> costs, rmse;
        for (const auto& stat : result.history) {
          costs.push_back(stat.cost);
          rmse.push_back(stat.known_rmse);
        }
        diagnostics["cost"] = costs;
        diagnostics["known_rmse"] = rmse;
        return py::make_tuple(result.positions, result.completed, diagnostics);
      },
      py::arg("observed"), py::arg("dim"), py::arg("variant") = "emc2",
      py::arg("eta") = 0, py::arg("max_iterations") = 500,
      py::arg("rel_tolerance") = 1e-6, py::arg("seed") = 0,
      "Complete a NaN-masked squared-distance matrix and recover positions. "
      "Returns (positions, completed, diagnostics).");
  m.def("cadzow_project", &completion::cadzow_project, py::arg("matrix"));

  // baselines
  m.def(
      "mds_localize",
      [](const Matrix& squared, int dim) {
        return baselines::mds_localize(squared, dim).positions;
      },
      py::arg("squared_distances"), py::arg("dim"));
  m.def(
      "mds_map",
      [](const Matrix& observed_with_nan, int dim) {
        const auto observed = observed_from_numpy(observed_with_nan);
        return baselines::mds_map(observation::to_distances(observed), dim);
      },
      py::arg("observed"), py::arg("dim"),
      "Classical MDS after shortest-path completion of a NaN-masked "
      "squared-distance matrix.");
  m.def(
      "shortest_path_complete",
      [](const Matrix& observed_distances_with_nan) {
        return baselines::shortest_path_complete(
            observed_from_numpy(observed_distances_with_nan));
      },
      py::arg("observed_distances"));
  m.def(
      "sstress_solve",
      [](const Matrix& observed_with_nan, int dim, int weight_exponent, int restarts,
         std::uint64_t seed) {
        baselines::SStressOptions opts;
        opts.weight_exponent = weight_exponent;
        opts.restarts = restarts;
        opts.seed = seed;
        const auto observed = observed_from_numpy(observed_with_nan);
        const auto result =
            baselines::sstress_solve(observation::to_distances(observed), dim, opts);
        return py::make_tuple(result.positions, result.cost);
      },
      py::arg("observed"), py::arg("dim"), py::arg("weight_exponent") = 0,
      py::arg("restarts") = 4, py::arg("seed") = 0);

  // coherence
  m.def(
      "synthesize_coherence",
      [](double distance, const Vector& omega, double noise_std, std::uint64_t seed,
         double speed_of_sound) {
        const auto curve = coherence::synthesize_coherence(distance, omega, noise_std,
                                                           seed, speed_of_sound);
        return py::make_tuple(curve.omega, curve.gamma);
      },
      py::arg("distance"), py::arg("omega"), py::arg("noise_std") = 0.0,
      py::arg("seed") = 0, py::arg("speed_of_sound") = 340.0);
  m.def("default_frequency_grid", &coherence::default_frequency_grid);
  m.def(
      "fit_distance",
      [](const Vector& omega, const Vector& gamma, double search_max, double cutoff,
         double speed_of_sound) {
        coherence::CoherenceCurve curve{omega, gamma, speed_of_sound};
        coherence::FitOptions opts;
        opts.reliability_cutoff = cutoff;
        const auto fit = coherence::fit_distance(curve, search_max, opts);
        return py::make_tuple(fit.distance, fit.residual, fit.reliable);
      },
      py::arg("omega"), py::arg("gamma"), py::arg("search_max") = 1.46,
      py::arg("cutoff") = 0.73, py::arg("speed_of_sound") = 340.0);
  m.def(
      "build_observed_from_coherence",
      [](const Matrix& positions, const Vector& omega, double noise_std, double cutoff,
         std::uint64_t seed) {
        return observed_to_numpy(coherence::build_observed_from_coherence(
            positions, omega, noise_std, cutoff, seed));
      },
      py::arg("positions"), py::arg("omega"), py::arg("noise_std") = 0.0,
      py::arg("cutoff") = 0.73, py::arg("seed") = 0);

  // theory
  m.def(
      "q_bounds",
      [](double a, double d_max) {
        const auto bounds = theory::q_bounds(a, d_max);
        return py::make_tuple(bounds.q_min, bounds.q_max);
      },
      py::arg("a"), py::arg("d_max"));
  m.def(
      "incoherence",
      [](const Matrix& m, int eta) {
        const auto inc = theory::incoherence(m, eta);
        return py::make_tuple(inc.mu1, inc.mu2, inc.kappa);
      },
      py::arg("matrix"), py::arg("eta"));
  m.def(
      "theorem1_rhs",
      [](double a, int n, double p, double varsigma, double d_max) {
        const auto terms = theory::theorem1_rhs(a, n, p, varsigma, d_max);
        return py::make_tuple(terms.term1, terms.term2);
      },
      py::arg("a"), py::arg("n"), py::arg("p"), py::arg("varsigma"), py::arg("d_max"));
  m.def("sample_disc_positions", &theory::sample_disc_positions, py::arg("n"),
        py::arg("a"), py::arg("seed") = 0);

  // bundled layouts
  m.def("layout_planar_11", &harness::layout_planar_11);
  m.def("layout_planar_12", &harness::layout_planar_12);
  m.def("layout_distributed_18", &harness::layout_distributed_18);
  m.def("layout_distributed_15", &harness::layout_distributed_15);
}
