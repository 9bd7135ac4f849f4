#include "edmcal/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "edmcal/geometry.hpp"
#include "edmcal/rng.hpp"

namespace edmcal::coherence {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

double residual_at(const CoherenceCurve& curve, double distance) {
  double sum = 0.0;
  for (Eigen::Index k = 0; k < curve.omega.size(); ++k) {
    const double r = curve.gamma(k) - sinc(curve.omega(k) * distance / curve.speed_of_sound);
    sum += r * r;
  }
  return sum;
}

}  // namespace

Vector default_frequency_grid() {
  const double bin_hz = 16000.0 / 1024.0;  // 15.625 Hz
  const double lo_hz = 100.0;
  const double hi_hz = 4000.0;
  const int count = static_cast<int>(std::floor((hi_hz - lo_hz) / bin_hz)) + 1;
  Vector omega(count);
  for (int k = 0; k < count; ++k) omega(k) = 2.0 * kPi * (lo_hz + bin_hz * k);
  return omega;
}

CoherenceCurve synthesize_coherence(double distance, const Vector& omega,
                                    double noise_std, std::uint64_t seed,
                                    double speed_of_sound) {
  if (distance < 0.0) throw std::invalid_argument("distance must be nonnegative");
  CoherenceCurve curve;
  curve.omega = omega;
  curve.speed_of_sound = speed_of_sound;
  curve.gamma.resize(omega.size());
  Rng rng(seed);
  for (Eigen::Index k = 0; k < omega.size(); ++k) {
    double value = sinc(omega(k) * distance / speed_of_sound);
    if (noise_std > 0.0) value += noise_std * rng.normal();
    curve.gamma(k) = std::clamp(value, -1.0, 1.0);
  }
  return curve;
}

DistanceFit fit_distance(const CoherenceCurve& curve, double search_max,
                         const FitOptions& options) {
  DistanceFit fit;
  if (curve.omega.size() == 0 || search_max <= 0.0) return fit;  // degenerate

  // coarse scan; the objective is multimodal in the distance
  double best_d = options.coarse_step;
  double best_r = residual_at(curve, best_d);
  int best_index = 0;
  int index = 0;
  for (double d = options.coarse_step; d <= search_max + 1e-12; d += options.coarse_step) {
    const double r = residual_at(curve, d);
    if (r < best_r) {
      best_r = r;
      best_d = d;
      best_index = index;
    }
    ++index;
  }

  // golden-section refinement inside the winning cell
  double lo = std::max(best_d - options.coarse_step, options.coarse_step * 0.5);
  double hi = std::min(best_d + options.coarse_step, search_max);
  const double golden = 0.6180339887498949;
  double x1 = hi - golden * (hi - lo);
  double x2 = lo + golden * (hi - lo);
  double f1 = residual_at(curve, x1);
  double f2 = residual_at(curve, x2);
  while (hi - lo > options.refine_tolerance) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - golden * (hi - lo);
      f1 = residual_at(curve, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + golden * (hi - lo);
      f2 = residual_at(curve, x2);
    }
  }
  fit.distance = 0.5 * (lo + hi);
  fit.residual = residual_at(curve, fit.distance) / static_cast<double>(curve.omega.size());

  const bool at_lower_boundary = best_index == 0;
  const bool at_upper_boundary = fit.distance >= search_max - options.coarse_step * 0.5;
  fit.reliable = fit.residual <= options.residual_threshold &&
                 fit.distance < options.reliability_cutoff && !at_lower_boundary &&
                 !at_upper_boundary;
  return fit;
}

observation::ObservedMatrix build_observed_from_coherence(
    const Matrix& positions, const Vector& omega, double noise_std,
    double cutoff, std::uint64_t seed, const FitOptions& options) {
  const Eigen::Index n = positions.rows();
  FitOptions opts = options;
  opts.reliability_cutoff = cutoff;
  const double search_max = 2.0 * cutoff;

  observation::ObservedMatrix out;
  out.values = Matrix::Zero(n, n);
  out.mask.known = BoolMatrix::Constant(n, n, false);
  out.mask.p = 1.0;
  out.mask.d_max = cutoff;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = (positions.row(i) - positions.row(j)).norm();
      const CoherenceCurve curve = synthesize_coherence(
          d, omega, noise_std, mix_seed(seed, static_cast<std::uint64_t>(i * n + j)));
      const DistanceFit fit = fit_distance(curve, search_max, opts);
      if (fit.reliable) {
        out.values(i, j) = fit.distance * fit.distance;
        out.values(j, i) = out.values(i, j);
        out.mask.known(i, j) = true;
        out.mask.known(j, i) = true;
      }
    }
  }
  return out;
}

}  // namespace edmcal::coherence
