#pragma once

#include <cstdint>

#include "edmcal/observation.hpp"

namespace edmcal::coherence {

/// Magnitude coherence of a diffuse field sampled on a frequency grid.
struct CoherenceCurve {
  Vector omega;  // rad/s, strictly increasing
  Vector gamma;  // values in [-1, 1]
  double speed_of_sound = 340.0;
};

/// Frequency grid 100 Hz .. 4 kHz at the bin spacing of 1024-sample frames
/// taken at 16 kHz (15.625 Hz), in rad/s.
Vector default_frequency_grid();

/// Ideal diffuse-field coherence sinc(omega * d / c) plus optional Gaussian
/// noise, clipped to [-1, 1].
CoherenceCurve synthesize_coherence(double distance, const Vector& omega,
                                    double noise_std, std::uint64_t seed,
                                    double speed_of_sound = 340.0);

struct DistanceFit {
  double distance = 0.0;
  double residual = 0.0;  // mean squared residual per sample
  bool reliable = false;
};

struct FitOptions {
  double coarse_step = 1e-3;          // meters
  double refine_tolerance = 1e-6;     // meters
  double reliability_cutoff = 0.73;   // meters; fits at or beyond are rejected
  double residual_threshold = 0.05;   // mean squared residual gate
};

/// Least-squares sinc fit of the distance over (0, search_max]: a coarse
/// 1 mm grid scan followed by golden-section refinement. The fit is flagged
/// unreliable when the residual exceeds the threshold, the distance reaches
/// the reliability cutoff, or the minimizer sits on the search boundary.
DistanceFit fit_distance(const CoherenceCurve& curve, double search_max,
                         const FitOptions& options = {});

/// Synthesizes a coherence curve per pair, fits each distance, and assembles
/// the observed squared-distance matrix; unreliable fits become missing
/// entries.
observation::ObservedMatrix build_observed_from_coherence(
    const Matrix& positions, const Vector& omega, double noise_std,
    double cutoff, std::uint64_t seed, const FitOptions& options = {});

}  // namespace edmcal::coherence
