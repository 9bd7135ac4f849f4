#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "edmcal/geometry.hpp"

namespace edmcal::observation {

enum class NoiseDistribution { kGaussian, kUniformBounded };

/// Multiplicative noise model for measured distances:
///   d_noisy = d * (1 + e) + additive + jitter
/// where e has standard deviation `varsigma` (Gaussian by default, or a
/// bounded uniform with the same variance), `additive` is Gaussian with
/// std `additive_std`, and `jitter` is uniform on [-h, h]. All draws are
/// symmetric per pair; negative results are clamped to zero.
struct NoiseModel {
  double varsigma = 0.0;
  NoiseDistribution distribution = NoiseDistribution::kGaussian;
  double jitter_halfwidth = 0.0;
  double additive_std = 0.0;
  std::uint64_t seed = 0;
};

Matrix add_noise(const Matrix& distances, const NoiseModel& model);

/// Symmetric set of observed off-diagonal index pairs. A pair survives when
/// its true distance is below `d_max` (locality cutoff) and an independent
/// per-pair Bernoulli(p) draw succeeds.
struct ObservationMask {
  BoolMatrix known;
  double p = 1.0;
  double d_max = std::numeric_limits<double>::infinity();

  Eigen::Index size() const { return known.rows(); }
  /// Observed unordered off-diagonal pairs (i < j).
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs() const;
  /// Number of known ordered off-diagonal entries (2x unordered count).
  std::size_t known_count() const;
};

ObservationMask make_mask(const Matrix& distances, double d_max, double p,
                          std::uint64_t seed);

ObservationMask full_mask(Eigen::Index n);

/// Partially observed squared-distance matrix. `values` holds data on the
/// mask and zeros elsewhere; the zero diagonal is always known implicitly.
struct ObservedMatrix {
  Matrix values;
  ObservationMask mask;

  Eigen::Index size() const { return values.rows(); }
  bool known(Eigen::Index i, Eigen::Index j) const { return mask.known(i, j); }
  double missing_fraction() const;
};

ObservedMatrix observe(const Matrix& noisy_squared, const ObservationMask& mask);

/// Entrywise square root of the known entries (squared distances -> distances).
ObservedMatrix to_distances(const ObservedMatrix& squared);

}  // namespace edmcal::observation
