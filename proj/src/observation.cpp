#include "edmcal/observation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "edmcal/rng.hpp"

namespace edmcal::observation {

Matrix add_noise(const Matrix& distances, const NoiseModel& model) {
  if (distances.rows() != distances.cols())
    throw std::invalid_argument("distance matrix must be square");
  if (model.varsigma < 0.0 || model.jitter_halfwidth < 0.0 || model.additive_std < 0.0)
    throw std::invalid_argument("noise parameters must be nonnegative");

  const Eigen::Index n = distances.rows();
  Matrix noisy = Matrix::Zero(n, n);
  Rng rng(model.seed);
  // bounded variant: uniform on [-sqrt(3) s, sqrt(3) s] has std s
  const double bound = std::sqrt(3.0) * model.varsigma;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double relative = 0.0;
      if (model.varsigma > 0.0) {
        relative = model.distribution == NoiseDistribution::kGaussian
                       ? model.varsigma * rng.normal()
                       : rng.uniform(-bound, bound);
      }
      double value = distances(i, j) * (1.0 + relative);
      if (model.additive_std > 0.0) value += model.additive_std * rng.normal();
      if (model.jitter_halfwidth > 0.0)
        value += rng.uniform(-model.jitter_halfwidth, model.jitter_halfwidth);
      value = std::max(value, 0.0);
      noisy(i, j) = value;
      noisy(j, i) = value;
    }
  }
  return noisy;
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> ObservationMask::pairs() const {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  const Eigen::Index n = known.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (known(i, j)) out.emplace_back(i, j);
  return out;
}

std::size_t ObservationMask::known_count() const {
  std::size_t count = 0;
  const Eigen::Index n = known.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (known(i, j)) count += 2;
  return count;
}

ObservationMask make_mask(const Matrix& distances, double d_max, double p,
                          std::uint64_t seed) {
  if (p <= 0.0 || p > 1.0) throw std::invalid_argument("retention probability must be in (0, 1]");
  if (d_max <= 0.0) throw std::invalid_argument("d_max must be positive");
  const Eigen::Index n = distances.rows();
  ObservationMask mask;
  mask.known = BoolMatrix::Constant(n, n, false);
  mask.p = p;
  mask.d_max = d_max;
  Rng rng(seed);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const bool keep = distances(i, j) < d_max && rng.uniform() < p;
      mask.known(i, j) = keep;
      mask.known(j, i) = keep;
    }
  }
  return mask;
}

ObservationMask full_mask(Eigen::Index n) {
  ObservationMask mask;
  mask.known = BoolMatrix::Constant(n, n, true);
  mask.known.diagonal().setConstant(false);
  return mask;
}

double ObservedMatrix::missing_fraction() const {
  const Eigen::Index n = size();
  if (n < 2) return 0.0;
  const auto total = static_cast<double>(n * (n - 1));
  return 1.0 - static_cast<double>(mask.known_count()) / total;
}

ObservedMatrix observe(const Matrix& noisy_squared, const ObservationMask& mask) {
  if (noisy_squared.rows() != mask.size() || noisy_squared.cols() != mask.size())
    throw std::invalid_argument("mask size does not match matrix");
  ObservedMatrix out;
  out.mask = mask;
  out.values = Matrix::Zero(mask.size(), mask.size());
  for (Eigen::Index i = 0; i < mask.size(); ++i)
    for (Eigen::Index j = 0; j < mask.size(); ++j)
      if (mask.known(i, j)) out.values(i, j) = noisy_squared(i, j);
  return out;
}

ObservedMatrix to_distances(const ObservedMatrix& squared) {
  ObservedMatrix out = squared;
  out.values = squared.values.cwiseMax(0.0).cwiseSqrt();
  return out;
}

}  // namespace edmcal::observation
