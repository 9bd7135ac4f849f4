#include "edmcal/theory.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "edmcal/geometry.hpp"
#include "edmcal/rng.hpp"

namespace edmcal::theory {

namespace {

constexpr double kPi = 3.14159265358979323846;

// density of the distance between two uniform points on the unit disc
double unit_disc_distance_pdf(double r) {
  if (r <= 0.0 || r >= 2.0) return 0.0;
  return 2.0 * r * ((2.0 / kPi) * std::acos(r / 2.0) -
                    (r / kPi) * std::sqrt(1.0 - r * r / 4.0));
}

double simpson(double lo, double hi, int intervals) {
  if (hi <= lo) return 0.0;
  if (intervals % 2 == 1) ++intervals;
  const double h = (hi - lo) / intervals;
  double sum = unit_disc_distance_pdf(lo) + unit_disc_distance_pdf(hi);
  for (int k = 1; k < intervals; ++k)
    sum += unit_disc_distance_pdf(lo + k * h) * (k % 2 == 1 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

QBounds q_bounds(double a, double d_max) {
  if (a <= 0.0 || d_max <= 0.0)
    throw std::invalid_argument("radius and cutoff must be positive");
  QBounds out;
  if (d_max > 2.0 * a) {
    out.clamped = true;
    return out;  // no pair can exceed the diameter
  }
  const double ratio = d_max / a;
  out.q_min = std::max(1.0 - ratio * ratio, 0.0);
  const double xi = d_max / (2.0 * a);
  const double gamma = std::asin(xi);
  out.q_max = 1.0 - 2.0 * gamma / kPi + std::sin(4.0 * gamma) / (2.0 * kPi) +
              (2.0 * xi * xi / kPi) * (2.0 * gamma + std::sin(2.0 * gamma)) -
              2.0 * xi * xi;
  out.q_max = std::clamp(out.q_max, 0.0, 1.0);
  return out;
}

Incoherence incoherence(const Matrix& m, int eta) {
  const Eigen::Index n = m.rows();
  if (m.cols() != n) throw std::invalid_argument("matrix must be square");
  if (eta < 1 || eta > n) throw std::invalid_argument("eta out of range");

  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU);
  const Vector sigma = svd.singularValues();
  Incoherence out;
  out.degenerate = !(sigma(eta - 1) > 1e-9 * sigma(0));
  out.kappa = out.degenerate ? std::numeric_limits<double>::infinity()
                             : sigma(0) / sigma(eta - 1);

  const Matrix u = svd.matrixU().leftCols(eta);  // orthonormal columns
  const double scale = static_cast<double>(n);
  double mu1 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    mu1 = std::max(mu1, scale * u.row(i).squaredNorm() / eta);
  out.mu1 = mu1;

  const Matrix weighted = u * (sigma.head(eta) / sigma(0)).asDiagonal() * u.transpose();
  out.mu2 = scale * weighted.cwiseAbs().maxCoeff() / std::sqrt(static_cast<double>(eta));
  return out;
}

BoundTerms theorem1_rhs(double a, int n, double p, double varsigma, double d_max) {
  if (n < 2 || p <= 0.0) throw std::invalid_argument("need n >= 2 and p > 0");
  BoundTerms terms;
  terms.term1 = a * a * std::log2(static_cast<double>(n)) / (p * n);
  terms.term2 = varsigma * d_max * d_max / std::sqrt(p * static_cast<double>(n));
  return terms;
}

double disc_exceed_probability(double a, double t) {
  if (a <= 0.0) throw std::invalid_argument("radius must be positive");
  const double r = t / a;
  if (r <= 0.0) return 1.0;
  if (r >= 2.0) return 0.0;
  return simpson(r, 2.0, 4096);
}

double dmax_for_exceed_probability(double a, double q) {
  if (q <= 0.0) return 2.0 * a;
  if (q >= 1.0) return 0.0;
  double lo = 0.0, hi = 2.0 * a;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (disc_exceed_probability(a, mid) > q)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

Matrix sample_disc_positions(int n, double a, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(n, 2);
  for (int i = 0; i < n; ++i) {
    const double radius = a * std::sqrt(rng.uniform());
    const double angle = rng.uniform(0.0, 2.0 * kPi);
    x(i, 0) = radius * std::cos(angle);
    x(i, 1) = radius * std::sin(angle);
  }
  return x;
}

std::vector<BoundReport> verify_bounds(const BoundScenario& scenario) {
  std::vector<BoundReport> reports;
  if (scenario.n_values.empty()) return reports;

  const int n0 = *std::min_element(scenario.n_values.begin(), scenario.n_values.end());
  const double anchor_rate = std::log2(static_cast<double>(n0)) / n0;

  for (std::size_t n_index = 0; n_index < scenario.n_values.size(); ++n_index) {
    const int n = scenario.n_values[n_index];
    double d_max = scenario.d_max;
    if (scenario.scale_dmax) {
      const double q_target =
          scenario.q_anchor * (std::log2(static_cast<double>(n)) / n) / anchor_rate;
      d_max = dmax_for_exceed_probability(scenario.a, q_target);
    }
    const QBounds qb = q_bounds(scenario.a, std::min(d_max, 2.0 * scenario.a));
    const BoundTerms terms = theorem1_rhs(scenario.a, n, scenario.p, scenario.varsigma, d_max);

    for (int trial = 0; trial < scenario.trials; ++trial) {
      const std::uint64_t trial_seed =
          mix_seed(scenario.seed ^ static_cast<std::uint64_t>(trial),
                   static_cast<std::uint64_t>(n_index) + 0x51);
      const Matrix x = sample_disc_positions(n, scenario.a, mix_seed(trial_seed, 1));
      const Matrix d = geometry::build_squared_distances(x).cwiseSqrt();
      const Matrix m = d.cwiseProduct(d);

      observation::NoiseModel noise;
      noise.varsigma = scenario.varsigma;
      noise.seed = mix_seed(trial_seed, 2);
      const Matrix d_noisy = observation::add_noise(d, noise);
      const Matrix m_noisy = d_noisy.cwiseProduct(d_noisy);

      // independent Bernoulli(p) sampling mask over all unordered pairs
      Rng rng(mix_seed(trial_seed, 3));
      BoolMatrix sampled = BoolMatrix::Constant(n, n, false);
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
          sampled(i, j) = sampled(j, i) = rng.uniform() < scenario.p;

      Matrix structured = Matrix::Zero(n, n);  // hidden part: d >= d_max
      Matrix noise_known = Matrix::Zero(n, n); // noise on the local part
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (i == j || !sampled(i, j)) continue;
          if (d(i, j) >= d_max)
            structured(i, j) = m(i, j);
          else
            noise_known(i, j) = m_noisy(i, j) - m(i, j);
        }
      }

      BoundReport report;
      report.a = scenario.a;
      report.n = n;
      report.p = scenario.p;
      report.varsigma = scenario.varsigma;
      report.d_max = d_max;
      report.q_min = qb.q_min;
      report.q_max = qb.q_max;
      const Incoherence inc = incoherence(m, 4);
      report.mu1 = inc.mu1;
      report.mu2 = inc.mu2;
      report.kappa_eta = inc.kappa;
      report.term1 = terms.term1;
      report.term2 = terms.term2;
      report.norm_structured = spectral_norm(structured);
      report.norm_noise = spectral_norm(noise_known);
      report.seed = trial_seed;
      report.trial = trial;
      reports.push_back(report);
    }
  }
  return reports;
}

}  // namespace edmcal::theory
