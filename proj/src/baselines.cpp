#include "edmcal/baselines.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "edmcal/geometry.hpp"
#include "edmcal/rng.hpp"

namespace edmcal::baselines {

namespace {

double pair_weight(double distance, int exponent) {
  if (exponent == 0) return 1.0;
  return std::pow(std::max(distance, 1e-12), exponent);
}

std::vector<std::vector<Eigen::Index>> connected_components(
    const observation::ObservedMatrix& observed) {
  const Eigen::Index n = observed.size();
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  std::vector<std::vector<Eigen::Index>> components;
  for (Eigen::Index start = 0; start < n; ++start) {
    if (label[static_cast<std::size_t>(start)] >= 0) continue;
    std::vector<Eigen::Index> stack{start};
    std::vector<Eigen::Index> component;
    label[static_cast<std::size_t>(start)] = static_cast<int>(components.size());
    while (!stack.empty()) {
      const Eigen::Index i = stack.back();
      stack.pop_back();
      component.push_back(i);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j != i && observed.known(i, j) && label[static_cast<std::size_t>(j)] < 0) {
          label[static_cast<std::size_t>(j)] = static_cast<int>(components.size());
          stack.push_back(j);
        }
      }
    }
    std::sort(component.begin(), component.end());
    components.push_back(std::move(component));
  }
  return components;
}

}  // namespace

MdsResult mds_localize(const Matrix& squared_distances, int dim) {
  const Eigen::Index n = squared_distances.rows();
  if (squared_distances.cols() != n)
    throw std::invalid_argument("squared-distance matrix must be square");
  if (!squared_distances.allFinite())
    throw std::invalid_argument("squared-distance matrix must be complete");
  if (n < dim + 1)
    throw std::invalid_argument("need at least dim+1 points to embed");

  const Matrix gram = geometry::double_center(squared_distances);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed");

  MdsResult result;
  result.positions = Matrix::Zero(n, dim);
  int positive = 0;
  // eigenvalues come back ascending; take the top `dim`. Values within
  // round-off of zero count as zero.
  const double floor = 1e-12 * std::max(eig.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
  for (int k = 0; k < dim; ++k) {
    const Eigen::Index idx = n - 1 - k;
    const double lambda = eig.eigenvalues()(idx);
    if (lambda > floor) {
      result.positions.col(k) = eig.eigenvectors().col(idx) * std::sqrt(lambda);
      ++positive;
    }
  }
  result.degenerate = positive < dim;
  return result;
}

Matrix shortest_path_complete(const observation::ObservedMatrix& observed_distances) {
  const Eigen::Index n = observed_distances.size();
  const double inf = std::numeric_limits<double>::infinity();
  Matrix dist = Matrix::Constant(n, n, inf);
  dist.diagonal().setZero();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && observed_distances.known(i, j))
        dist(i, j) = observed_distances.values(i, j);

  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (dist(i, k) + dist(k, j) < dist(i, j))
          dist(i, j) = dist(i, k) + dist(k, j);

  if (!dist.allFinite()) {
    auto components = connected_components(observed_distances);
    std::ostringstream msg;
    msg << "observation graph is disconnected (" << components.size() << " components):";
    for (const auto& component : components) {
      msg << " {";
      for (std::size_t k = 0; k < component.size(); ++k)
        msg << (k ? "," : "") << component[k];
      msg << "}";
    }
    throw DisconnectedGraphError(msg.str(), std::move(components));
  }

  // keep the measured entries verbatim
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && observed_distances.known(i, j))
        dist(i, j) = observed_distances.values(i, j);
  return dist;
}

double sstress_cost(const Matrix& positions,
                    const observation::ObservedMatrix& observed_distances,
                    int weight_exponent) {
  double cost = 0.0;
  const Eigen::Index n = observed_distances.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (!observed_distances.known(i, j)) continue;
      const double d = observed_distances.values(i, j);
      const double e = (positions.row(i) - positions.row(j)).squaredNorm() - d * d;
      cost += pair_weight(d, weight_exponent) * e * e;
    }
  }
  return cost;
}

Matrix sstress_gradient(const Matrix& positions,
                        const observation::ObservedMatrix& observed_distances,
                        int weight_exponent) {
  const Eigen::Index n = observed_distances.size();
  Matrix grad = Matrix::Zero(n, positions.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (!observed_distances.known(i, j)) continue;
      const double d = observed_distances.values(i, j);
      const double w = pair_weight(d, weight_exponent);
      const auto delta = positions.row(i) - positions.row(j);
      const double e = delta.squaredNorm() - d * d;
      grad.row(i) += 4.0 * w * e * delta;
      grad.row(j) -= 4.0 * w * e * delta;
    }
  }
  return grad;
}

namespace {

struct DescentOutcome {
  Matrix positions;
  double cost = 0.0;
  int iterations = 0;
};

DescentOutcome sstress_descend(Matrix x,
                               const observation::ObservedMatrix& observed,
                               const SStressOptions& opts) {
  double cost = sstress_cost(x, observed, opts.weight_exponent);
  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    const Matrix grad = sstress_gradient(x, observed, opts.weight_exponent);
    const double gnorm = grad.norm();
    if (!(gnorm > 1e-14 * (1.0 + cost))) break;
    const Matrix dir = grad / gnorm;
    double t = 1.0;
    bool moved = false;
    for (int b = 0; b < 60; ++b) {
      const Matrix trial = x - t * dir;
      const double trial_cost = sstress_cost(trial, observed, opts.weight_exponent);
      if (trial_cost <= cost - 1e-4 * t * gnorm) {
        const double drop = cost - trial_cost;
        x = trial;
        cost = trial_cost;
        moved = true;
        if (drop <= opts.rel_tolerance * std::max(cost, 1e-30)) iter = opts.max_iterations;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  return {std::move(x), cost, iter};
}

}  // namespace

SStressResult sstress_solve(const observation::ObservedMatrix& observed_distances,
                            int dim, const SStressOptions& opts) {
  if (opts.restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  const Eigen::Index n = observed_distances.size();

  double max_distance = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (observed_distances.known(i, j))
        max_distance = std::max(max_distance, observed_distances.values(i, j));
  const double radius = max_distance > 0.0 ? 0.5 * max_distance : 1.0;

  SStressResult best;
  best.cost = std::numeric_limits<double>::infinity();
  for (int r = 0; r < opts.restarts; ++r) {
    Matrix init;
    if (r == 0) {
      try {
        init = mds_map(observed_distances, dim);
      } catch (const DisconnectedGraphError&) {
        // warm start unavailable; fall through to a random draw
      }
    }
    if (init.size() == 0) {
      Rng rng(mix_seed(opts.seed, static_cast<std::uint64_t>(r)));
      init = Matrix::Zero(n, dim);
      for (Eigen::Index i = 0; i < n; ++i) {
        // uniform in the bounding ball
        Vector direction(dim);
        double norm = 0.0;
        while (norm < 1e-12) {
          for (int d = 0; d < dim; ++d) direction(d) = rng.normal();
          norm = direction.norm();
        }
        const double r01 = rng.uniform();
        init.row(i) =
            (radius * std::pow(r01, 1.0 / dim) / norm) * direction.transpose();
      }
    }
    DescentOutcome outcome = sstress_descend(std::move(init), observed_distances, opts);
    if (outcome.cost < best.cost) {
      best.positions = std::move(outcome.positions);
      best.cost = outcome.cost;
      best.best_restart = r;
      best.iterations = outcome.iterations;
    }
  }
  return best;
}

Matrix mds_map(const observation::ObservedMatrix& observed_distances, int dim) {
  const Matrix completed = shortest_path_complete(observed_distances);
  return mds_localize(completed.cwiseProduct(completed), dim).positions;
}

}  // namespace edmcal::baselines
