#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "edmcal/observation.hpp"

namespace edmcal::baselines {

struct MdsResult {
  Matrix positions;
  bool degenerate = false;  // fewer than dim positive eigenvalues
};

/// Classical MDS embedding of a complete squared-distance matrix: top-dim
/// eigenpairs of the double-centered matrix, negative eigenvalues clamped.
MdsResult mds_localize(const Matrix& squared_distances, int dim);

/// Thrown when the observation graph does not connect all points; the
/// message lists the connected components.
class DisconnectedGraphError : public std::runtime_error {
 public:
  DisconnectedGraphError(std::string message,
                         std::vector<std::vector<Eigen::Index>> components)
      : std::runtime_error(std::move(message)), components(std::move(components)) {}
  std::vector<std::vector<Eigen::Index>> components;
};

/// Replaces every missing distance with the graph shortest-path length over
/// the known edges (Floyd-Warshall). Known entries pass through unchanged.
Matrix shortest_path_complete(const observation::ObservedMatrix& observed_distances);

struct SStressOptions {
  int weight_exponent = 0;  // w_ij = d_ij^alpha; -2 gives elastic scaling
  int max_iterations = 2000;
  double rel_tolerance = 1e-10;
  int restarts = 4;
  std::uint64_t seed = 0;
};

/// Weighted squared-distance stress of candidate positions against the
/// observed distances, summed over the known unordered pairs.
double sstress_cost(const Matrix& positions,
                    const observation::ObservedMatrix& observed_distances,
                    int weight_exponent);

Matrix sstress_gradient(const Matrix& positions,
                        const observation::ObservedMatrix& observed_distances,
                        int weight_exponent);

struct SStressResult {
  Matrix positions;
  double cost = 0.0;
  int best_restart = 0;
  int iterations = 0;
};

/// Local minimization of the s-stress cost by gradient descent with
/// backtracking; best of `restarts` initializations (first warm-started from
/// the shortest-path embedding when the graph is connected, the rest seeded
/// uniform in the bounding disc).
SStressResult sstress_solve(const observation::ObservedMatrix& observed_distances,
                            int dim, const SStressOptions& opts);

/// Shortest-path completion followed by classical MDS on the squared entries.
Matrix mds_map(const observation::ObservedMatrix& observed_distances, int dim);

}  // namespace edmcal::baselines
