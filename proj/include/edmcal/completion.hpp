#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edmcal/observation.hpp"

namespace edmcal::completion {

/// Rank-eta factorization U * S * V^T carried through the completion
/// iterations.
struct FactoredEstimate {
  Matrix u;  // N x eta
  Matrix s;  // eta x eta
  Matrix v;  // N x eta
  bool rank_deficient = false;

  Matrix product() const { return u * s * v.transpose(); }
  int rank() const { return static_cast<int>(u.cols()); }
};

struct SolverOptions {
  int max_iterations = 500;
  double rel_tolerance = 1e-6;
  // backtracking line search: initial step 1, halved until the Armijo
  // sufficient-decrease condition holds
  double armijo_constant = 1e-4;
  double backtrack_factor = 0.5;
  int max_backtracks = 60;
  // inner distance-cone projection
  int edm_max_sweeps = 50;
  double edm_coord_tolerance = 1e-8;
  // final position fit against the observed entries
  int fit_max_sweeps = 2000;
  std::uint64_t seed = 0;
};

/// Removes randomly chosen entries (as symmetric pairs) from rows/columns
/// carrying more than twice the mean number of known entries, so no single
/// row dominates the spectrum of the zero-filled matrix.
observation::ObservedMatrix trim(const observation::ObservedMatrix& observed,
                                 std::uint64_t seed);

/// Rank-eta spectral initialization: zero-fill the unknown entries, take the
/// top-eta SVD triplets, and rescale by N^2/|E| (|E| counts known ordered
/// off-diagonal entries plus the N known diagonal zeros).
FactoredEstimate spectral_init(const observation::ObservedMatrix& observed, int eta);

enum class RefineStatus { kConverged, kMaxIterations, kLineSearchStalled };

const char* to_string(RefineStatus status);

struct RefineResult {
  FactoredEstimate estimate;
  std::vector<double> costs;  // data-fit cost after each iteration
  RefineStatus status = RefineStatus::kConverged;
};

/// Gradient descent on (U, V) of the known-entry squared-error cost, with an
/// exact least-squares solve for S at every iteration. The cost sequence is
/// non-increasing.
RefineResult mc_refine(const FactoredEstimate& init,
                       const observation::ObservedMatrix& observed,
                       const SolverOptions& opts);

/// Projection onto symmetric positive hollow matrices: clamp negatives to
/// zero, then average with the transpose, then zero the diagonal.
Matrix cadzow_project(const Matrix& m);

struct EdmProjectResult {
  Matrix positions;           // N x dim
  FactoredEstimate estimate;  // rank-eta refactorization of the projected EDM
  double cost = 0.0;          // squared Frobenius distance to the target
  int sweeps = 0;
  bool converged = true;
};

/// Projects a factored estimate onto the cone of Euclidean distance matrices:
/// Cadzow-projects the product, then minimizes the squared Frobenius distance
/// between it and the EDM generated by candidate positions, via cyclic
/// coordinate descent in which each scalar update solves a quartic exactly.
/// Without `initial_positions` the search starts from the classical MDS
/// embedding of the projected target (the cone vertex is a saddle of the
/// cost and descent from it tends to end in reflected layouts).
EdmProjectResult edm_cone_project(const FactoredEstimate& estimate, int dim,
                                  const SolverOptions& opts,
                                  const std::optional<Matrix>& initial_positions = {});

/// Position fit in the distance cone against the observed entries only:
/// cyclic exact-quartic coordinate descent on
///   sum_(i,j) in E  w_ij (|x_i - x_j|^2 - M_ij)^2,
/// with inverse-square weights w_ij = 1 / max(M_ij, floor)^2 matching the
/// relative measurement-noise model (noise std on a squared distance grows
/// with the squared distance itself). Floor guards clamped near-zero entries.
Matrix fit_positions_to_observed(const observation::ObservedMatrix& observed,
                                 const Matrix& initial_positions,
                                 const SolverOptions& opts);

enum class Variant { kMC, kMC2, kEMC2 };

Variant variant_from_string(const std::string& name);
const char* to_string(Variant variant);

struct IterationStat {
  int iteration = 0;
  double cost = 0.0;
  double known_rmse = 0.0;
};

struct SolveResult {
  Matrix positions;  // N x dim
  Matrix completed;  // N x N squared-distance estimate
  std::vector<IterationStat> history;
  RefineStatus status = RefineStatus::kConverged;
  int eta = 0;
};

/// Full pipeline: trim, initialization (spectral start or a shortest-path
/// embedding, whichever fits the data better), then refinement.
///   MC    - plain gradient refinement, coordinates via classical MDS.
///   MC2   - Cadzow projection after every gradient step, kept when it does
///           not hurt the data fit.
///   EMC2  - refinement followed by a cone-constrained position fit against
///           the observed entries (inverse-square weighted); positions come
///           out of the fit directly and the completed matrix is their EDM.
/// `eta` defaults to dim + 2 when passed as 0.
SolveResult solve(const observation::ObservedMatrix& observed, int dim,
                  Variant variant, const SolverOptions& opts, int eta = 0);

/// RMSE of an estimate against the known off-diagonal entries.
double known_entry_rmse(const Matrix& estimate,
                        const observation::ObservedMatrix& observed);

/// Data-fit cost 1/2 sum over known entries (and the zero diagonal) of
/// (M_ij - (U S V^T)_ij)^2, as minimized by the refinement.
double fit_cost(const observation::ObservedMatrix& observed, const Matrix& u,
                const Matrix& s, const Matrix& v);

struct FitGradient {
  Matrix with_respect_to_u;
  Matrix with_respect_to_v;
  Matrix with_respect_to_s;
};

/// Analytic gradient of fit_cost in all three factors.
FitGradient fit_gradient(const observation::ObservedMatrix& observed,
                         const Matrix& u, const Matrix& s, const Matrix& v);

}  // namespace edmcal::completion
