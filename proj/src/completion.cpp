#include "edmcal/completion.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "edmcal/baselines.hpp"
#include "edmcal/geometry.hpp"
#include "edmcal/rng.hpp"

namespace edmcal::completion {

namespace {

// Known ordered off-diagonal entries; the zero diagonal is appended as known
// data so that a full mask reproduces the matrix exactly under the N^2/|E|
// scaling.
struct KnownEntries {
  std::vector<Eigen::Index> rows;
  std::vector<Eigen::Index> cols;
  std::vector<double> values;
  Eigen::Index n = 0;

  static KnownEntries from(const observation::ObservedMatrix& observed) {
    KnownEntries k;
    k.n = observed.size();
    for (Eigen::Index i = 0; i < k.n; ++i) {
      for (Eigen::Index j = 0; j < k.n; ++j) {
        if (i == j || observed.known(i, j)) {
          k.rows.push_back(i);
          k.cols.push_back(j);
          k.values.push_back(i == j ? 0.0 : observed.values(i, j));
        }
      }
    }
    return k;
  }

  std::size_t count() const { return values.size(); }

  double sum_squares() const {
    double total = 0.0;
    for (const double v : values) total += v * v;
    return total;
  }
};

double fit_cost(const KnownEntries& known, const Matrix& u, const Matrix& s,
                const Matrix& v) {
  const Matrix us = u * s;
  double cost = 0.0;
  for (std::size_t e = 0; e < known.count(); ++e) {
    const double r = known.values[e] - us.row(known.rows[e]).dot(v.row(known.cols[e]));
    cost += r * r;
  }
  return 0.5 * cost;
}

// Exact least-squares solve for S given (U, V): normal equations over the
// eta^2 unknowns vec(S).
Matrix solve_s(const KnownEntries& known, const Matrix& u, const Matrix& v) {
  const Eigen::Index eta = u.cols();
  const Eigen::Index dim = eta * eta;
  Matrix ata = Matrix::Zero(dim, dim);
  Vector atb = Vector::Zero(dim);
  Vector a(dim);
  for (std::size_t e = 0; e < known.count(); ++e) {
    const auto ui = u.row(known.rows[e]);
    const auto vj = v.row(known.cols[e]);
    for (Eigen::Index l = 0; l < eta; ++l)
      for (Eigen::Index k = 0; k < eta; ++k) a(l * eta + k) = ui(k) * vj(l);
    ata.selfadjointView<Eigen::Lower>().rankUpdate(a);
    atb += a * known.values[e];
  }
  ata = ata.selfadjointView<Eigen::Lower>();
  const Vector sol = ata.completeOrthogonalDecomposition().solve(atb);
  return Eigen::Map<const Matrix>(sol.data(), eta, eta);
}

struct StepOutcome {
  double cost = 0.0;       // cost after the accepted step (S fixed)
  bool moved = false;      // a step was accepted
  bool stationary = false; // gradient numerically zero
};

// One line-searched descent step on (U, V) with S held at its exact
// least-squares value for the incoming (U, V).
StepOutcome gradient_step(const KnownEntries& known, Matrix& u, Matrix& s,
                          Matrix& v, const SolverOptions& opts) {
  s = solve_s(known, u, v);

  const Eigen::Index eta = u.cols();
  Matrix grad_u = Matrix::Zero(u.rows(), eta);
  Matrix grad_v = Matrix::Zero(v.rows(), eta);
  Matrix us = u * s;
  const Matrix vst = v * s.transpose();
  double cost0 = 0.0;
  for (std::size_t e = 0; e < known.count(); ++e) {
    const Eigen::Index i = known.rows[e];
    const Eigen::Index j = known.cols[e];
    const double r = us.row(i).dot(v.row(j)) - known.values[e];
    cost0 += r * r;
    grad_u.row(i) += r * vst.row(j);
    grad_v.row(j) += r * us.row(i);
  }
  cost0 *= 0.5;

  StepOutcome out;
  out.cost = cost0;
  // numerically zero cost (relative to the data scale) counts as solved
  const double cost_floor = 1e-24 * std::max(known.sum_squares(), 1.0);
  const double grad_norm = std::sqrt(grad_u.squaredNorm() + grad_v.squaredNorm());
  if (cost0 <= cost_floor || !(grad_norm > 1e-14 * (1.0 + cost0))) {
    out.stationary = true;
    return out;
  }

  // Normalized steepest-descent direction; directional derivative -grad_norm.
  const Matrix dir_u = grad_u / grad_norm;
  const Matrix dir_v = grad_v / grad_norm;

  // (U - t Du) S (V - t Dv)^T is quadratic in t per entry; precompute the
  // three coefficients so each backtrack costs O(|E|).
  const Matrix dus = dir_u * s;
  std::vector<double> lin(known.count()), quad(known.count()), res0(known.count());
  for (std::size_t e = 0; e < known.count(); ++e) {
    const Eigen::Index i = known.rows[e];
    const Eigen::Index j = known.cols[e];
    res0[e] = us.row(i).dot(v.row(j)) - known.values[e];
    lin[e] = -dus.row(i).dot(v.row(j)) - us.row(i).dot(dir_v.row(j));
    quad[e] = dus.row(i).dot(dir_v.row(j));
  }

  double t = 1.0;
  for (int b = 0; b < opts.max_backtracks; ++b) {
    double cost_t = 0.0;
    for (std::size_t e = 0; e < known.count(); ++e) {
      const double r = res0[e] + t * lin[e] + t * t * quad[e];
      cost_t += r * r;
    }
    cost_t *= 0.5;
    if (cost_t <= cost0 - opts.armijo_constant * t * grad_norm) {
      u -= t * dir_u;
      v -= t * dir_v;
      // re-orthonormalize the factors, absorbing the triangular parts into S
      // so the product (and the cost) is unchanged while the next gradient
      // stays well conditioned
      Eigen::HouseholderQR<Matrix> qr_u(u);
      Eigen::HouseholderQR<Matrix> qr_v(v);
      const Matrix r_u =
          qr_u.matrixQR().topRows(eta).template triangularView<Eigen::Upper>();
      const Matrix r_v =
          qr_v.matrixQR().topRows(eta).template triangularView<Eigen::Upper>();
      u = qr_u.householderQ() * Matrix::Identity(u.rows(), eta);
      v = qr_v.householderQ() * Matrix::Identity(v.rows(), eta);
      s = r_u * s * r_v.transpose();
      out.cost = cost_t;
      out.moved = true;
      return out;
    }
    t *= opts.backtrack_factor;
  }
  return out;  // stalled: no acceptable step
}

FactoredEstimate refactor(const Matrix& m, int eta) {
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  FactoredEstimate f;
  f.u = svd.matrixU().leftCols(eta);
  f.v = svd.matrixV().leftCols(eta);
  f.s = svd.singularValues().head(eta).asDiagonal();
  const double lead = svd.singularValues()(0);
  f.rank_deficient = !(svd.singularValues()(eta - 1) > 1e-9 * lead);
  return f;
}

Matrix edm_from_positions(const Matrix& x) {
  return geometry::build_squared_distances(x);
}

double fit_cost_matrix(const KnownEntries& known, const Matrix& estimate) {
  double cost = 0.0;
  for (std::size_t e = 0; e < known.count(); ++e) {
    const double r = known.values[e] - estimate(known.rows[e], known.cols[e]);
    cost += r * r;
  }
  return 0.5 * cost;
}

int cubic_roots(double a, double b, double c, double d, double roots[4]);

// Cyclic coordinate descent on sum_j w_aj (|x_a - x_j|^2 - T_aj)^2 where the
// sum runs over the unmasked pairs. Each scalar coordinate subproblem is a
// quartic minimized exactly through the real roots of its derivative; ties
// break toward the smallest magnitude. Returns the sweep count.
int coordinate_descent(Matrix& x, const Matrix& target, const Matrix* weights,
                       const BoolMatrix* pair_mask, int max_sweeps,
                       double coord_tolerance, bool* converged) {
  const Eigen::Index n = x.rows();
  const Eigen::Index dim = x.cols();
  if (converged) *converged = false;
  int sweeps = 0;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index d = 0; d < dim; ++d) {
        // cost restricted to coordinate t = x(a, d):
        //   sum_j w_j (t^2 - 2 b_j t + k_j)^2,
        // b_j = x(j, d), k_j = cross-dimension residual minus target entry
        double sum_w = 0.0, sum_b = 0.0, sum_b2 = 0.0, sum_k = 0.0, sum_kb = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
          if (j == a) continue;
          if (pair_mask && !(*pair_mask)(a, j)) continue;
          const double w = weights ? (*weights)(a, j) : 1.0;
          if (!(w > 0.0)) continue;
          const double b = x(j, d);
          double rest = 0.0;
          for (Eigen::Index d2 = 0; d2 < dim; ++d2) {
            if (d2 == d) continue;
            const double diff = x(a, d2) - x(j, d2);
            rest += diff * diff;
          }
          const double k = b * b + rest - target(a, j);
          sum_w += w;
          sum_b += w * b;
          sum_b2 += w * b * b;
          sum_k += w * k;
          sum_kb += w * k * b;
        }
        if (!(sum_w > 0.0)) continue;
        double roots[4];
        const int root_count =
            cubic_roots(sum_w, -3.0 * sum_b, 2.0 * sum_b2 + sum_k, -sum_kb, roots);
        // quartic value up to the constant term, enough for comparisons
        const auto value_at = [&](double t) {
          return sum_w * t * t * t * t / 4.0 - sum_b * t * t * t +
                 (2.0 * sum_b2 + sum_k) * t * t / 2.0 - sum_kb * t;
        };
        // the current coordinate competes too, so an update never goes uphill
        double best_t = x(a, d);
        double best_val = value_at(best_t);
        for (int r = 0; r < root_count; ++r) {
          const double t = roots[r];
          const double val = value_at(t);
          const bool better = val < best_val - 1e-15 * (1.0 + std::abs(best_val));
          const bool tie = std::abs(val - best_val) <= 1e-15 * (1.0 + std::abs(best_val));
          if (better || (tie && std::abs(t) < std::abs(best_t))) {
            best_val = val;
            best_t = t;
          }
        }
        max_delta = std::max(max_delta, std::abs(best_t - x(a, d)));
        x(a, d) = best_t;
      }
    }
    sweeps = sweep + 1;
    if (max_delta < coord_tolerance) {
      if (converged) *converged = true;
      break;
    }
  }
  return sweeps;
}

// Real roots of a*t^3 + b*t^2 + c*t + d with a != 0, each polished by a
// couple of Newton steps. Near a vanishing discriminant (double roots from
// symmetric geometry) both closed-form branches contribute candidates.
int cubic_roots(double a, double b, double c, double d, double roots[4]) {
  const double p = b / a;
  const double q = c / a;
  const double r = d / a;
  // depressed cubic y^3 + A y + B with t = y - p/3
  const double aa = q - p * p / 3.0;
  const double bb = 2.0 * p * p * p / 27.0 - p * q / 3.0 + r;
  const double shift = -p / 3.0;
  const double disc = bb * bb / 4.0 + aa * aa * aa / 27.0;
  const double disc_scale =
      std::max(bb * bb / 4.0 + std::abs(aa * aa * aa) / 27.0, 1e-300);
  int count = 0;
  if (disc > 1e-10 * disc_scale) {
    const double sq = std::sqrt(disc);
    const double y = std::cbrt(-bb / 2.0 + sq) + std::cbrt(-bb / 2.0 - sq);
    roots[count++] = y + shift;
  } else if (aa == 0.0 && bb == 0.0) {
    roots[count++] = shift;
  } else {
    if (disc > 0.0) {
      const double sq = std::sqrt(disc);
      roots[count++] = std::cbrt(-bb / 2.0 + sq) + std::cbrt(-bb / 2.0 - sq) + shift;
    }
    const double m = 2.0 * std::sqrt(std::max(-aa, 0.0) / 3.0);
    if (m > 0.0) {
      const double arg = std::clamp(3.0 * bb / (aa * m), -1.0, 1.0);
      const double theta = std::acos(arg) / 3.0;
      for (int k = 0; k < 3; ++k)
        roots[count++] = m * std::cos(theta - 2.0943951023931953 * k) + shift;
    } else {
      roots[count++] = shift;
    }
  }
  for (int k = 0; k < count; ++k) {
    double t = roots[k];
    for (int it = 0; it < 2; ++it) {
      const double f = ((a * t + b) * t + c) * t + d;
      const double df = (3.0 * a * t + 2.0 * b) * t + c;
      if (df != 0.0) t -= f / df;
    }
    roots[k] = t;
  }
  return count;
}

}  // namespace

const char* to_string(RefineStatus status) {
  switch (status) {
    case RefineStatus::kConverged: return "converged";
    case RefineStatus::kMaxIterations: return "max_iterations";
    case RefineStatus::kLineSearchStalled: return "line_search_stalled";
  }
  return "unknown";
}

Variant variant_from_string(const std::string& name) {
  if (name == "mc") return Variant::kMC;
  if (name == "mc2") return Variant::kMC2;
  if (name == "emc2") return Variant::kEMC2;
  throw std::invalid_argument("unknown solver variant: " + name);
}

const char* to_string(Variant variant) {
  switch (variant) {
    case Variant::kMC: return "mc";
    case Variant::kMC2: return "mc2";
    case Variant::kEMC2: return "emc2";
  }
  return "unknown";
}

observation::ObservedMatrix trim(const observation::ObservedMatrix& observed,
                                 std::uint64_t seed) {
  const Eigen::Index n = observed.size();
  observation::ObservedMatrix out = observed;

  std::vector<int> counts(static_cast<std::size_t>(n), 0);
  long total = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && out.known(i, j)) {
        ++counts[static_cast<std::size_t>(i)];
        ++total;
      }
    }
  }
  if (total == 0) throw std::invalid_argument("observed matrix has no known entries");
  const double threshold = 2.0 * static_cast<double>(total) / static_cast<double>(n);

  Rng rng(seed);
  for (Eigen::Index i = 0; i < n; ++i) {
    while (static_cast<double>(counts[static_cast<std::size_t>(i)]) > threshold) {
      std::vector<Eigen::Index> candidates;
      for (Eigen::Index j = 0; j < n; ++j) {
        // keep at least one entry in the partner row
        if (j != i && out.known(i, j) && counts[static_cast<std::size_t>(j)] > 1)
          candidates.push_back(j);
      }
      if (candidates.empty()) break;
      const Eigen::Index j =
          candidates[static_cast<std::size_t>(rng.integer(candidates.size()))];
      out.mask.known(i, j) = false;
      out.mask.known(j, i) = false;
      out.values(i, j) = 0.0;
      out.values(j, i) = 0.0;
      --counts[static_cast<std::size_t>(i)];
      --counts[static_cast<std::size_t>(j)];
    }
  }
  return out;
}

FactoredEstimate spectral_init(const observation::ObservedMatrix& observed, int eta) {
  const Eigen::Index n = observed.size();
  if (eta < 1 || eta > n) throw std::invalid_argument("target rank out of range");
  Matrix filled = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && observed.known(i, j)) filled(i, j) = observed.values(i, j);

  const double known_with_diag =
      static_cast<double>(observed.mask.known_count() + static_cast<std::size_t>(n));
  const double scale = static_cast<double>(n) * static_cast<double>(n) / known_with_diag;

  Eigen::BDCSVD<Matrix> svd(filled, Eigen::ComputeThinU | Eigen::ComputeThinV);
  FactoredEstimate f;
  f.u = svd.matrixU().leftCols(eta);
  f.v = svd.matrixV().leftCols(eta);
  f.s = (scale * svd.singularValues().head(eta)).asDiagonal();
  const double lead = svd.singularValues()(0);
  f.rank_deficient = lead <= 0.0 || !(svd.singularValues()(eta - 1) > 1e-9 * lead);
  return f;
}

RefineResult mc_refine(const FactoredEstimate& init,
                       const observation::ObservedMatrix& observed,
                       const SolverOptions& opts) {
  const KnownEntries known = KnownEntries::from(observed);
  RefineResult result;
  result.estimate = init;
  Matrix u = init.u;
  Matrix s = init.s;
  Matrix v = init.v;

  double prev_cost = std::numeric_limits<double>::infinity();
  result.status = RefineStatus::kMaxIterations;
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    const StepOutcome step = gradient_step(known, u, s, v, opts);
    result.costs.push_back(step.cost);
    if (step.stationary) {
      result.status = RefineStatus::kConverged;
      break;
    }
    if (!step.moved) {
      result.status = RefineStatus::kLineSearchStalled;
      break;
    }
    if (std::isfinite(prev_cost) &&
        std::abs(prev_cost - step.cost) <= opts.rel_tolerance * std::max(prev_cost, 1e-30)) {
      result.status = RefineStatus::kConverged;
      prev_cost = step.cost;
      break;
    }
    prev_cost = step.cost;
  }
  result.estimate.u = u;
  result.estimate.s = s;
  result.estimate.v = v;
  result.estimate.rank_deficient = init.rank_deficient;
  return result;
}

Matrix cadzow_project(const Matrix& m) {
  Matrix clamped = m.cwiseMax(0.0);
  Matrix out = 0.5 * (clamped + clamped.transpose());
  out.diagonal().setZero();
  return out;
}

EdmProjectResult edm_cone_project(const FactoredEstimate& estimate, int dim,
                                  const SolverOptions& opts,
                                  const std::optional<Matrix>& initial_positions) {
  if (dim < 1) throw std::invalid_argument("embedding dimension must be positive");
  const Matrix target = cadzow_project(estimate.product());
  const Eigen::Index n = target.rows();

  Matrix x;
  if (initial_positions && initial_positions->rows() == n &&
      initial_positions->cols() == dim) {
    x = *initial_positions;
  } else {
    // The classical MDS embedding of the target is already close to the
    // nearest distance matrix; descent from the cone vertex instead tends to
    // fold points into reflected local minima.
    try {
      x = baselines::mds_localize(target, dim).positions;
    } catch (const std::exception&) {
      // fall back to the cone vertex plus a seeded jitter that escapes its
      // saddle
      const double extent = std::sqrt(std::max(target.maxCoeff(), 0.0)) / 2.0;
      const double amplitude = 1e-3 * (extent > 0.0 ? extent : 1.0);
      Rng rng(opts.seed);
      x = Matrix::Zero(n, dim);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index d = 0; d < dim; ++d)
          x(i, d) = rng.uniform(-amplitude, amplitude);
    }
  }

  EdmProjectResult result;
  result.sweeps = coordinate_descent(x, target, nullptr, nullptr, opts.edm_max_sweeps,
                                     opts.edm_coord_tolerance, &result.converged);

  const Matrix projected = edm_from_positions(x);
  result.positions = std::move(x);
  result.cost = (projected - target).squaredNorm();
  result.estimate = refactor(projected, estimate.rank());
  return result;
}

double fit_cost(const observation::ObservedMatrix& observed, const Matrix& u,
                const Matrix& s, const Matrix& v) {
  return fit_cost(KnownEntries::from(observed), u, s, v);
}

FitGradient fit_gradient(const observation::ObservedMatrix& observed,
                         const Matrix& u, const Matrix& s, const Matrix& v) {
  const KnownEntries known = KnownEntries::from(observed);
  const Eigen::Index eta = u.cols();
  FitGradient grad;
  grad.with_respect_to_u = Matrix::Zero(u.rows(), eta);
  grad.with_respect_to_v = Matrix::Zero(v.rows(), eta);
  grad.with_respect_to_s = Matrix::Zero(eta, eta);
  const Matrix us = u * s;
  const Matrix vst = v * s.transpose();
  for (std::size_t e = 0; e < known.count(); ++e) {
    const Eigen::Index i = known.rows[e];
    const Eigen::Index j = known.cols[e];
    const double r = us.row(i).dot(v.row(j)) - known.values[e];
    grad.with_respect_to_u.row(i) += r * vst.row(j);
    grad.with_respect_to_v.row(j) += r * us.row(i);
    grad.with_respect_to_s += r * u.row(i).transpose() * v.row(j);
  }
  return grad;
}

double known_entry_rmse(const Matrix& estimate,
                        const observation::ObservedMatrix& observed) {
  double sum = 0.0;
  std::size_t count = 0;
  const Eigen::Index n = observed.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && observed.known(i, j)) {
        const double r = estimate(i, j) - observed.values(i, j);
        sum += r * r;
        ++count;
      }
    }
  }
  return count == 0 ? 0.0 : std::sqrt(sum / static_cast<double>(count));
}

Matrix fit_positions_to_observed(const observation::ObservedMatrix& observed,
                                 const Matrix& initial_positions,
                                 const SolverOptions& opts) {
  const Eigen::Index n = observed.size();
  if (initial_positions.rows() != n)
    throw std::invalid_argument("initial positions do not match the observed size");
  double max_known = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (observed.known(i, j)) max_known = std::max(max_known, observed.values(i, j));
  const double floor = std::max(1e-4 * max_known, 1e-12);
  Matrix weights = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && observed.known(i, j)) {
        const double scale = std::max(observed.values(i, j), floor);
        weights(i, j) = 1.0 / (scale * scale);
      }
  Matrix x = initial_positions;
  coordinate_descent(x, observed.values, &weights, &observed.mask.known,
                     opts.fit_max_sweeps, opts.edm_coord_tolerance, nullptr);
  return x;
}

namespace {

// Completion initialization: the zero-filled spectral factorization next to a
// geodesic candidate (shortest-path completion embedded by classical MDS).
// Structured missing entries are exactly the large ones, which derails the
// zero-filled start; the data-fit cost picks the better basin per instance.
FactoredEstimate best_initialization(const observation::ObservedMatrix& trimmed,
                                     const KnownEntries& known, int dim, int eta) {
  FactoredEstimate spectral = spectral_init(trimmed, eta);
  const double spectral_cost = fit_cost(known, spectral.u, spectral.s, spectral.v);
  try {
    const Matrix embedded =
        baselines::mds_map(observation::to_distances(trimmed), dim);
    FactoredEstimate geodesic = refactor(edm_from_positions(embedded), eta);
    geodesic.rank_deficient = spectral.rank_deficient;
    const double geodesic_cost = fit_cost(known, geodesic.u, geodesic.s, geodesic.v);
    if (geodesic_cost < spectral_cost) return geodesic;
  } catch (const std::exception&) {
    // disconnected observation graph; the spectral start stands alone
  }
  return spectral;
}

}  // namespace

SolveResult solve(const observation::ObservedMatrix& observed, int dim,
                  Variant variant, const SolverOptions& opts, int eta) {
  const Eigen::Index n = observed.size();
  if (eta == 0) eta = dim + 2;
  if (n < dim + 2) throw std::invalid_argument("need at least dim+2 points");
  if (observed.mask.known_count() == 0)
    throw std::invalid_argument("observed matrix has no known entries");

  std::vector<Eigen::Index> empty_rows;
  for (Eigen::Index i = 0; i < n; ++i) {
    bool any = false;
    for (Eigen::Index j = 0; j < n && !any; ++j) any = (i != j && observed.known(i, j));
    if (!any) empty_rows.push_back(i);
  }
  if (!empty_rows.empty()) {
    std::ostringstream msg;
    msg << "insufficient observations: rows without any known entry:";
    for (const auto i : empty_rows) msg << ' ' << i;
    throw std::runtime_error(msg.str());
  }

  const observation::ObservedMatrix trimmed = trim(observed, mix_seed(opts.seed, 0x7261));
  const KnownEntries known = KnownEntries::from(trimmed);

  FactoredEstimate f = best_initialization(trimmed, known, dim, eta);
  SolveResult result;
  result.eta = eta;
  result.status = RefineStatus::kMaxIterations;

  Matrix u = f.u, s = f.s, v = f.v;
  double prev_cost = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    const StepOutcome step = gradient_step(known, u, s, v, opts);
    bool stop = false;
    if (step.stationary) {
      result.status = RefineStatus::kConverged;
      stop = true;
    } else if (!step.moved) {
      result.status = RefineStatus::kLineSearchStalled;
      stop = true;
    }

    double cost = step.cost;
    if (variant == Variant::kMC2) {
      // accept the Cadzow projection only when it does not hurt the data fit,
      // so the cost sequence keeps descending
      const FactoredEstimate projected = refactor(cadzow_project(u * s * v.transpose()), eta);
      const double projected_cost = fit_cost(known, projected.u, projected.s, projected.v);
      if (projected_cost <= cost) {
        u = projected.u;
        s = projected.s;
        v = projected.v;
        cost = projected_cost;
      }
    }

    result.history.push_back(
        {iter, cost, known_entry_rmse(u * s * v.transpose(), trimmed)});

    if (!stop && std::isfinite(prev_cost) &&
        std::abs(prev_cost - cost) <= opts.rel_tolerance * std::max(prev_cost, 1e-30)) {
      result.status = RefineStatus::kConverged;
      stop = true;
    }
    prev_cost = cost;
    if (stop) break;
  }

  Matrix completed = u * s * v.transpose();
  // classical MDS needs a symmetric hollow input
  completed = 0.5 * (completed + completed.transpose());
  completed.diagonal().setZero();

  if (variant == Variant::kEMC2) {
    const Matrix start = baselines::mds_localize(cadzow_project(completed), dim).positions;
    result.positions = fit_positions_to_observed(trimmed, start, opts);
    result.completed = edm_from_positions(result.positions);
    result.history.push_back(
        {static_cast<int>(result.history.size()),
         fit_cost_matrix(known, result.completed),
         known_entry_rmse(result.completed, trimmed)});
  } else {
    if (variant == Variant::kMC2) completed = cadzow_project(completed);
    result.completed = completed;
    result.positions = baselines::mds_localize(result.completed, dim).positions;
  }
  return result;
}

}  // namespace edmcal::completion
