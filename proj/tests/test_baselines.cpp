#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "edmcal/baselines.hpp"
#include "edmcal/geometry.hpp"
#include "edmcal/observation.hpp"
#include "edmcal/rng.hpp"
#include "edmcal/theory.hpp"

using edmcal::BoolMatrix;
using edmcal::Matrix;
using edmcal::Rng;
namespace baselines = edmcal::baselines;
namespace geometry = edmcal::geometry;
namespace observation = edmcal::observation;

namespace {

observation::ObservedMatrix observe_all(const Matrix& values) {
  return observation::observe(values, observation::full_mask(values.rows()));
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("classical MDS recovers the unit square") {
  Matrix x(4, 2);
  x << 0, 0, 1, 0, 1, 1, 0, 1;
  const auto result = baselines::mds_localize(geometry::build_squared_distances(x), 2);
  CHECK_FALSE(result.degenerate);
  CHECK(geometry::calibration_error(x, result.positions) < 1e-9);
}

TEST_CASE("collinear points embed with a zero second coordinate") {
  Matrix x(5, 2);
  x << 0, 0, 1, 0, 2, 0, 3, 0, 4, 0;
  const auto result = baselines::mds_localize(geometry::build_squared_distances(x), 2);
  CHECK(result.degenerate);  // only one positive eigenvalue
  CHECK(result.positions.col(1).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("classical MDS is the best rank-dim Gram fit") {
  // noisy matrix: compare against the eigendecomposition oracle
  const Matrix x = edmcal::theory::sample_disc_positions(12, 2.0, 5);
  Matrix m = geometry::build_squared_distances(x);
  Rng rng(9);
  for (int i = 0; i < 12; ++i)
    for (int j = i + 1; j < 12; ++j) {
      const double noise = 0.05 * rng.normal();
      m(i, j) += noise;
      m(j, i) += noise;
    }
  const auto result = baselines::mds_localize(m, 2);
  const Matrix gram = geometry::double_center(m);
  const Matrix fitted = result.positions * result.positions.transpose();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  Matrix best = Matrix::Zero(12, 12);
  for (int k = 0; k < 2; ++k) {
    const double lambda = std::max(eig.eigenvalues()(11 - k), 0.0);
    best += lambda * eig.eigenvectors().col(11 - k) * eig.eigenvectors().col(11 - k).transpose();
  }
  CHECK((fitted - best).norm() < 1e-9);
}

TEST_CASE("classical MDS commutes with relabeling") {
  const Matrix x = edmcal::theory::sample_disc_positions(9, 1.5, 13);
  const Matrix m = geometry::build_squared_distances(x);
  std::vector<int> perm = {3, 1, 4, 0, 8, 6, 7, 2, 5};
  Matrix m_perm(9, 9);
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) m_perm(i, j) = m(perm[i], perm[j]);

  const Matrix direct = baselines::mds_localize(m_perm, 2).positions;
  const Matrix recovered = baselines::mds_localize(m, 2).positions;
  Matrix recovered_perm(9, 2);
  for (int i = 0; i < 9; ++i) recovered_perm.row(i) = recovered.row(perm[i]);
  CHECK(geometry::calibration_error(direct, recovered_perm) < 1e-9);
}

TEST_CASE("shortest path fills a chain") {
  observation::ObservedMatrix observed;
  observed.values = Matrix::Zero(3, 3);
  observed.mask.known = BoolMatrix::Constant(3, 3, false);
  observed.values(0, 1) = observed.values(1, 0) = 1.0;
  observed.values(1, 2) = observed.values(2, 1) = 1.0;
  observed.mask.known(0, 1) = observed.mask.known(1, 0) = true;
  observed.mask.known(1, 2) = observed.mask.known(2, 1) = true;
  const Matrix completed = baselines::shortest_path_complete(observed);
  CHECK(completed(0, 2) == doctest::Approx(2.0));
  CHECK(completed(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("shortest path keeps complete inputs and dominates the metric") {
  const Matrix x = edmcal::theory::sample_disc_positions(10, 2.0, 3);
  const Matrix d = geometry::build_squared_distances(x).cwiseSqrt();
  const auto complete = observe_all(d);
  CHECK((baselines::shortest_path_complete(complete) - d).cwiseAbs().maxCoeff() == 0.0);

  const auto mask = observation::make_mask(d, 2.0, 1.0, 0);
  const auto partial = observation::observe(d, mask);
  const Matrix completed = baselines::shortest_path_complete(partial);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      if (i != j && !partial.known(i, j)) CHECK(completed(i, j) >= d(i, j) - 1e-12);
  // metric closure: triangle inequality holds exactly on the completed pairs
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      for (int k = 0; k < 10; ++k)
        if (!partial.known(i, j) || i == j)
          CHECK(completed(i, j) <= completed(i, k) + completed(k, j) + 1e-12);
}

TEST_CASE("disconnected graphs are reported with their components") {
  observation::ObservedMatrix observed;
  observed.values = Matrix::Zero(4, 4);
  observed.mask.known = BoolMatrix::Constant(4, 4, false);
  observed.values(0, 1) = observed.values(1, 0) = 1.0;
  observed.mask.known(0, 1) = observed.mask.known(1, 0) = true;
  observed.values(2, 3) = observed.values(3, 2) = 1.0;
  observed.mask.known(2, 3) = observed.mask.known(3, 2) = true;
  try {
    baselines::shortest_path_complete(observed);
    FAIL("expected DisconnectedGraphError");
  } catch (const baselines::DisconnectedGraphError& error) {
    REQUIRE(error.components.size() == 2);
    CHECK(error.components[0] == std::vector<Eigen::Index>{0, 1});
    CHECK(error.components[1] == std::vector<Eigen::Index>{2, 3});
  }
}

TEST_CASE("s-stress at the truth on complete data is a global minimum") {
  const Matrix x = edmcal::theory::sample_disc_positions(8, 1.5, 19);
  const Matrix d = geometry::build_squared_distances(x).cwiseSqrt();
  const auto observed = observe_all(d);
  CHECK(baselines::sstress_cost(x, observed, 0) < 1e-20);
  baselines::SStressOptions opts;
  opts.restarts = 1;  // warm start lands on the complete-data optimum
  const auto result = baselines::sstress_solve(observed, 2, opts);
  CHECK(result.cost < 1e-10);
  CHECK(geometry::calibration_error(x, result.positions) < 1e-4);
}

TEST_CASE("s-stress analytic gradient matches finite differences") {
  Rng rng(23);
  for (int instance = 0; instance < 5; ++instance) {
    const Matrix truth = edmcal::theory::sample_disc_positions(7, 1.0, 40 + instance);
    const Matrix d = geometry::build_squared_distances(truth).cwiseSqrt();
    const auto mask = observation::make_mask(d, 1.5, 0.8, instance);
    const auto observed = observation::observe(d, mask);
    Matrix x(7, 2);
    for (int i = 0; i < 7; ++i)
      for (int c = 0; c < 2; ++c) x(i, c) = rng.uniform(-1.0, 1.0);

    const int alpha = instance % 2 == 0 ? 0 : -2;
    const Matrix analytic = baselines::sstress_gradient(x, observed, alpha);
    Matrix numeric(7, 2);
    const double h = 1e-6;
    for (int i = 0; i < 7; ++i) {
      for (int c = 0; c < 2; ++c) {
        Matrix hi = x, lo = x;
        hi(i, c) += h;
        lo(i, c) -= h;
        numeric(i, c) = (baselines::sstress_cost(hi, observed, alpha) -
                         baselines::sstress_cost(lo, observed, alpha)) /
                        (2.0 * h);
      }
    }
    CHECK((analytic - numeric).norm() / std::max(numeric.norm(), 1e-12) < 1e-5);
  }
}

TEST_CASE("s-stress never returns worse than its warm start") {
  const Matrix truth = edmcal::theory::sample_disc_positions(12, 2.0, 55);
  const Matrix d = geometry::build_squared_distances(truth).cwiseSqrt();
  observation::NoiseModel noise;
  noise.varsigma = 0.05;
  noise.seed = 7;
  const Matrix noisy = observation::add_noise(d, noise);
  const auto mask = observation::make_mask(d, 3.0, 0.9, 2);
  const auto observed = observation::observe(noisy, mask);

  baselines::SStressOptions opts;
  opts.restarts = 3;
  opts.seed = 11;
  const auto result = baselines::sstress_solve(observed, 2, opts);
  const double warm_cost =
      baselines::sstress_cost(baselines::mds_map(observed, 2), observed, 0);
  CHECK(result.cost <= warm_cost * (1.0 + 1e-12));
}

TEST_CASE("mds-map equals classical MDS on complete data") {
  const Matrix x = edmcal::theory::sample_disc_positions(9, 1.0, 61);
  const Matrix m = geometry::build_squared_distances(x);
  const auto observed_d = observe_all(m.cwiseSqrt());
  const Matrix via_map = baselines::mds_map(observed_d, 2);
  const Matrix direct = baselines::mds_localize(m, 2).positions;
  CHECK(geometry::calibration_error(via_map, direct) < 1e-10);
}

TEST_CASE("mds-map recovers a collinear chain exactly") {
  Matrix x(4, 2);
  x << 0, 0, 1, 0, 2, 0, 3, 0;
  const Matrix d = geometry::build_squared_distances(x).cwiseSqrt();
  observation::ObservedMatrix observed;
  observed.values = Matrix::Zero(4, 4);
  observed.mask.known = BoolMatrix::Constant(4, 4, false);
  for (int i = 0; i + 1 < 4; ++i) {
    observed.values(i, i + 1) = observed.values(i + 1, i) = d(i, i + 1);
    observed.mask.known(i, i + 1) = observed.mask.known(i + 1, i) = true;
  }
  const Matrix estimate = baselines::mds_map(observed, 2);
  CHECK(geometry::calibration_error(x, estimate) < 1e-9);
}

}  // TEST_SUITE
