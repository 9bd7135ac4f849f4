#include <doctest.h>

#include <cmath>

#include "edmcal/geometry.hpp"
#include "edmcal/observation.hpp"
#include "edmcal/rng.hpp"
#include "edmcal/theory.hpp"

using edmcal::Matrix;
namespace geometry = edmcal::geometry;
namespace observation = edmcal::observation;

TEST_SUITE("observation") {

TEST_CASE("zero noise is the identity") {
  Matrix x(4, 2);
  x << 0, 0, 1, 0, 0, 1, 1, 1;
  const Matrix d = geometry::build_squared_distances(x).cwiseSqrt();
  observation::NoiseModel model;
  model.seed = 3;
  const Matrix noisy = observation::add_noise(d, model);
  CHECK((noisy - d).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("multiplicative noise sample statistics") {
  // pool ~1e5 relative deviations and check the sample std against varsigma
  const int n = 450;
  const Matrix x = edmcal::theory::sample_disc_positions(n, 5.0, 17);
  const Matrix d = geometry::build_squared_distances(x).cwiseSqrt();
  observation::NoiseModel model;
  model.varsigma = 0.0167;
  model.seed = 99;
  const Matrix noisy = observation::add_noise(d, model);
  double sum = 0.0, sum_sq = 0.0;
  long count = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (d(i, j) < 1e-9) continue;
      const double rel = (noisy(i, j) - d(i, j)) / d(i, j);
      sum += rel;
      sum_sq += rel * rel;
      ++count;
    }
  }
  const double mean = sum / count;
  const double std_dev = std::sqrt(sum_sq / count - mean * mean);
  CHECK(count > 100000 / 2);
  CHECK(std_dev > 0.0160);
  CHECK(std_dev < 0.0174);
}

TEST_CASE("jitter stays inside its half width") {
  const int n = 40;
  const Matrix x = edmcal::theory::sample_disc_positions(n, 3.0, 5);
  const Matrix d = geometry::build_squared_distances(x).cwiseSqrt();
  observation::NoiseModel model;
  model.jitter_halfwidth = 0.01065;
  model.seed = 4;
  const Matrix noisy = observation::add_noise(d, model);
  CHECK((noisy - d).cwiseAbs().maxCoeff() <= 0.01065);
}

TEST_CASE("noisy output stays symmetric with a zero diagonal") {
  const Matrix x = edmcal::theory::sample_disc_positions(25, 2.0, 8);
  const Matrix d = geometry::build_squared_distances(x).cwiseSqrt();
  observation::NoiseModel model;
  model.varsigma = 0.3;
  model.jitter_halfwidth = 0.05;
  model.seed = 21;
  const Matrix noisy = observation::add_noise(d, model);
  CHECK((noisy - noisy.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(noisy.diagonal().cwiseAbs().maxCoeff() == 0.0);
  CHECK(noisy.minCoeff() >= 0.0);
}

TEST_CASE("bounded distribution stays within sqrt(3) sigma") {
  const Matrix x = edmcal::theory::sample_disc_positions(30, 2.0, 9);
  const Matrix d = geometry::build_squared_distances(x).cwiseSqrt();
  observation::NoiseModel model;
  model.varsigma = 0.1;
  model.distribution = observation::NoiseDistribution::kUniformBounded;
  model.seed = 10;
  const Matrix noisy = observation::add_noise(d, model);
  for (int i = 0; i < 30; ++i)
    for (int j = i + 1; j < 30; ++j)
      if (d(i, j) > 1e-9)
        CHECK(std::abs(noisy(i, j) / d(i, j) - 1.0) <= std::sqrt(3.0) * 0.1 + 1e-12);
}

TEST_CASE("structured cutoff removes far pairs") {
  Matrix x(3, 2);
  x << 0, 0, 0.5, 0, 2, 0;
  const Matrix d = geometry::build_squared_distances(x).cwiseSqrt();
  const auto mask = observation::make_mask(d, 1.0, 1.0, 0);
  CHECK(mask.known(0, 1));
  CHECK(mask.known(1, 0));
  CHECK_FALSE(mask.known(0, 2));
  CHECK_FALSE(mask.known(1, 2));
  CHECK(mask.known_count() == 2);
}

TEST_CASE("full retention keeps every off-diagonal pair") {
  const Matrix x = edmcal::theory::sample_disc_positions(12, 1.0, 2);
  const Matrix d = geometry::build_squared_distances(x).cwiseSqrt();
  const auto mask =
      observation::make_mask(d, std::numeric_limits<double>::infinity(), 1.0, 0);
  CHECK(mask.known_count() == 12 * 11);
}

TEST_CASE("disc scenario missing fraction matches the documented level") {
  // 19 m diameter disc, 7.5 m cutoff, 5% random erasure. The exact expected
  // missing fraction is 0.05 + 0.95 * P(d >= 7.5) = 0.603, independent of n;
  // the documented sweep tops out at the same 60% level.
  const double q = edmcal::theory::disc_exceed_probability(9.5, 7.5);
  const double expected = 0.05 + 0.95 * q;
  CHECK(expected == doctest::Approx(0.603).epsilon(5e-3));
  for (int n : {15, 45, 100, 200}) {
    double mean = 0.0;
    const int configs = 8;
    for (int c = 0; c < configs; ++c) {
      const Matrix x =
          edmcal::theory::sample_disc_positions(n, 9.5, 1000 + 31 * n + c);
      const Matrix d = geometry::build_squared_distances(x).cwiseSqrt();
      const auto mask = observation::make_mask(d, 7.5, 0.95, 77 + c);
      mean += observation::observe(d.cwiseProduct(d), mask).missing_fraction();
    }
    mean /= configs;
    CAPTURE(n);
    CHECK(mean == doctest::Approx(expected).epsilon(0.07));
  }
}

TEST_CASE("retention probability must be valid") {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 1) = d(1, 0) = 1.0;
  CHECK_THROWS_AS(observation::make_mask(d, 1.0, 0.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(observation::make_mask(d, 1.0, -0.2, 0), std::invalid_argument);
  CHECK_THROWS_AS(observation::make_mask(d, 0.0, 0.5, 0), std::invalid_argument);
}

TEST_CASE("observe copies entries on the mask only") {
  Matrix x(3, 2);
  x << 0, 0, 0.5, 0, 2, 0;
  const Matrix m = geometry::build_squared_distances(x);
  const Matrix d = m.cwiseSqrt();
  const auto mask = observation::make_mask(d, 1.0, 1.0, 0);
  const auto observed = observation::observe(m, mask);
  CHECK(observed.values(0, 1) == m(0, 1));
  CHECK(observed.values(1, 0) == m(1, 0));
  CHECK(observed.values(0, 2) == 0.0);
  CHECK(observed.mask.known_count() == 2);

  const auto full = observation::observe(m, observation::full_mask(3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) CHECK(full.values(i, j) == m(i, j));
}

TEST_CASE("seeded draws are reproducible") {
  const Matrix x = edmcal::theory::sample_disc_positions(20, 4.0, 3);
  const Matrix d = geometry::build_squared_distances(x).cwiseSqrt();
  observation::NoiseModel model;
  model.varsigma = 0.05;
  model.jitter_halfwidth = 0.01;
  model.seed = 1234;
  const Matrix a = observation::add_noise(d, model);
  const Matrix b = observation::add_noise(d, model);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);

  const auto mask_a = observation::make_mask(d, 3.0, 0.8, 99);
  const auto mask_b = observation::make_mask(d, 3.0, 0.8, 99);
  CHECK((mask_a.known.cast<int>() - mask_b.known.cast<int>()).cwiseAbs().maxCoeff() == 0);
}

TEST_CASE("observed matrices are symmetric on the mask") {
  const Matrix x = edmcal::theory::sample_disc_positions(20, 4.0, 31);
  const Matrix d = geometry::build_squared_distances(x).cwiseSqrt();
  observation::NoiseModel model;
  model.varsigma = 0.1;
  model.seed = 8;
  const Matrix noisy = observation::add_noise(d, model);
  const auto mask = observation::make_mask(d, 5.0, 0.7, 12);
  const auto observed = observation::observe(noisy.cwiseProduct(noisy), mask);
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      CHECK(observed.mask.known(i, j) == observed.mask.known(j, i));
      if (observed.known(i, j))
        CHECK(observed.values(i, j) == observed.values(j, i));
    }
  }
}

}  // TEST_SUITE
