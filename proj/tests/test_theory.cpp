#include <doctest.h>

#include <cmath>

#include "edmcal/geometry.hpp"
#include "edmcal/rng.hpp"
#include "edmcal/theory.hpp"

using edmcal::Matrix;
using edmcal::Rng;
namespace geometry = edmcal::geometry;
namespace theory = edmcal::theory;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Monte Carlo estimate of the worst-case missing probability: one point
// pinned to the disc edge, the other uniform.
double q_max_monte_carlo(double a, double d_max, long samples, std::uint64_t seed) {
  Rng rng(seed);
  long hits = 0;
  for (long s = 0; s < samples; ++s) {
    const double radius = a * std::sqrt(rng.uniform());
    const double angle = rng.uniform(0.0, 2.0 * kPi);
    const double dx = radius * std::cos(angle) - a;
    const double dy = radius * std::sin(angle);
    if (std::sqrt(dx * dx + dy * dy) >= d_max) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

}  // namespace

TEST_SUITE("theory") {

TEST_CASE("q bounds at the endpoints") {
  const auto at_diameter = theory::q_bounds(1.0, 2.0);
  CHECK(std::abs(at_diameter.q_max) < 1e-12);
  CHECK(at_diameter.q_min == 0.0);

  const auto tiny = theory::q_bounds(1.0, 1e-9);
  CHECK(tiny.q_max == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(tiny.q_min == doctest::Approx(1.0).epsilon(1e-8));

  const auto clamped = theory::q_bounds(1.0, 2.5);
  CHECK(clamped.clamped);
  CHECK(clamped.q_min == 0.0);
  CHECK(clamped.q_max == 0.0);
}

TEST_CASE("q_max closed form at a=1, d_max=1") {
  const auto bounds = theory::q_bounds(1.0, 1.0);
  CHECK(bounds.q_min == 0.0);
  CHECK(bounds.q_max == doctest::Approx(0.60901).epsilon(1e-4));
  // Monte Carlo cross-check, 3-sigma binomial slack at 1e6 samples
  const double estimate = q_max_monte_carlo(1.0, 1.0, 1000000, 42);
  const double slack = 3.0 * std::sqrt(0.61 * 0.39 / 1e6);
  CHECK(std::abs(estimate - bounds.q_max) < slack + 1e-6);
}

TEST_CASE("empirical missing fraction sits between the bounds") {
  const double a = 1.0;
  for (const double d_max : {0.6, 1.0, 1.4}) {
    const auto bounds = theory::q_bounds(a, d_max);
    Rng rng(7);
    long hits = 0;
    const long samples = 1000000;
    for (long s = 0; s < samples; ++s) {
      const double r1 = a * std::sqrt(rng.uniform());
      const double t1 = rng.uniform(0.0, 2.0 * kPi);
      const double r2 = a * std::sqrt(rng.uniform());
      const double t2 = rng.uniform(0.0, 2.0 * kPi);
      const double dx = r1 * std::cos(t1) - r2 * std::cos(t2);
      const double dy = r1 * std::sin(t1) - r2 * std::sin(t2);
      if (std::sqrt(dx * dx + dy * dy) >= d_max) ++hits;
    }
    const double fraction = static_cast<double>(hits) / samples;
    const double slack = 3.0 * std::sqrt(0.25 / samples);
    CAPTURE(d_max);
    CHECK(fraction >= bounds.q_min - slack);
    CHECK(fraction <= bounds.q_max + slack);
  }
}

TEST_CASE("incoherence is stable on regular polygons") {
  double previous_mu1 = -1.0;
  for (const int n : {16, 32, 64}) {
    Matrix x(n, 2);
    for (int k = 0; k < n; ++k) {
      x(k, 0) = std::cos(2.0 * kPi * k / n);
      x(k, 1) = std::sin(2.0 * kPi * k / n);
    }
    // polygon vertices make a rank-3 squared-distance matrix
    const auto inc = theory::incoherence(geometry::build_squared_distances(x), 3);
    CHECK_FALSE(inc.degenerate);
    CHECK(inc.kappa >= 1.0);
    if (previous_mu1 > 0.0) {
      CHECK(inc.mu1 / previous_mu1 < 1.5);
      CHECK(previous_mu1 / inc.mu1 < 1.5);
    }
    previous_mu1 = inc.mu1;
  }
}

TEST_CASE("incoherence flags duplicated points") {
  // three distinct locations only -> the squared-distance matrix loses rank
  Matrix base = theory::sample_disc_positions(3, 1.0, 3);
  Matrix x(8, 2);
  for (int i = 0; i < 8; ++i) x.row(i) = base.row(i % 3);
  const auto inc = theory::incoherence(geometry::build_squared_distances(x), 4);
  CHECK(inc.degenerate);
  CHECK(std::isinf(inc.kappa));
}

TEST_CASE("condition number is at least one") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix x = theory::sample_disc_positions(15, 2.0, seed);
    const auto inc = theory::incoherence(geometry::build_squared_distances(x), 4);
    CHECK(inc.kappa >= 1.0);
  }
}

TEST_CASE("bound terms scale as stated") {
  const auto base = theory::theorem1_rhs(9.5, 45, 0.95, 0.0167, 7.5);
  const auto quadrupled = theory::theorem1_rhs(9.5, 180, 0.95, 0.0167, 7.5);
  CHECK(quadrupled.term2 == doctest::Approx(base.term2 / 2.0).epsilon(1e-12));

  const auto doubled_noise = theory::theorem1_rhs(9.5, 45, 0.95, 0.0334, 7.5);
  CHECK(doubled_noise.term2 == doctest::Approx(2.0 * base.term2).epsilon(1e-12));
  CHECK(doubled_noise.term1 == base.term1);

  // plug-in evaluation of the published scenario
  CHECK(base.term1 ==
        doctest::Approx(9.5 * 9.5 * std::log2(45.0) / (0.95 * 45.0)).epsilon(1e-12));
  CHECK(base.term2 ==
        doctest::Approx(0.0167 * 7.5 * 7.5 / std::sqrt(0.95 * 45.0)).epsilon(1e-12));
}

TEST_CASE("disc distance law matches its known mean and Monte Carlo") {
  // mean pair distance on the unit disc is 128 / (45 pi)
  double mean = 0.0;
  const int steps = 4000;
  double previous = 1.0;  // exceed probability at t = 0
  for (int k = 1; k <= steps; ++k) {
    const double t = 2.0 * k / steps;
    const double current = theory::disc_exceed_probability(1.0, t);
    mean += (previous - current) * (t - 1.0 / steps);
    previous = current;
  }
  CHECK(mean == doctest::Approx(128.0 / (45.0 * kPi)).epsilon(1e-3));

  Rng rng(11);
  long hits = 0;
  const long samples = 400000;
  for (long s = 0; s < samples; ++s) {
    const double r1 = std::sqrt(rng.uniform());
    const double t1 = rng.uniform(0.0, 2.0 * kPi);
    const double r2 = std::sqrt(rng.uniform());
    const double t2 = rng.uniform(0.0, 2.0 * kPi);
    const double dx = r1 * std::cos(t1) - r2 * std::cos(t2);
    const double dy = r1 * std::sin(t1) - r2 * std::sin(t2);
    if (std::hypot(dx, dy) >= 0.9) ++hits;
  }
  const double mc = static_cast<double>(hits) / samples;
  CHECK(theory::disc_exceed_probability(1.0, 0.9) == doctest::Approx(mc).epsilon(0.01));
}

TEST_CASE("cutoff quantile inverts the exceed probability") {
  for (const double q : {0.1, 0.35, 0.6}) {
    const double d_max = theory::dmax_for_exceed_probability(2.0, q);
    CHECK(theory::disc_exceed_probability(2.0, d_max) == doctest::Approx(q).epsilon(1e-6));
  }
}

TEST_CASE("noiseless trials have exactly zero noise norm") {
  theory::BoundScenario scenario;
  scenario.n_values = {20};
  scenario.varsigma = 0.0;
  scenario.trials = 3;
  scenario.scale_dmax = false;
  scenario.d_max = 5.0;
  const auto reports = theory::verify_bounds(scenario);
  REQUIRE(reports.size() == 3);
  for (const auto& report : reports) CHECK(report.norm_noise == 0.0);
}

TEST_CASE("cutoff at the diameter removes the structured part") {
  theory::BoundScenario scenario;
  scenario.n_values = {25};
  scenario.trials = 3;
  scenario.scale_dmax = false;
  scenario.d_max = 2.0 * scenario.a;
  const auto reports = theory::verify_bounds(scenario);
  for (const auto& report : reports) CHECK(report.norm_structured == 0.0);
}

TEST_CASE("spectral norms stay within the scaling envelopes on a short sweep") {
  theory::BoundScenario scenario;
  scenario.n_values = {30, 60};
  scenario.trials = 4;
  scenario.seed = 3;
  const auto reports = theory::verify_bounds(scenario);
  double ratio_lo = std::numeric_limits<double>::infinity();
  double ratio_hi = 0.0;
  for (const int n : scenario.n_values) {
    double worst = 0.0;
    for (const auto& report : reports)
      if (report.n == n)
        worst = std::max(worst, report.norm_structured /
                                    (scenario.a * scenario.a * std::log2(n)));
    ratio_lo = std::min(ratio_lo, worst);
    ratio_hi = std::max(ratio_hi, worst);
  }
  CHECK(ratio_hi / ratio_lo < 3.0);
}

}  // TEST_SUITE
