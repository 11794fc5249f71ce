#include "cblab/harness.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace cblab;
using cblab::test::rel_diff;

TEST_CASE("fit_exponent: exact power law") {
  std::vector<std::pair<double, double>> pts = {{1, 1}, {2, 4}, {4, 16}};
  ExponentFit f = fit_exponent(pts);
  CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.ci_half_width <= 1e-10);
}

TEST_CASE("fit_exponent: constant data has slope zero") {
  std::vector<std::pair<double, double>> pts = {{1, 3}, {2, 3}, {4, 3}, {8, 3}};
  ExponentFit f = fit_exponent(pts);
  CHECK(std::abs(f.slope) <= 1e-14);
}

TEST_CASE("fit_exponent rejects bad input") {
  std::vector<std::pair<double, double>> two = {{1, 1}, {2, 2}};
  CHECK_THROWS_AS(fit_exponent(two), std::invalid_argument);
  std::vector<std::pair<double, double>> neg = {{1, 1}, {2, -2}, {3, 3}};
  CHECK_THROWS_AS(fit_exponent(neg), std::invalid_argument);
  std::vector<std::pair<double, double>> same_x = {{2, 1}, {2, 2}, {2, 3}};
  CHECK_THROWS_AS(fit_exponent(same_x), std::invalid_argument);
}

TEST_CASE("fit_exponent recovers a noisy 1/3 slope") {
  // Synthetic data generated with a pinned seed; the generator is the oracle.
  Rng rng(2024);
  std::vector<std::pair<double, double>> pts;
  for (double x : {1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0}) {
    const double y = std::cbrt(x) * std::exp(0.05 * rng.normal());
    pts.push_back({x, y});
  }
  ExponentFit f = fit_exponent(pts);
  CHECK(std::abs(f.slope - 1.0 / 3.0) <= 0.05);
  CHECK(f.r2 >= 0.99);
}

TEST_CASE("threshold_scan brackets a synthetic cutoff at 0.01") {
  auto classifier = [](double, double amp) { return amp <= 0.01; };
  auto result = threshold_scan({1e-2, 1e-3}, 1e-4, 1.0, classifier, 0.25);
  REQUIRE(result.brackets.size() == 2);
  for (const auto& b : result.brackets) {
    CHECK(b.reliable);
    CHECK(b.lo <= 0.01);
    CHECK(b.hi >= 0.01);
    CHECK(b.hi / b.lo - 1.0 <= 0.25 + 1e-12);
  }
}

TEST_CASE("threshold_scan flags brackets that do not straddle the cutoff") {
  auto always_stable = [](double, double) { return true; };
  auto result = threshold_scan({1e-2}, 1e-3, 1.0, always_stable, 0.25);
  REQUIRE(result.brackets.size() == 1);
  CHECK_FALSE(result.brackets[0].reliable);

  auto always_departed = [](double, double) { return false; };
  auto r2 = threshold_scan({1e-2}, 1e-3, 1.0, always_departed, 0.25);
  CHECK_FALSE(r2.brackets[0].reliable);
}

TEST_CASE("threshold_scan recovers a power-law critical amplitude") {
  // cutoff(nu) = nu^{1/2}: the fitted exponent must come out near 1/2.
  auto classifier = [](double nu, double amp) {
    return amp <= std::sqrt(nu);
  };
  auto result = threshold_scan({1e-1, 1e-2, 1e-3, 1e-4}, 1e-4, 1.0,
                               classifier, 0.1);
  REQUIRE(result.exponent.has_value());
  CHECK(std::abs(result.exponent->slope - 0.5) <= 0.05);
}

TEST_CASE("threshold CSV is deterministic") {
  auto classifier = [](double, double amp) { return amp <= 0.05; };
  auto a = threshold_scan({1e-2, 1e-3, 1e-4}, 1e-3, 1.0, classifier, 0.25);
  auto b = threshold_scan({1e-2, 1e-3, 1e-4}, 1e-3, 1.0, classifier, 0.25);
  std::ostringstream sa, sb;
  write_threshold_csv(sa, a);
  write_threshold_csv(sb, b);
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().find("exponent") != std::string::npos);
}

TEST_CASE("RandomSmoothForcing: deterministic, smooth, and cut off in time") {
  ChebGrid g = build_grid(32);
  auto f1 = RandomSmoothForcing::make(6, 2.0, 1.5, 99);
  auto f2 = RandomSmoothForcing::make(6, 2.0, 1.5, 99);
  CHECK(cblab::test::max_abs_diff(f1.eval(g, 0.7), f2.eval(g, 0.7)) == 0.0);
  CHECK(f1.eval(g, 2.0).cwiseAbs().maxCoeff() == 0.0);  // past the cutoff
  // vanishes at the walls (sine profile)
  Vec v = f1.eval(g, 0.3);
  CHECK(std::abs(v[0]) <= 1e-12);
  CHECK(std::abs(v[g.n - 1]) <= 1e-12);
}

TEST_CASE("RandomSmoothField evaluates the same coefficients on finer grids") {
  auto f = RandomSmoothField::make(8, 123);
  ChebGrid g1 = build_grid(32);
  ChebGrid g2 = build_grid(64);
  // value at a shared node (y = 0 is a node of both even-n grids? use y = 1)
  Vec a = f.eval(g1);
  Vec b = f.eval(g2);
  CHECK(std::abs(a[0] - b[0]) <= 1e-14);          // y = 1
  CHECK(std::abs(a[g1.n - 1] - b[g2.n - 1]) <= 1e-14);  // y = -1
}
