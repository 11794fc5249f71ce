#include "cblab/chebyshev.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace cblab;
using cblab::test::rel_diff;
using cblab::test::simpson;

TEST_CASE("node formula: n=3 gives {1, 0, -1}") {
  RVec y = chebyshev_nodes(3);
  CHECK(y[0] == 1.0);
  CHECK(y[1] == 0.0);
  CHECK(y[2] == -1.0);
}

TEST_CASE("build_grid rejects coarse grids") {
  CHECK_THROWS_AS(build_grid(7), std::invalid_argument);
  CHECK_NOTHROW(build_grid(8));
}

TEST_CASE("grid invariants: endpoints, ordering, weight sum") {
  for (int n : {8, 33, 64}) {
    ChebGrid g = build_grid(n);
    CHECK(g.nodes[0] == 1.0);
    CHECK(g.nodes[n - 1] == -1.0);
    for (int j = 0; j + 1 < n; ++j) CHECK(g.nodes[j] > g.nodes[j + 1]);
    CHECK(std::abs(g.weights.sum() - 2.0) <= 1e-12);
    for (int j = 0; j < n; ++j) CHECK(g.weights[j] > 0.0);
  }
}

TEST_CASE("d1 differentiates y^2 exactly") {
  ChebGrid g = build_grid(16);
  Eigen::VectorXd f(g.n), expected(g.n);
  for (int j = 0; j < g.n; ++j) {
    f[j] = g.nodes[j] * g.nodes[j];
    expected[j] = 2.0 * g.nodes[j];
  }
  CHECK(((g.d1 * f) - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("d1 reproduces derivatives of polynomials up to degree n-1") {
  ChebGrid g = build_grid(12);
  // p(y) = y^11 - 3 y^5 + 2 y; p'(y) = 11 y^10 - 15 y^4 + 2
  Eigen::VectorXd p(g.n), dp(g.n);
  for (int j = 0; j < g.n; ++j) {
    const double y = g.nodes[j];
    p[j] = std::pow(y, 11) - 3.0 * std::pow(y, 5) + 2.0 * y;
    dp[j] = 11.0 * std::pow(y, 10) - 15.0 * std::pow(y, 4) + 2.0;
  }
  const double err = ((g.d1 * p) - dp).cwiseAbs().maxCoeff();
  CHECK(err <= 1e-10 * dp.cwiseAbs().maxCoeff());
}

TEST_CASE("spectral accuracy of d1 on sin(pi y)") {
  auto err_at = [](int n) {
    ChebGrid g = build_grid(n);
    Eigen::VectorXd f(n), expected(n);
    for (int j = 0; j < n; ++j) {
      f[j] = std::sin(M_PI * g.nodes[j]);
      expected[j] = M_PI * std::cos(M_PI * g.nodes[j]);
    }
    return ((g.d1 * f) - expected).cwiseAbs().maxCoeff();
  };
  const double e32 = err_at(32);
  const double e64 = err_at(64);
  CHECK(e32 <= 1e-8);
  // By n = 64 the truncation error is below the rounding plateau.
  CHECK(e64 <= std::max(e32, 1e-10));
}

TEST_CASE("quadrature integrates smooth functions spectrally") {
  ChebGrid g = build_grid(24);
  double acc = 0.0;
  for (int j = 0; j < g.n; ++j) acc += g.weights[j] * std::exp(g.nodes[j]);
  CHECK(rel_diff(acc, std::exp(1.0) - std::exp(-1.0)) <= 1e-13);
}

TEST_CASE("weighted_l2_norm examples") {
  ChebGrid g = build_grid(32);
  ModeField ones{0, Vec::Constant(g.n, 1.0)};
  CHECK(std::abs(weighted_l2_norm(g, ones) - std::sqrt(2.0)) <= 1e-12);
  ModeField lin{0, Vec(g.n)};
  for (int j = 0; j < g.n; ++j) lin.values[j] = g.nodes[j];
  CHECK(std::abs(weighted_l2_norm(g, lin) - std::sqrt(2.0 / 3.0)) <= 1e-10);
}

TEST_CASE("weighted_l2_norm with the kinked channel weight") {
  // int (1 - |y|) dy = 1; the kink at y = 0 limits the quadrature to
  // algebraic convergence, so check the value loosely and the improvement
  // under refinement.
  auto err_at = [](int n) {
    ChebGrid g = build_grid(n);
    ModeField ones{0, Vec::Constant(g.n, 1.0)};
    const double v = weighted_l2_norm(
        g, ones, [](double y) { return 1.0 - std::abs(y); });
    return std::abs(v - 1.0);
  };
  const double e32 = err_at(32);
  const double e128 = err_at(128);
  CHECK(e32 <= 1e-3);
  CHECK(e128 <= e32 / 8.0);
}

TEST_CASE("weighted_l2_norm properties: homogeneity and triangle inequality") {
  ChebGrid g = build_grid(24);
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    Vec a = cblab::test::random_complex_field(g, rng);
    Vec b = cblab::test::random_complex_field(g, rng);
    const double na = weighted_l2_norm(g, {1, a});
    const double nb = weighted_l2_norm(g, {1, b});
    const double nab = weighted_l2_norm(g, {1, a + b});
    CHECK(nab <= na + nb + 1e-12);
    const double c = 0.1 + 3.0 * rng.uniform();
    CHECK(rel_diff(weighted_l2_norm(g, {1, c * a}), c * na) <= 1e-12);
  }
}

TEST_CASE("solve_helmholtz: k=0 Poisson with parabolic solution") {
  ChebGrid g = build_grid(32);
  ModeField rhs{0, Vec::Constant(g.n, -1.0)};
  ModeField u = solve_helmholtz(g, 0, rhs);
  double err = 0.0;
  for (int j = 0; j < g.n; ++j) {
    const double exact = 0.5 * (1.0 - g.nodes[j] * g.nodes[j]);
    err = std::max(err, std::abs(u.values[j] - exact));
  }
  CHECK(err <= 1e-10);
}

TEST_CASE("solve_helmholtz: k=2 with cosh solution") {
  ChebGrid g = build_grid(64);
  ModeField rhs{2, Vec::Constant(g.n, -4.0)};
  ModeField u = solve_helmholtz(g, 2, rhs);
  double err = 0.0;
  for (int j = 0; j < g.n; ++j) {
    const double exact = 1.0 - std::cosh(2.0 * g.nodes[j]) / std::cosh(2.0);
    err = std::max(err, std::abs(u.values[j] - exact));
  }
  CHECK(err <= 1e-9);
}

TEST_CASE("solve_helmholtz: zero rhs, zero bc gives zero") {
  ChebGrid g = build_grid(16);
  ModeField u = solve_helmholtz(g, 3, ModeField{3, Vec::Zero(g.n)});
  CHECK(u.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("solve_helmholtz round trip reproduces the rhs at interior nodes") {
  ChebGrid g = build_grid(48);
  Rng rng(7);
  for (int k : {0, 1, 4}) {
    Vec f = cblab::test::random_complex_field(g, rng);
    ModeField u = solve_helmholtz(g, k, {k, f}, Complex(0.3, -0.1), 0.2);
    Vec back = g.d2.cast<Complex>() * u.values -
               double(k) * double(k) * u.values;
    double err = 0.0, scale = 0.0;
    for (int j = 1; j < g.n - 1; ++j) {
      err = std::max(err, std::abs(back[j] - f[j]));
      scale = std::max(scale, std::abs(f[j]));
    }
    CHECK(err <= 1e-8 * scale);
    CHECK(std::abs(u.values[0] - Complex(0.3, -0.1)) <= 1e-12);
    CHECK(std::abs(u.values[g.n - 1] - 0.2) <= 1e-12);
  }
}

TEST_CASE("hminus1_norm: zero field") {
  ChebGrid g = build_grid(16);
  CHECK(hminus1_norm(g, ModeField{0, Vec::Zero(g.n)}) == 0.0);
}

TEST_CASE("hminus1_norm of a constant matches the quadrature oracle") {
  // For f = 1 the Riesz representative is w = 1 - cosh(y)/cosh(1).
  auto w = [](double y) { return 1.0 - std::cosh(y) / std::cosh(1.0); };
  auto dw = [](double y) { return -std::sinh(y) / std::cosh(1.0); };
  const double oracle = std::sqrt(simpson(
      [&](double y) { return w(y) * w(y) + dw(y) * dw(y); }, 20000));
  // Closed form of the same integral.
  CHECK(rel_diff(oracle, std::sqrt(2.0 - 2.0 * std::tanh(1.0))) <= 1e-12);

  ChebGrid g = build_grid(64);
  const double got = hminus1_norm(g, ModeField{0, Vec::Constant(g.n, 1.0)});
  CHECK(rel_diff(got, oracle) <= 1e-10);
}

TEST_CASE("hminus1_norm scales linearly") {
  ChebGrid g = build_grid(32);
  Rng rng(3);
  Vec f = cblab::test::random_complex_field(g, rng);
  const double base = hminus1_norm(g, {0, f});
  CHECK(rel_diff(hminus1_norm(g, {0, 7.5 * f}), 7.5 * base) <= 1e-12);
}

TEST_CASE("hminus1_norm bounded by the L2 norm uniformly in n") {
  // ||f||_{H^-1} <= C ||f||_{L2} with a single C across resical refinement.
  for (int n : {32, 64, 128}) {
    ChebGrid g = build_grid(n);
    Rng rng(11);
    Hminus1Solver solver(g);
    for (int trial = 0; trial < 10; ++trial) {
      Vec f = cblab::test::random_complex_field(g, rng);
      const double ratio = solver.norm(f) / l2_norm(g, f);
      CHECK(ratio <= 1.05);
    }
  }
}

TEST_CASE("integrate_from_lower matches polynomial antiderivatives") {
  ChebGrid g = build_grid(20);
  Vec f(g.n);
  for (int j = 0; j < g.n; ++j) {
    const double y = g.nodes[j];
    f[j] = 3.0 * y * y - 2.0 * y + 0.5;
  }
  Vec F = integrate_from_lower(g, f);
  double err = 0.0;
  for (int j = 0; j < g.n; ++j) {
    const double y = g.nodes[j];
    const double exact = (y * y * y + 1.0) - (y * y - 1.0) + 0.5 * (y + 1.0);
    err = std::max(err, std::abs(F[j] - exact));
  }
  CHECK(err <= 1e-12);
}
