#include "cblab/chebyshev.hpp"

#include <cmath>

namespace cblab {

RVec chebyshev_nodes(int n) {
  if (n < 2) throw std::invalid_argument("chebyshev_nodes: need n >= 2");
  const int N = n - 1;
  RVec y(n);
  for (int j = 0; j <= N; ++j) y[j] = std::cos(j * M_PI / N);
  // Pin the endpoints and enforce exact antisymmetry so that y[0] = 1 and
  // y[N] = -1 hold to the last bit.
  for (int j = 0; j <= N / 2; ++j) y[N - j] = -y[j];
  if (N % 2 == 0) y[N / 2] = 0.0;
  y[0] = 1.0;
  y[N] = -1.0;
  return y;
}

namespace {

// First differentiation matrix with the trigonometric form of the node
// differences and the negative-sum-trick diagonal.
RMat diff_matrix(int n) {
  const int N = n - 1;
  RMat d(n, n);
  auto c = [N](int i) { return (i == 0 || i == N) ? 2.0 : 1.0; };
  for (int i = 0; i <= N; ++i) {
    for (int j = 0; j <= N; ++j) {
      if (i == j) continue;
      // x_i - x_j = -2 sin((i+j)h/2) sin((i-j)h/2), h = pi/N
      const double sp = std::sin((i + j) * M_PI / (2.0 * N));
      const double sm = std::sin((i - j) * M_PI / (2.0 * N));
      const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      d(i, j) = -c(i) / c(j) * sign / (2.0 * sp * sm);
    }
  }
  for (int i = 0; i <= N; ++i) {
    double s = 0.0;
    for (int j = 0; j <= N; ++j)
      if (j != i) s += d(i, j);
    d(i, i) = -s;
  }
  return d;
}

// Clenshaw-Curtis weights on CGL nodes.
RVec clenshaw_curtis(int n) {
  const int N = n - 1;
  RVec w = RVec::Zero(n);
  if (N % 2 == 0) {
    w[0] = w[N] = 1.0 / (N * N - 1.0);
    for (int i = 1; i < N; ++i) {
      double v = 1.0;
      for (int m = 1; m <= N / 2 - 1; ++m)
        v -= 2.0 * std::cos(2.0 * m * i * M_PI / N) / (4.0 * m * m - 1.0);
      v -= std::cos(N * i * M_PI / N) / (N * N - 1.0);
      w[i] = 2.0 * v / N;
    }
  } else {
    w[0] = w[N] = 1.0 / (N * N);
    for (int i = 1; i < N; ++i) {
      double v = 1.0;
      for (int m = 1; m <= (N - 1) / 2; ++m)
        v -= 2.0 * std::cos(2.0 * m * i * M_PI / N) / (4.0 * m * m - 1.0);
      w[i] = 2.0 * v / N;
    }
  }
  return w;
}

}  // namespace

ChebGrid build_grid(int n) {
  if (n < 8) throw std::invalid_argument("build_grid: n must be >= 8");
  ChebGrid g;
  g.n = n;
  g.nodes = chebyshev_nodes(n);
  g.d1 = diff_matrix(n);
  g.d2 = g.d1 * g.d1;
  g.weights = clenshaw_curtis(n);
  return g;
}

Complex quad_dot(const ChebGrid& grid, const Vec& a, const Vec& b) {
  if (a.size() != grid.n || b.size() != grid.n)
    throw std::invalid_argument("quad_dot: field size does not match grid");
  Complex s = 0.0;
  for (int j = 0; j < grid.n; ++j)
    s += grid.weights[j] * std::conj(a[j]) * b[j];
  return s;
}

double weighted_l2_norm(const ChebGrid& grid, const ModeField& f,
                        const std::function<double(double)>& weight) {
  if (f.values.size() != grid.n)
    throw std::invalid_argument("weighted_l2_norm: field size mismatch");
  double s = 0.0;
  for (int j = 0; j < grid.n; ++j) {
    double w = 1.0;
    if (weight) {
      w = weight(grid.nodes[j]);
      if (w < 0.0)
        throw std::invalid_argument("weighted_l2_norm: negative weight");
    }
    s += grid.weights[j] * w * std::norm(f.values[j]);
  }
  return std::sqrt(s);
}

double l2_norm(const ChebGrid& grid, const Vec& v) {
  return weighted_l2_norm(grid, ModeField{0, v});
}

ModeField solve_helmholtz(const ChebGrid& grid, int k, const ModeField& rhs,
                          Complex bc_upper, Complex bc_lower) {
  if (rhs.values.size() != grid.n)
    throw std::invalid_argument("solve_helmholtz: rhs size mismatch");
  const int n = grid.n;
  RMat a = grid.d2 - double(k) * double(k) * RMat::Identity(n, n);
  a.row(0).setZero();
  a(0, 0) = 1.0;
  a.row(n - 1).setZero();
  a(n - 1, n - 1) = 1.0;
  Vec b = rhs.values;
  b[0] = bc_upper;
  b[n - 1] = bc_lower;
  Eigen::PartialPivLU<RMat> lu(a);
  Vec u(n);
  u.real() = lu.solve(b.real().eval());
  u.imag() = lu.solve(b.imag().eval());
  const double resid = (a * u - b).norm();
  if (!std::isfinite(resid))
    throw numerical_error("solve_helmholtz: singular system");
  return ModeField{k, std::move(u)};
}

Hminus1Solver::Hminus1Solver(const ChebGrid& grid) : grid_(&grid) {
  const int n = grid.n;
  RMat a = RMat::Identity(n, n) - grid.d2;
  a.row(0).setZero();
  a(0, 0) = 1.0;
  a.row(n - 1).setZero();
  a(n - 1, n - 1) = 1.0;
  lu_.compute(a);
}

double Hminus1Solver::norm(const Vec& f) const {
  const ChebGrid& g = *grid_;
  if (f.size() != g.n)
    throw std::invalid_argument("hminus1_norm: field size mismatch");
  Vec b = f;
  b[0] = 0.0;
  b[g.n - 1] = 0.0;
  Vec w(g.n);
  w.real() = lu_.solve(b.real().eval());
  w.imag() = lu_.solve(b.imag().eval());
  Vec dw = g.d1 * w;
  double s = 0.0;
  for (int j = 0; j < g.n; ++j)
    s += g.weights[j] * (std::norm(w[j]) + std::norm(dw[j]));
  return std::sqrt(s);
}

double hminus1_norm(const ChebGrid& grid, const ModeField& f) {
  return Hminus1Solver(grid).norm(f.values);
}

Vec integrate_from_lower(const ChebGrid& grid, const Vec& f) {
  const int n = grid.n;
  const int N = n - 1;
  // Node values -> Chebyshev coefficients (type-I DCT with half-weighted ends).
  Vec a = Vec::Zero(n);
  for (int m = 0; m <= N; ++m) {
    Complex s = 0.0;
    for (int j = 0; j <= N; ++j) {
      double factor = (j == 0 || j == N) ? 0.5 : 1.0;
      s += factor * f[j] * std::cos(m * j * M_PI / N);
    }
    const double cm = (m == 0 || m == N) ? 2.0 : 1.0;
    a[m] = 2.0 * s / (N * cm);
  }
  // Antidifferentiate the coefficient sequence; the T_0 coefficient enters
  // the T_1 term with weight 1 (int T_0 = T_1), hence the doubled a_0.
  Vec b = Vec::Zero(n + 1);
  for (int m = 1; m <= N + 1; ++m) {
    const Complex am1 = (m == 1) ? 2.0 * a[0] : a[m - 1];
    const Complex ap1 = (m + 1 <= N) ? a[m + 1] : Complex(0.0);
    b[m] = (am1 - ap1) / (2.0 * m);
  }
  // Fix the constant so that F(-1) = 0; T_m(-1) = (-1)^m.
  Complex at_lower = 0.0;
  for (int m = 1; m <= N + 1; ++m)
    at_lower += ((m % 2 == 0) ? 1.0 : -1.0) * b[m];
  b[0] = -at_lower;
  // Evaluate at the nodes.
  Vec out = Vec::Zero(n);
  for (int j = 0; j <= N; ++j) {
    Complex s = 0.0;
    for (int m = 0; m <= N + 1; ++m) s += b[m] * std::cos(m * j * M_PI / N);
    out[j] = s;
  }
  return out;
}

}  // namespace cblab
