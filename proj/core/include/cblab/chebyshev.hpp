#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <stdexcept>

namespace cblab {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Mat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;

/// Thrown when a linear solve or fit cannot be completed.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Chebyshev-Gauss-Lobatto collocation grid on (-1,1).
///
/// Nodes are stored descending: nodes[0] = 1, nodes[n-1] = -1.
/// d1/d2 are dense differentiation matrices acting on node values;
/// weights are Clenshaw-Curtis quadrature weights on the same nodes.
/// Grids are immutable after construction and safe to share across threads.
struct ChebGrid {
  int n = 0;
  RVec nodes;
  RMat d1;
  RMat d2;
  RVec weights;
};

/// CGL nodes cos(j*pi/(n-1)), j = 0..n-1, descending. No minimum on n.
RVec chebyshev_nodes(int n);

/// Build a collocation grid. Rejects n < 8 (too coarse for the operators
/// assembled on top of it).
ChebGrid build_grid(int n);

/// Complex-valued function of y at the grid nodes, attached to a horizontal
/// wavenumber k.
struct ModeField {
  int k = 0;
  Vec values;
};

/// Quadrature inner product sum_j w_j conj(a_j) b_j.
Complex quad_dot(const ChebGrid& grid, const Vec& a, const Vec& b);

/// Weighted L2 norm (sum_j w_j weight(y_j) |f_j|^2)^{1/2}.
/// weight must be nonnegative; omitted weight means 1.
double weighted_l2_norm(const ChebGrid& grid, const ModeField& f,
                        const std::function<double(double)>& weight = {});

double l2_norm(const ChebGrid& grid, const Vec& v);

/// Solve (d^2/dy^2 - k^2) u = rhs with u(1) = bc_upper, u(-1) = bc_lower,
/// by replacing the boundary rows of the dense operator.
ModeField solve_helmholtz(const ChebGrid& grid, int k, const ModeField& rhs,
                          Complex bc_upper = 0.0, Complex bc_lower = 0.0);

/// Dual norm of H^1_0 realized through the Riesz solve: returns ||w||_{H^1}
/// where (1 - d^2/dy^2) w = f, w(+-1) = 0.
double hminus1_norm(const ChebGrid& grid, const ModeField& f);

/// Caches the Riesz-solve factorization; use when evaluating the norm for
/// many right-hand sides on the same grid.
class Hminus1Solver {
 public:
  explicit Hminus1Solver(const ChebGrid& grid);
  double norm(const Vec& f) const;

 private:
  const ChebGrid* grid_;
  Eigen::PartialPivLU<RMat> lu_;
};

/// Antiderivative F(y) = int_{-1}^{y} f dy', computed through Chebyshev
/// coefficient space. Exact for polynomial node data up to degree n-2.
Vec integrate_from_lower(const ChebGrid& grid, const Vec& f);

}  // namespace cblab
