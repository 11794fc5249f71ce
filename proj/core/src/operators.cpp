#include "cblab/operators.hpp"

#include <cmath>

namespace cblab {

ModeOperator assemble_mode_operator(const ChebGrid& grid, int k,
                                    const FluidParams& params,
                                    OperatorKind kind) {
  const int n = grid.n;
  const double kk = double(k) * double(k);
  const double diff = (kind == OperatorKind::temperature) ? params.mu
                                                          : params.nu;
  Mat m = Mat::Zero(n, n);
  m = (-diff) * (grid.d2 - kk * RMat::Identity(n, n)).cast<Complex>();
  for (int j = 0; j < n; ++j)
    m(j, j) += Complex(0.0, double(k) * grid.nodes[j]);

  if (kind == OperatorKind::temperature) {
    m.row(0).setZero();
    m(0, 0) = 1.0;
    m.row(n - 1).setZero();
    m(n - 1, n - 1) = 1.0;
  } else {
    m.row(0).setZero();
    m.row(n - 1).setZero();
  }
  return ModeOperator{k, kind, std::move(m), params, &grid};
}

Vec exp_basis_upper(const ChebGrid& grid, int k) {
  Vec b(grid.n);
  for (int j = 0; j < grid.n; ++j)
    b[j] = std::exp(double(k) * (grid.nodes[j] - 1.0));
  return b;
}

Vec exp_basis_lower(const ChebGrid& grid, int k) {
  Vec b(grid.n);
  for (int j = 0; j < grid.n; ++j)
    b[j] = std::exp(-double(k) * (grid.nodes[j] + 1.0));
  return b;
}

ModeField compatibility_projection(const ChebGrid& grid, int k,
                                   const ModeField& w, int k_cap) {
  if (k == 0)
    throw std::invalid_argument("compatibility_projection: k must be nonzero");
  if (std::abs(k) > k_cap)
    throw std::invalid_argument("compatibility_projection: |k| exceeds cap");
  if (w.values.size() != grid.n)
    throw std::invalid_argument("compatibility_projection: size mismatch");

  const Vec bu = exp_basis_upper(grid, k);
  const Vec bl = exp_basis_lower(grid, k);
  Eigen::Matrix2cd gram;
  gram << quad_dot(grid, bu, bu), quad_dot(grid, bu, bl),
      quad_dot(grid, bl, bu), quad_dot(grid, bl, bl);
  Eigen::Vector2cd rhs;
  rhs << quad_dot(grid, bu, w.values), quad_dot(grid, bl, w.values);
  Eigen::Vector2cd c = gram.fullPivLu().solve(rhs);
  ModeField out{w.k, w.values - c[0] * bu - c[1] * bl};
  return out;
}

Velocity velocity_from_vorticity(const ChebGrid& grid, int k,
                                 const ModeField& w) {
  if (w.values.size() != grid.n)
    throw std::invalid_argument("velocity_from_vorticity: size mismatch");
  const int n = grid.n;
  Velocity v;
  if (k == 0) {
    Vec u1 = integrate_from_lower(grid, w.values);
    v.u1 = ModeField{0, u1};
    v.u2 = ModeField{0, Vec::Zero(n)};
    v.nonslip_lower = std::abs(u1[n - 1]);
    v.nonslip_upper = std::abs(u1[0]);
    return v;
  }
  ModeField psi = solve_helmholtz(grid, k, w);
  Vec dpsi = grid.d1 * psi.values;
  v.u1 = ModeField{k, dpsi};
  v.u2 = ModeField{k, Complex(0.0, -double(k)) * psi.values};
  v.nonslip_upper = std::abs(dpsi[0]);
  v.nonslip_lower = std::abs(dpsi[n - 1]);
  return v;
}

}  // namespace cblab
