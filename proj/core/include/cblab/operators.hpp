#pragma once

#include "cblab/chebyshev.hpp"

namespace cblab {

/// Viscosity and thermal diffusivity. Both must be positive for the
/// dissipative operators; zero is tolerated only by the transport-only
/// validation paths of the simulator.
struct FluidParams {
  double nu = 0.0;
  double mu = 0.0;

  static constexpr double default_cap = 1.0;

  void validate(double cap = default_cap) const {
    if (!(nu >= 0.0) || !(mu >= 0.0))
      throw std::invalid_argument("FluidParams: nu, mu must be nonnegative");
    if (nu > cap || mu > cap)
      throw std::invalid_argument("FluidParams: nu, mu exceed the cap");
  }
};

enum class OperatorKind { temperature, vorticity };

/// Dense per-mode linearized operator.
///
/// temperature: -mu (d_yy - k^2) + i k y with Dirichlet rows at y = +-1.
/// vorticity:   -nu (d_yy - k^2) + i k y at interior rows only; the
/// boundary closure is supplied by the evolution scheme.
struct ModeOperator {
  int k = 0;
  OperatorKind kind = OperatorKind::temperature;
  Mat matrix;
  FluidParams params;
  const ChebGrid* grid = nullptr;

  /// Interior square block (boundary rows/columns removed).
  Mat interior() const {
    const int m = grid->n - 2;
    return matrix.block(1, 1, m, m);
  }
};

ModeOperator assemble_mode_operator(const ChebGrid& grid, int k,
                                    const FluidParams& params,
                                    OperatorKind kind);

/// |k| above which exp(k y) projections are refused outright.
inline constexpr int default_wavenumber_cap = 32;

/// Rescaled exponential basis spanning {e^{ky}, e^{-ky}}: e^{k(y-1)} and
/// e^{-k(y+1)}, each bounded by 1 on [-1,1].
Vec exp_basis_upper(const ChebGrid& grid, int k);
Vec exp_basis_lower(const ChebGrid& grid, int k);

/// Quadrature-orthogonal projection of w onto the complement of
/// span{e^{ky}, e^{-ky}}. Requires k != 0 and |k| <= k_cap.
ModeField compatibility_projection(const ChebGrid& grid, int k,
                                   const ModeField& w,
                                   int k_cap = default_wavenumber_cap);

/// Velocity recovered from vorticity through the stream function.
struct Velocity {
  ModeField u1;
  ModeField u2;
  // |d_y psi| at y = +1 and y = -1; nonzero values flag incompatible w.
  double nonslip_upper = 0.0;
  double nonslip_lower = 0.0;
};

/// k != 0: solve (d_yy - k^2) psi = w, psi(+-1) = 0, u1 = d_y psi,
/// u2 = -ik psi. k == 0: u2 = 0 and u1 = int_{-1}^{y} w with u1(-1) = 0;
/// the mismatch at y = 1 is reported in nonslip_upper.
Velocity velocity_from_vorticity(const ChebGrid& grid, int k,
                                 const ModeField& w);

}  // namespace cblab
