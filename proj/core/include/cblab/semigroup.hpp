#pragma once

#include "cblab/operators.hpp"

#include <optional>
#include <vector>

namespace cblab {

/// Time-dependent forcing pair entering the per-mode equations as
/// -ik g1(t) - d_y g2(t). Null members mean zero.
struct LinearForcing {
  std::function<Vec(double)> g1;
  std::function<Vec(double)> g2;
};

/// Sampled evolution of one mode.
struct Trajectory {
  OperatorKind kind = OperatorKind::temperature;
  int k = 0;
  double param = 0.0;  // mu for temperature, nu for vorticity
  const ChebGrid* grid = nullptr;
  std::vector<double> times;
  std::vector<Vec> fields;
  // int_0^T (||d_y theta_mid||^2 + k^2 ||theta_mid||^2) dt accumulated at the
  // trapezoidal midpoints of every step (temperature runs only).
  double dissipation = 0.0;
};

struct DecayFit {
  int k = 0;
  double mu = 0.0;
  double rate = 0.0;
  double window_start = 0.0;
  double window_end = 0.0;
  double r2 = 0.0;
};

/// Which superposition functions close the no-slip vorticity update.
/// implicit_response: solutions of the implicit step operator with unit
/// Dirichlet data (keeps the interior rows of the scheme exact).
/// steady_exponential: e^{+-ky}, the kernel of the steady Helmholtz operator.
enum class InfluenceBasis { implicit_response, steady_exponential };

/// Crank-Nicolson stepper for the temperature mode equation
/// d_t theta = mu (d_yy - k^2) theta - iky theta + rhs, theta(+-1) = 0.
class TemperatureStepper {
 public:
  TemperatureStepper(const ChebGrid& grid, int k, double mu, double dt);

  /// Advance one step; rhs_mid is the forcing at the half step (may be empty
  /// for none). Accumulates the dissipation integral.
  Vec step(const Vec& theta, const Vec& rhs_mid);

  double dissipation() const { return dissipation_; }
  double dt() const { return dt_; }

 private:
  const ChebGrid* grid_;
  int k_;
  double mu_, dt_;
  Mat explicit_matrix_;
  Eigen::PartialPivLU<Mat> implicit_lu_;
  double dissipation_ = 0.0;
};

/// Crank-Nicolson stepper for the vorticity mode equation with no-slip
/// enforced by the influence method: a provisional solve plus multiples of
/// the two influence functions chosen so that the recovered velocity
/// satisfies d_y psi(+-1) = 0 exactly (a 2x2 system per mode).
///
/// nu = 0 switches to pure transport: the update is diagonal, no boundary
/// closure is applied (only no-penetration holds), and the nodewise CN
/// update is exactly norm-preserving.
class VorticityStepper {
 public:
  VorticityStepper(const ChebGrid& grid, int k, double nu, double dt,
                   InfluenceBasis basis = InfluenceBasis::implicit_response);

  struct State {
    Vec w;
    Vec psi;
    Vec u1;
    Vec u2;
    double nonslip_upper = 0.0;
    double nonslip_lower = 0.0;
  };

  /// Velocity and stream function consistent with w (used for the initial
  /// state; w should satisfy the compatibility condition).
  State recover(const Vec& w) const;

  State step(const Vec& w, const Vec& rhs_mid) const;

  double dt() const { return dt_; }

 private:
  State correct(Vec w_star) const;

  const ChebGrid* grid_;
  int k_;
  double nu_, dt_;
  Mat explicit_matrix_;
  Eigen::PartialPivLU<Mat> implicit_lu_;
  Eigen::PartialPivLU<Mat> helmholtz_lu_;
  Vec influence_[2];      // additive corrections to w
  Vec influence_psi_[2];  // their stream-function responses
  Eigen::Matrix2cd response_;  // d_y psi responses at the walls
  InfluenceBasis basis_;
};

/// Evolve the linear per-mode problem by trapezoidal stepping with the full
/// linear operator implicit and forcing evaluated at half steps. Temperature
/// boundary values are exactly zero at every step; vorticity runs use the
/// influence closure. Samples every sample_stride steps (plus start/end).
Trajectory evolve_linear(const ModeOperator& op, const ModeField& init,
                         const LinearForcing* forcing, double T, double dt,
                         int sample_stride = 1,
                         InfluenceBasis basis = InfluenceBasis::implicit_response);

/// Fit the exponential decay rate of log||field(t)|| over the window where
/// the norm lies in [1e-6, 1e-1] of its maximum. Throws numerical_error when
/// the trajectory has not decayed enough for the window to exist.
DecayFit fit_enhanced_dissipation(const Trajectory& traj);

/// ||f||_{L^p_t L^q_y} over the recorded samples: trapezoid in t for p = 2,
/// maximum over samples for p = inf (pass p, q as 2 or 0 with 0 = inf).
double spacetime_norm(const Trajectory& traj, int p, int q,
                      const std::function<double(double)>& weight = {});

struct ForcedTemperatureReport {
  int k = 0;
  double mu = 0.0;
  double sup_sq = 0.0;       // ||theta||^2_{LinfL2}
  double int_sq = 0.0;       // ||theta||^2_{L2L2}
  double lhs = 0.0;          // (mu k^2)^{1/3} int_sq + sup_sq
  double data_sq = 0.0;      // ||theta_in||^2
  double g1_sq = 0.0;        // ||g1||^2_{L2L2}
  double g2_sq = 0.0;        // ||g2||^2_{L2L2}
  double bracket = 0.0;      // mu^{-1/3}|k|^{4/3} g1_sq + mu^{-1} g2_sq
  double implied_c = 0.0;
};

/// Run the forced temperature mode from the given data (zero when absent)
/// and measure the space-time estimate constant
/// (mu k^2)^{1/3}||theta||^2_{L2L2} + ||theta||^2_{LinfL2}
///   <= ||theta_in||^2 + C (mu^{-1/3}|k|^{4/3}||g1||^2 + mu^{-1}||g2||^2).
ForcedTemperatureReport measure_forced_temperature_bound(
    const ChebGrid& grid, int k, double mu, const ModeField* init,
    const LinearForcing& forcing, double T, double dt);

struct VorticityBoundReport {
  int k = 0;
  double nu = 0.0;
  double u_sup_sq = 0.0;        // ||u||^2_{LinfLinf}
  double u_int_sq = 0.0;        // ||u||^2_{L2L2}
  double w_int_sq = 0.0;        // ||w||^2_{L2L2}
  double w_weighted_sup_sq = 0.0;  // ||(1-|y|)^{1/2} w||^2_{LinfL2}
  double lhs = 0.0;
  double data_sq = 0.0;         // ||w_in||^2 + k^{-2} ||d_y w_in||^2
  double f1_sq = 0.0;
  double f2_sq = 0.0;
  double forcing_term = 0.0;    // nu^{-1/2}|k| f1_sq + nu^{-1} f2_sq
  double implied_c = 0.0;
  double max_nonslip = 0.0;
};

/// Evolve the vorticity mode with the influence closure and measure the
/// constant in
/// |k| ||u||^2_{LinfLinf} + k^2 ||u||^2_{L2L2} + (nu k^2)^{1/2} ||w||^2_{L2L2}
///   + ||(1-|y|)^{1/2} w||^2_{LinfL2}
///   <= C (||w_in||^2 + k^{-2}||d_y w_in||^2
///         + nu^{-1/2}|k| ||f1||^2 + nu^{-1} ||f2||^2).
/// Rejects initial data that violates the compatibility condition, quoting
/// the measured inner products.
VorticityBoundReport measure_vorticity_bound(
    const ChebGrid& grid, int k, double nu, const ModeField& w_init,
    const LinearForcing* forcing, double T, double dt,
    InfluenceBasis basis = InfluenceBasis::implicit_response);

void write_decay_csv(std::ostream& os, const std::vector<DecayFit>& fits);

}  // namespace cblab
