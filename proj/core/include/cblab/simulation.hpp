#pragma once

#include "cblab/energy_ledger.hpp"
#include "cblab/semigroup.hpp"

#include <cstdint>
#include <memory>
#include <string>

namespace cblab {

/// Full perturbation state: per-mode vorticity and temperature for
/// k = 0..k_max plus the velocities derived from them. Negative modes are
/// the complex conjugates of the stored ones, so reality holds by
/// construction. The k = 0 slot carries the mean flow: u1[0] is the mean
/// streamwise velocity, u2[0] is identically zero, omega[0] = d_y u1[0].
struct ChannelState {
  const ChebGrid* grid = nullptr;
  int k_max = 0;
  double time = 0.0;
  std::vector<Vec> omega, theta, u1, u2;

  static ChannelState zero(const ChebGrid& grid, int k_max);
  /// Largest per-mode L2 norm over omega and theta.
  double max_mode_norm() const;
};

/// Nonlinear flux modes: f1 = (u1 w)_k, f2 = (u2 w)_k, g1 = (u1 theta)_k,
/// g2 = (u2 theta)_k for k = 0..k_max.
struct NonlinearFluxes {
  std::vector<Vec> f1, f2, g1, g2;
};

/// Quadratic products formed in physical x-space on a 3/2 zero-padded
/// transform and truncated back to |k| <= k_max. Also reports the largest
/// pointwise speed for the CFL cap.
class DealiasedTransform {
 public:
  DealiasedTransform(int n, int k_max);
  ~DealiasedTransform();
  DealiasedTransform(const DealiasedTransform&) = delete;
  DealiasedTransform& operator=(const DealiasedTransform&) = delete;

  NonlinearFluxes fluxes(const ChannelState& state);
  double last_max_speed() const { return max_speed_; }
  int physical_points() const { return m_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int n_, k_max_, m_;
  double max_speed_ = 0.0;
};

NonlinearFluxes compute_fluxes(const ChannelState& state);

struct InitMode {
  int k = 0;
  Complex amp_psi = 0.0;    // stream-function amplitude (velocity data)
  Complex amp_theta = 0.0;  // temperature amplitude
};

/// Configuration of one nonlinear run. Initial data is built from a named
/// analytic shape with per-mode complex amplitudes; in "envelope" mode the
/// velocity and temperature data are rescaled so that
///   sum_k ||w_in,k|| + |k|^{-1}||d_y w_in,k|| = eps0 min(nu,mu)^{1/2}
///   ||theta_in,0|| + sum_{k!=0} |k|^{1/6}||theta_in,k|| = eps1 min(nu,mu)^{11/12};
/// in "raw" mode they are rescaled to amp_velocity / amp_temperature.
struct RunConfig {
  int n = 128;
  int k_max = 16;
  double nu = 1e-3;
  double mu = 1e-3;
  double eps0 = 0.0;
  double eps1 = 0.0;
  std::string amp_mode = "envelope";  // or "raw"
  double amp_velocity = 0.0;
  double amp_temperature = 0.0;
  std::string init_shape = "quartic";  // or "quartic_y"
  std::vector<InitMode> modes;
  double T = 1.0;
  double dt = 1e-2;
  int sample_interval = 10;  // ledger samples, in steps
  std::uint64_t seed = 0;
  bool nonlinear = true;
  InfluenceBasis basis = InfluenceBasis::implicit_response;
  std::string ledger_csv;
  std::string audit_csv;
  std::string snapshot_path;  // prefix; empty disables snapshots
  int snapshot_interval = 0;  // in steps; 0 disables
};

enum class HaltReason { completed, blowup, cfl_rejected };

const char* to_string(HaltReason r);

/// IMEX stepping engine for the full per-mode system: diffusion, the
/// background drift iky, and the buoyancy coupling are handled by the
/// trapezoidal rule (buoyancy through the already-updated temperature),
/// nonlinear fluxes by second-order extrapolation. No-slip is enforced by
/// the influence correction every step; the k = 0 slot advances the mean
/// flow and mean temperature equations.
class Simulator {
 public:
  Simulator(const ChebGrid& grid, const RunConfig& config);

  /// Build the configured initial state (shapes, amplitude normalization,
  /// compatibility projection of every w_k, k != 0).
  void initialize();

  /// Adopt an externally built state (for tests); velocities are recovered
  /// from the vorticity.
  void set_state(ChannelState state);

  struct StepResult {
    bool accepted = true;
    double suggested_dt = 0.0;  // on CFL rejection
  };
  StepResult try_step();

  const ChannelState& state() const { return state_; }
  double dt() const { return config_.dt; }

 private:
  void refresh_velocity(int k);

  const ChebGrid* grid_;
  RunConfig config_;
  ChannelState state_;
  DealiasedTransform transform_;
  std::vector<std::unique_ptr<TemperatureStepper>> theta_steppers_;
  std::vector<std::unique_ptr<VorticityStepper>> omega_steppers_;
  std::unique_ptr<TemperatureStepper> mean_flow_stepper_;
  NonlinearFluxes prev_fluxes_;
  bool have_prev_fluxes_ = false;
  double initial_max_norm_ = 0.0;
};

/// One IMEX step of the full system (convenience wrapper that builds the
/// engine; flux extrapolation falls back to the current fluxes). Throws
/// numerical_error with a suggested dt when the CFL cap is violated.
ChannelState step(const ChannelState& state, const FluidParams& params,
                  double dt, bool nonlinear = true,
                  InfluenceBasis basis = InfluenceBasis::implicit_response);

struct RunResult {
  ChannelState final_state;
  EnergyLedger ledger;
  HaltReason halt = HaltReason::completed;
  int steps_taken = 0;
  double suggested_dt = 0.0;
};

/// Run a configured experiment: initialize, step to the horizon, stream the
/// ledger at every sample time, stop early on the blow-up detector
/// (max mode norm above 1e6 x initial) or on a CFL rejection.
/// The observer, when given, sees the state at every sampled time.
RunResult run(const ChebGrid& grid, const RunConfig& config,
              const std::function<void(const ChannelState&)>& observer = {});

/// Flat binary snapshot: magic "CBLB", u32 version, u32 n, i32 k_max,
/// f64 time, then for k = 0..k_max the omega and theta node values as
/// little-endian (re, im) f64 pairs.
void write_snapshot(std::ostream& os, const ChannelState& state);
ChannelState read_snapshot(std::istream& is, const ChebGrid& grid);

}  // namespace cblab
