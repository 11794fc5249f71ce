#include "cblab/simulation.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>

namespace cblab {

ChannelState ChannelState::zero(const ChebGrid& grid, int k_max) {
  ChannelState s;
  s.grid = &grid;
  s.k_max = k_max;
  s.omega.assign(k_max + 1, Vec::Zero(grid.n));
  s.theta.assign(k_max + 1, Vec::Zero(grid.n));
  s.u1.assign(k_max + 1, Vec::Zero(grid.n));
  s.u2.assign(k_max + 1, Vec::Zero(grid.n));
  return s;
}

double ChannelState::max_mode_norm() const {
  double m = 0.0;
  for (int k = 0; k <= k_max; ++k) {
    m = std::max(m, l2_norm(*grid, omega[k]));
    m = std::max(m, l2_norm(*grid, theta[k]));
  }
  return m;
}

// FFTW planning is not thread-safe; executions on distinct plans are.
namespace {
std::mutex fftw_plan_mutex;
}

struct DealiasedTransform::Impl {
  fftw_plan c2r = nullptr;
  fftw_plan r2c = nullptr;
  fftw_complex* spec = nullptr;
  double* phys = nullptr;

  ~Impl() {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex);
    if (c2r) fftw_destroy_plan(c2r);
    if (r2c) fftw_destroy_plan(r2c);
    if (spec) fftw_free(spec);
    if (phys) fftw_free(phys);
  }
};

DealiasedTransform::DealiasedTransform(int n, int k_max)
    : impl_(std::make_unique<Impl>()), n_(n), k_max_(k_max) {
  // 3/2-rule padding: products of modes |k| <= k_max stay alias-free on the
  // retained band when the physical grid has at least 3 k_max + 1 points.
  m_ = 3 * k_max + 2;
  if (m_ % 2 != 0) ++m_;
  if (m_ < 8) m_ = 8;
  impl_->spec = fftw_alloc_complex(m_ / 2 + 1);
  impl_->phys = fftw_alloc_real(m_);
  std::lock_guard<std::mutex> lock(fftw_plan_mutex);
  impl_->c2r = fftw_plan_dft_c2r_1d(m_, impl_->spec, impl_->phys,
                                    FFTW_ESTIMATE);
  impl_->r2c = fftw_plan_dft_r2c_1d(m_, impl_->phys, impl_->spec,
                                    FFTW_ESTIMATE);
  if (!impl_->c2r || !impl_->r2c)
    throw numerical_error("DealiasedTransform: fftw planning failed");
}

DealiasedTransform::~DealiasedTransform() = default;

NonlinearFluxes DealiasedTransform::fluxes(const ChannelState& state) {
  if (state.k_max != k_max_ || state.grid->n != n_)
    throw std::invalid_argument("DealiasedTransform: state shape mismatch");
  const int n = n_;
  const int K = k_max_;
  const int spec_len = m_ / 2 + 1;

  NonlinearFluxes out;
  out.f1.assign(K + 1, Vec::Zero(n));
  out.f2.assign(K + 1, Vec::Zero(n));
  out.g1.assign(K + 1, Vec::Zero(n));
  out.g2.assign(K + 1, Vec::Zero(n));

  std::vector<double> pu1(m_), pu2(m_), pw(m_), pth(m_);
  max_speed_ = 0.0;

  auto to_phys = [&](const std::vector<Vec>& modes, int j, double* dst) {
    for (int s = 0; s < spec_len; ++s) {
      impl_->spec[s][0] = 0.0;
      impl_->spec[s][1] = 0.0;
    }
    for (int k = 0; k <= K; ++k) {
      impl_->spec[k][0] = modes[k][j].real();
      impl_->spec[k][1] = modes[k][j].imag();
    }
    impl_->spec[0][1] = 0.0;  // halfcomplex bin 0 must be purely real
    fftw_execute(impl_->c2r);
    std::memcpy(dst, impl_->phys, sizeof(double) * m_);
  };
  auto to_spec = [&](const double* a, const double* b,
                     std::vector<Vec>& dst, int j) {
    for (int i = 0; i < m_; ++i) impl_->phys[i] = a[i] * b[i];
    fftw_execute(impl_->r2c);
    for (int k = 0; k <= K; ++k)
      dst[k][j] = Complex(impl_->spec[k][0], impl_->spec[k][1]) / double(m_);
  };

  for (int j = 0; j < n; ++j) {
    to_phys(state.u1, j, pu1.data());
    to_phys(state.u2, j, pu2.data());
    to_phys(state.omega, j, pw.data());
    to_phys(state.theta, j, pth.data());
    for (int i = 0; i < m_; ++i) {
      const double speed = std::sqrt(pu1[i] * pu1[i] + pu2[i] * pu2[i]);
      max_speed_ = std::max(max_speed_, speed);
    }
    to_spec(pu1.data(), pw.data(), out.f1, j);
    to_spec(pu2.data(), pw.data(), out.f2, j);
    to_spec(pu1.data(), pth.data(), out.g1, j);
    to_spec(pu2.data(), pth.data(), out.g2, j);
  }
  return out;
}

NonlinearFluxes compute_fluxes(const ChannelState& state) {
  DealiasedTransform t(state.grid->n, state.k_max);
  return t.fluxes(state);
}

const char* to_string(HaltReason r) {
  switch (r) {
    case HaltReason::completed: return "completed";
    case HaltReason::blowup: return "departed";
    case HaltReason::cfl_rejected: return "cfl_rejected";
  }
  return "unknown";
}

namespace {

Vec shape_values(const ChebGrid& grid, const std::string& name) {
  Vec v(grid.n);
  if (name == "quartic") {
    for (int j = 0; j < grid.n; ++j) {
      const double y = grid.nodes[j];
      const double q = 1.0 - y * y;
      v[j] = q * q;
    }
  } else if (name == "quartic_y") {
    for (int j = 0; j < grid.n; ++j) {
      const double y = grid.nodes[j];
      const double q = 1.0 - y * y;
      v[j] = y * q * q;
    }
  } else {
    throw std::invalid_argument("unknown init shape: " + name);
  }
  return v;
}

}  // namespace

Simulator::Simulator(const ChebGrid& grid, const RunConfig& config)
    : grid_(&grid),
      config_(config),
      transform_(grid.n, config.k_max) {
  if (config.k_max < 1)
    throw std::invalid_argument("Simulator: k_max must be >= 1");
  if (config.dt <= 0.0 || config.T < config.dt)
    throw std::invalid_argument("Simulator: need 0 < dt <= T");
  FluidParams{config.nu, config.mu}.validate();
  state_ = ChannelState::zero(grid, config.k_max);
  theta_steppers_.resize(config.k_max + 1);
  omega_steppers_.resize(config.k_max + 1);
  for (int k = 0; k <= config.k_max; ++k)
    theta_steppers_[k] = std::make_unique<TemperatureStepper>(
        grid, k, config.mu, config.dt);
  for (int k = 1; k <= config.k_max; ++k)
    omega_steppers_[k] = std::make_unique<VorticityStepper>(
        grid, k, config.nu, config.dt, config.basis);
  mean_flow_stepper_ = std::make_unique<TemperatureStepper>(
      grid, 0, config.nu, config.dt);
}

void Simulator::refresh_velocity(int k) {
  const ChebGrid& g = *grid_;
  if (k == 0) {
    state_.omega[0] = g.d1.cast<Complex>() * state_.u1[0];
    state_.u2[0].setZero();
    return;
  }
  auto st = omega_steppers_[k]->recover(state_.omega[k]);
  state_.u1[k] = std::move(st.u1);
  state_.u2[k] = std::move(st.u2);
}

void Simulator::initialize() {
  const ChebGrid& g = *grid_;
  state_ = ChannelState::zero(g, config_.k_max);
  const Vec shape = shape_values(g, config_.init_shape);
  Vec psi0 = Vec::Zero(g.n);

  for (const InitMode& m : config_.modes) {
    if (m.k < 0 || m.k > config_.k_max)
      throw std::invalid_argument("Simulator: init mode outside [0, k_max]");
    if (m.k == 0 && (m.amp_psi.imag() != 0.0 || m.amp_theta.imag() != 0.0))
      throw std::invalid_argument(
          "Simulator: k = 0 amplitudes must be real (reality of the field)");
    if (m.k == 0) {
      psi0 += m.amp_psi * shape;
      state_.theta[0] += m.amp_theta * shape;
    } else {
      // w = (d_yy - k^2) psi keeps the data compatible by construction.
      Vec psi = m.amp_psi * shape;
      state_.omega[m.k] +=
          (g.d2.cast<Complex>() * psi) - double(m.k) * double(m.k) * psi;
      state_.theta[m.k] += m.amp_theta * shape;
    }
  }
  state_.u1[0] = g.d1.cast<Complex>() * psi0;

  // Amplitude normalization.
  double data_e = l2_norm(g, Vec(g.d1.cast<Complex>() * state_.u1[0]));
  double data_h = l2_norm(g, state_.theta[0]);
  for (int k = 1; k <= config_.k_max; ++k) {
    const double wn = l2_norm(g, state_.omega[k]);
    const double dwn = l2_norm(g, Vec(g.d1.cast<Complex>() * state_.omega[k]));
    data_e += 2.0 * (wn + dwn / double(k));
    data_h += 2.0 * std::pow(double(k), 1.0 / 6.0) *
              l2_norm(g, state_.theta[k]);
  }
  double target_e = 0.0, target_h = 0.0;
  const double vmin = std::min(config_.nu, config_.mu);
  if (config_.amp_mode == "envelope") {
    target_e = config_.eps0 * std::sqrt(vmin);
    target_h = config_.eps1 * std::pow(vmin, 11.0 / 12.0);
  } else if (config_.amp_mode == "raw") {
    target_e = config_.amp_velocity;
    target_h = config_.amp_temperature;
  } else {
    throw std::invalid_argument("Simulator: amp_mode must be envelope or raw");
  }
  const double se = data_e > 0.0 ? target_e / data_e : 0.0;
  const double sh = data_h > 0.0 ? target_h / data_h : 0.0;
  state_.u1[0] *= se;
  state_.theta[0] *= sh;
  for (int k = 1; k <= config_.k_max; ++k) {
    state_.omega[k] *= se;
    state_.theta[k] *= sh;
    ModeField proj = compatibility_projection(
        g, k, ModeField{k, state_.omega[k]},
        std::max(default_wavenumber_cap, config_.k_max));
    state_.omega[k] = std::move(proj.values);
  }
  for (int k = 0; k <= config_.k_max; ++k) refresh_velocity(k);
  state_.time = 0.0;
  have_prev_fluxes_ = false;
  initial_max_norm_ = state_.max_mode_norm();
}

void Simulator::set_state(ChannelState state) {
  if (state.k_max != config_.k_max || state.grid->n != grid_->n)
    throw std::invalid_argument("Simulator: state shape mismatch");
  state_ = std::move(state);
  for (int k = 0; k <= config_.k_max; ++k) refresh_velocity(k);
  have_prev_fluxes_ = false;
  initial_max_norm_ = state_.max_mode_norm();
}

Simulator::StepResult Simulator::try_step() {
  const ChebGrid& g = *grid_;
  const int K = config_.k_max;
  const double dt = config_.dt;
  StepResult result;

  NonlinearFluxes cur;
  if (config_.nonlinear) {
    cur = transform_.fluxes(state_);
    const double dx = 2.0 * M_PI / transform_.physical_points();
    const double speed = transform_.last_max_speed();
    if (speed > 0.0) {
      const double cap = 0.5 * dx / speed;
      if (dt > cap) {
        result.accepted = false;
        result.suggested_dt = cap;
        return result;
      }
    }
  }

  // Second-order extrapolation of the fluxes to the half step.
  auto flux_mid = [&](const std::vector<Vec>& now,
                      const std::vector<Vec>& prev, int k) -> Vec {
    if (!config_.nonlinear) return Vec();
    if (!have_prev_fluxes_) return now[k];
    return 1.5 * now[k] - 0.5 * prev[k];
  };

  // Temperature first: the updated values feed the buoyancy implicitly.
  std::vector<Vec> theta_new(K + 1);
  for (int k = 0; k <= K; ++k) {
    Vec rhs;
    if (config_.nonlinear) {
      Vec g1m = flux_mid(cur.g1, prev_fluxes_.g1, k);
      Vec g2m = flux_mid(cur.g2, prev_fluxes_.g2, k);
      rhs = Complex(0.0, -double(k)) * g1m - g.d1.cast<Complex>() * g2m;
    }
    theta_new[k] = theta_steppers_[k]->step(state_.theta[k], rhs);
  }

  // Vorticity modes with trapezoidal buoyancy and the influence closure.
  for (int k = 1; k <= K; ++k) {
    Vec rhs = Complex(0.0, -double(k)) * 0.5 *
              (state_.theta[k] + theta_new[k]);
    if (config_.nonlinear) {
      Vec f1m = flux_mid(cur.f1, prev_fluxes_.f1, k);
      Vec f2m = flux_mid(cur.f2, prev_fluxes_.f2, k);
      rhs += Complex(0.0, -double(k)) * f1m - g.d1.cast<Complex>() * f2m;
    }
    auto st = omega_steppers_[k]->step(state_.omega[k], rhs);
    state_.omega[k] = std::move(st.w);
    state_.u1[k] = std::move(st.u1);
    state_.u2[k] = std::move(st.u2);
  }

  // Mean flow: d_t u1_0 - nu d_yy u1_0 = -f2_0, u1_0(+-1) = 0.
  {
    Vec rhs;
    if (config_.nonlinear) rhs = -flux_mid(cur.f2, prev_fluxes_.f2, 0);
    state_.u1[0] = mean_flow_stepper_->step(state_.u1[0], rhs);
    state_.omega[0] = g.d1.cast<Complex>() * state_.u1[0];
  }
  for (int k = 0; k <= K; ++k) state_.theta[k] = std::move(theta_new[k]);

  if (config_.nonlinear) {
    prev_fluxes_ = std::move(cur);
    have_prev_fluxes_ = true;
  }
  state_.time += dt;
  return result;
}

ChannelState step(const ChannelState& state, const FluidParams& params,
                  double dt, bool nonlinear, InfluenceBasis basis) {
  RunConfig cfg;
  cfg.n = state.grid->n;
  cfg.k_max = state.k_max;
  cfg.nu = params.nu;
  cfg.mu = params.mu;
  cfg.T = dt;
  cfg.dt = dt;
  cfg.nonlinear = nonlinear;
  cfg.basis = basis;
  Simulator sim(*state.grid, cfg);
  sim.set_state(state);
  auto r = sim.try_step();
  if (!r.accepted) {
    char msg[128];
    std::snprintf(msg, sizeof msg,
                  "step: CFL violation, suggested dt = %.6g", r.suggested_dt);
    throw numerical_error(msg);
  }
  return sim.state();
}

RunResult run(const ChebGrid& grid, const RunConfig& config,
              const std::function<void(const ChannelState&)>& observer) {
  Simulator sim(grid, config);
  sim.initialize();
  EnergyLedger ledger(grid, config.k_max, config.nu, config.mu);
  ledger.record_initial(sim.state());
  if (observer) observer(sim.state());

  const int nsteps = std::max(1, int(std::llround(config.T / config.dt)));
  const int stride = std::max(1, config.sample_interval);
  const double blowup_cap =
      1e6 * std::max(sim.state().max_mode_norm(),
                     std::numeric_limits<double>::min());

  RunResult result{ChannelState{}, std::move(ledger), HaltReason::completed,
                   0, 0.0};
  double last_sample_time = 0.0;

  auto snapshot = [&](int s) {
    if (config.snapshot_path.empty() || config.snapshot_interval <= 0) return;
    if (s % config.snapshot_interval != 0 && s != nsteps) return;
    std::ofstream os(config.snapshot_path + "_" + std::to_string(s) + ".bin",
                     std::ios::binary);
    write_snapshot(os, sim.state());
  };
  snapshot(0);

  for (int s = 1; s <= nsteps; ++s) {
    auto sr = sim.try_step();
    if (!sr.accepted) {
      result.halt = HaltReason::cfl_rejected;
      result.suggested_dt = sr.suggested_dt;
      break;
    }
    result.steps_taken = s;
    const bool sample = (s % stride == 0) || s == nsteps;
    if (sample) {
      result.ledger.accumulate(sim.state(), sim.state().time - last_sample_time);
      last_sample_time = sim.state().time;
      if (observer) observer(sim.state());
      snapshot(s);
    }
    const double mn = sim.state().max_mode_norm();
    if (!std::isfinite(mn) || mn > blowup_cap) {
      if (!sample) {
        result.ledger.accumulate(sim.state(),
                                 sim.state().time - last_sample_time);
        last_sample_time = sim.state().time;
      }
      result.halt = HaltReason::blowup;
      break;
    }
  }
  result.final_state = sim.state();
  return result;
}

namespace {
constexpr char kSnapshotMagic[4] = {'C', 'B', 'L', 'B'};
}

void write_snapshot(std::ostream& os, const ChannelState& state) {
  os.write(kSnapshotMagic, 4);
  const std::uint32_t version = 1;
  const std::uint32_t n = state.grid->n;
  const std::int32_t k_max = state.k_max;
  os.write(reinterpret_cast<const char*>(&version), 4);
  os.write(reinterpret_cast<const char*>(&n), 4);
  os.write(reinterpret_cast<const char*>(&k_max), 4);
  os.write(reinterpret_cast<const char*>(&state.time), 8);
  auto dump = [&](const Vec& v) {
    for (int j = 0; j < v.size(); ++j) {
      const double re = v[j].real(), im = v[j].imag();
      os.write(reinterpret_cast<const char*>(&re), 8);
      os.write(reinterpret_cast<const char*>(&im), 8);
    }
  };
  for (int k = 0; k <= state.k_max; ++k) {
    dump(state.omega[k]);
    dump(state.theta[k]);
  }
}

ChannelState read_snapshot(std::istream& is, const ChebGrid& grid) {
  char magic[4];
  is.read(magic, 4);
  if (std::memcmp(magic, kSnapshotMagic, 4) != 0)
    throw std::invalid_argument("read_snapshot: bad magic");
  std::uint32_t version = 0, n = 0;
  std::int32_t k_max = 0;
  double time = 0.0;
  is.read(reinterpret_cast<char*>(&version), 4);
  is.read(reinterpret_cast<char*>(&n), 4);
  is.read(reinterpret_cast<char*>(&k_max), 4);
  is.read(reinterpret_cast<char*>(&time), 8);
  if (version != 1) throw std::invalid_argument("read_snapshot: bad version");
  if (int(n) != grid.n)
    throw std::invalid_argument("read_snapshot: grid size mismatch");
  ChannelState s = ChannelState::zero(grid, k_max);
  s.time = time;
  auto load = [&](Vec& v) {
    for (int j = 0; j < v.size(); ++j) {
      double re = 0, im = 0;
      is.read(reinterpret_cast<char*>(&re), 8);
      is.read(reinterpret_cast<char*>(&im), 8);
      v[j] = Complex(re, im);
    }
  };
  for (int k = 0; k <= k_max; ++k) {
    load(s.omega[k]);
    load(s.theta[k]);
  }
  if (!is) throw std::invalid_argument("read_snapshot: truncated file");
  // Velocities are derivable; leave them zero for the caller to refresh.
  return s;
}

}  // namespace cblab
