// cblab command-line driver: resolvent sweeps, decay fits, forced-estimate
// verification, nonlinear runs, threshold scans, and ledger audits. Every
// subcommand is a pure function of its JSON config file (schemas in the
// README); outputs are CSV with versioned headers.

#include "cblab/energy_ledger.hpp"
#include "cblab/harness.hpp"
#include "cblab/resolvent.hpp"
#include "cblab/semigroup.hpp"
#include "cblab/simulation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

using json = nlohmann::json;

namespace {

json load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open config file: " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.what());
  }
  return j;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::invalid_argument("cannot open output file: " + path);
  return os;
}

cblab::Complex parse_complex(const json& j) {
  if (j.is_number()) return cblab::Complex(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2)
    return cblab::Complex(j[0].get<double>(), j[1].get<double>());
  throw std::invalid_argument("complex amplitudes must be numbers or [re, im]");
}

cblab::InfluenceBasis parse_basis(const std::string& s) {
  if (s == "implicit_response") return cblab::InfluenceBasis::implicit_response;
  if (s == "steady_exponential") return cblab::InfluenceBasis::steady_exponential;
  throw std::invalid_argument("influence_basis must be implicit_response or "
                              "steady_exponential");
}

std::vector<double> parse_lambda_grid(const json& j) {
  if (j.contains("lambda_list"))
    return j.at("lambda_list").get<std::vector<double>>();
  const json& r = j.at("lambda_range");
  const double lo = r.at("min").get<double>();
  const double hi = r.at("max").get<double>();
  const int count = r.at("count").get<int>();
  if (count < 2 || !(hi > lo))
    throw std::invalid_argument("lambda_range needs min < max and count >= 2");
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i)
    grid[i] = lo + (hi - lo) * double(i) / double(count - 1);
  return grid;
}

cblab::RunConfig parse_run_config(const json& j) {
  cblab::RunConfig c;
  c.n = j.value("n", 128);
  c.k_max = j.value("k_max", 16);
  c.nu = j.at("nu").get<double>();
  c.mu = j.at("mu").get<double>();
  c.eps0 = j.value("eps0", 0.0);
  c.eps1 = j.value("eps1", 0.0);
  c.amp_mode = j.value("amp_mode", std::string("envelope"));
  c.amp_velocity = j.value("amp_velocity", 0.0);
  c.amp_temperature = j.value("amp_temperature", 0.0);
  c.init_shape = j.value("init_shape", std::string("quartic"));
  if (j.contains("modes")) {
    for (const auto& m : j.at("modes")) {
      cblab::InitMode im;
      im.k = m.at("k").get<int>();
      if (m.contains("amp_psi")) im.amp_psi = parse_complex(m.at("amp_psi"));
      if (m.contains("amp_theta"))
        im.amp_theta = parse_complex(m.at("amp_theta"));
      c.modes.push_back(im);
    }
  }
  c.T = j.at("T").get<double>();
  c.dt = j.at("dt").get<double>();
  c.sample_interval = j.value("sample_interval", 10);
  c.seed = j.value("seed", std::uint64_t(0));
  c.nonlinear = j.value("nonlinear", true);
  c.basis = parse_basis(
      j.value("influence_basis", std::string("implicit_response")));
  c.ledger_csv = j.value("ledger_csv", std::string());
  c.audit_csv = j.value("audit_csv", std::string());
  c.snapshot_path = j.value("snapshot_path", std::string());
  c.snapshot_interval = j.value("snapshot_interval", 0);
  return c;
}

int worker_count(const json& j) {
  int workers = j.value("workers", 0);
  if (workers <= 0) {
    if (const char* env = std::getenv("CBLAB_WORKERS")) workers = std::atoi(env);
  }
  return std::max(1, workers);
}

// ---------------------------------------------------------------------------

int cmd_resolvent_sweep(const std::string& config_path) {
  const json j = load_config(config_path);
  cblab::ChebGrid grid = cblab::build_grid(j.value("n", 128));
  cblab::SweepConfig sweep;
  sweep.k_list = j.at("k_list").get<std::vector<int>>();
  sweep.mu_list = j.at("mu_list").get<std::vector<double>>();
  sweep.lambda_list = parse_lambda_grid(j);
  sweep.trials = j.value("trials", 1);
  sweep.seed = j.value("seed", std::uint64_t(0));
  auto samples = cblab::sweep_resolvent(grid, sweep);
  auto os = open_output(j.at("output_csv").get<std::string>());
  cblab::write_resolvent_csv(os, samples);
  double max_ratio = 0.0;
  for (const auto& s : samples) max_ratio = std::max(max_ratio, s.ratio_l2);
  std::printf("resolvent-sweep: %zu samples, max ratio_l2 = %.12g\n",
              samples.size(), max_ratio);
  return 0;
}

int cmd_decay_fit(const std::string& config_path) {
  const json j = load_config(config_path);
  cblab::ChebGrid grid = cblab::build_grid(j.value("n", 128));
  const auto k_list = j.at("k_list").get<std::vector<int>>();
  const auto mu_list = j.at("mu_list").get<std::vector<double>>();
  const int field_modes = j.value("init_modes", 8);
  const std::uint64_t seed = j.value("seed", std::uint64_t(1));
  std::vector<cblab::DecayFit> fits;
  for (int k : k_list) {
    for (double mu : mu_list) {
      double T = j.value("T", 0.0);
      if (T <= 0.0)
        T = 10.0 / (std::cbrt(mu) * std::pow(std::abs(double(k)), 2.0 / 3.0));
      double dt = j.value("dt", 0.0);
      if (dt <= 0.0) dt = std::min(0.02, 0.1 / std::max(1, std::abs(k)));
      cblab::ModeField init{
          k, cblab::RandomSmoothField::make(field_modes, seed).eval(grid)};
      init.values[0] = 0.0;
      init.values[grid.n - 1] = 0.0;
      cblab::ModeOperator op = cblab::assemble_mode_operator(
          grid, k, cblab::FluidParams{mu, mu}, cblab::OperatorKind::temperature);
      // The default horizon can undershoot the fit window when the decay
      // constant is small; extend and retry instead of failing the sweep.
      cblab::DecayFit fit;
      bool ok = false;
      for (int attempt = 0; attempt < 4 && !ok; ++attempt) {
        auto traj = cblab::evolve_linear(op, init, nullptr, T, dt, 5);
        try {
          fit = cblab::fit_enhanced_dissipation(traj);
          ok = true;
        } catch (const cblab::numerical_error&) {
          T *= 2.0;
        }
      }
      if (!ok)
        throw cblab::numerical_error("decay-fit: no fit window at k=" +
                                     std::to_string(k) +
                                     " mu=" + std::to_string(mu));
      fits.push_back(fit);
    }
  }
  auto os = open_output(j.at("output_csv").get<std::string>());
  cblab::write_decay_csv(os, fits);
  std::printf("decay-fit: %zu fits written\n", fits.size());
  return 0;
}

int cmd_verify_estimates(const std::string& config_path) {
  const json j = load_config(config_path);
  cblab::ChebGrid grid = cblab::build_grid(j.value("n", 96));
  const auto k_list = j.at("k_list").get<std::vector<int>>();
  const auto mu_list = j.at("mu_list").get<std::vector<double>>();
  const std::uint64_t seed = j.value("seed", std::uint64_t(7));
  const int fmodes = j.value("forcing_modes", 6);
  const double famp = j.value("forcing_amplitude", 1.0);

  auto os = open_output(j.at("output_csv").get<std::string>());
  os << "# cblab-csv v1 verify-estimates\n";
  os << "kind,k,param,lhs,data,term1,term2,value\n";
  char buf[512];
  auto emit = [&](const char* kind, int k, double param, double lhs,
                  double data, double t1, double t2, double value) {
    std::snprintf(buf, sizeof buf, "%s,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  kind, k, param, lhs, data, t1, t2, value);
    os << buf;
  };

  for (int k : k_list) {
    for (double mu : mu_list) {
      double T = j.value("T", 0.0);
      if (T <= 0.0)
        T = 10.0 / (std::cbrt(mu) * std::pow(std::abs(double(k)), 2.0 / 3.0));
      double dt = j.value("dt", 0.0);
      if (dt <= 0.0) dt = std::min(0.02, 0.1 / std::max(1, std::abs(k)));

      auto g1 = cblab::RandomSmoothForcing::make(fmodes, famp, 0.5 * T,
                                                 seed + 11 * k);
      auto g2 = cblab::RandomSmoothForcing::make(fmodes, famp, 0.5 * T,
                                                 seed + 11 * k + 5);
      cblab::LinearForcing forcing{g1.bind(grid), g2.bind(grid)};

      auto forced = cblab::measure_forced_temperature_bound(
          grid, k, mu, nullptr, forcing, T, dt);
      emit("theta_forced", k, mu, forced.lhs, forced.data_sq, forced.g1_sq,
           forced.g2_sq, forced.implied_c);

      cblab::ModeField init{
          k, cblab::RandomSmoothField::make(fmodes, seed + 3 * k).eval(grid)};
      init.values[0] = 0.0;
      init.values[grid.n - 1] = 0.0;
      auto composite = cblab::measure_forced_temperature_bound(
          grid, k, mu, &init, forcing, T, dt);
      emit("theta_composite", k, mu, composite.lhs, composite.data_sq,
           composite.g1_sq, composite.g2_sq, composite.implied_c);

      // Unforced energy identity defect.
      {
        cblab::ModeOperator op = cblab::assemble_mode_operator(
            grid, k, cblab::FluidParams{mu, mu},
            cblab::OperatorKind::temperature);
        auto traj = cblab::evolve_linear(op, init, nullptr, T, dt,
                                         std::max(1, int(T / dt / 50)));
        const double init_sq = std::pow(cblab::l2_norm(grid, init.values), 2);
        const double final_sq =
            std::pow(cblab::l2_norm(grid, traj.fields.back()), 2);
        const double defect =
            std::abs(final_sq + 2.0 * mu * traj.dissipation - init_sq) /
            init_sq;
        emit("theta_energy_identity", k, mu, final_sq + 2.0 * mu * traj.dissipation,
             init_sq, traj.dissipation, 0.0, defect);
      }

      // Vorticity space-time bound from compatible data plus forcing.
      {
        cblab::Vec raw =
            cblab::RandomSmoothField::make(fmodes, seed + 7 * k).eval(grid);
        cblab::ModeField w0 = cblab::compatibility_projection(
            grid, k, cblab::ModeField{k, raw});
        auto f1 = cblab::RandomSmoothForcing::make(fmodes, famp, 0.5 * T,
                                                   seed + 13 * k);
        auto f2 = cblab::RandomSmoothForcing::make(fmodes, famp, 0.5 * T,
                                                   seed + 13 * k + 5);
        cblab::LinearForcing vf{f1.bind(grid), f2.bind(grid)};
        auto rep = cblab::measure_vorticity_bound(grid, k, mu, w0, &vf, T, dt);
        emit("vorticity", k, mu, rep.lhs, rep.data_sq, rep.f1_sq, rep.f2_sq,
             rep.implied_c);
      }
    }
  }
  std::printf("verify-estimates: done\n");
  return 0;
}

void write_run_outputs(const cblab::RunConfig& cfg, const cblab::RunResult& r,
                       double envelope_c) {
  const cblab::LedgerView view = r.ledger.view();
  if (!cfg.ledger_csv.empty()) {
    auto os = open_output(cfg.ledger_csv);
    cblab::write_ledger_csv(os, view);
    char buf[512];
    std::snprintf(buf, sizeof buf, "# halt=%s steps=%d\n",
                  cblab::to_string(r.halt), r.steps_taken);
    os << buf;
    auto main_check =
        cblab::main_estimate_check(view, cfg.eps0, cfg.eps1, envelope_c);
    std::snprintf(buf, sizeof buf,
                  "# sum_E=%.17g sum_H=%.17g bound_E=%.17g bound_H=%.17g "
                  "tail_E=%.17g tail_H=%.17g\n",
                  main_check.sum_E, main_check.sum_H, main_check.bound_E,
                  main_check.bound_H, main_check.tail_E, main_check.tail_H);
    os << buf;
  }
  if (!cfg.audit_csv.empty()) {
    auto os = open_output(cfg.audit_csv);
    cblab::write_audit_csv(os, cblab::audit_bootstrap(view));
  }
}

int cmd_simulate(const std::string& config_path) {
  const json j = load_config(config_path);
  cblab::RunConfig cfg = parse_run_config(j);
  const double envelope_c = j.value("envelope_c", 4.0);
  cblab::ChebGrid grid = cblab::build_grid(cfg.n);
  cblab::RunResult r = cblab::run(grid, cfg);
  write_run_outputs(cfg, r, envelope_c);
  const auto view = r.ledger.view();
  auto check = cblab::main_estimate_check(view, cfg.eps0, cfg.eps1, envelope_c);
  std::printf("simulate: halt=%s steps=%d sum_E=%.12g sum_H=%.12g\n",
              cblab::to_string(r.halt), r.steps_taken, check.sum_E,
              check.sum_H);
  if (r.halt == cblab::HaltReason::cfl_rejected)
    std::printf("simulate: CFL rejection, suggested dt = %.6g\n",
                r.suggested_dt);
  return 0;
}

int cmd_threshold_scan(const std::string& config_path) {
  const json j = load_config(config_path);
  const auto nu_list = j.at("nu_list").get<std::vector<double>>();
  const double amp_lo = j.at("amp_lo").get<double>();
  const double amp_hi = j.at("amp_hi").get<double>();
  const double width = j.value("bracket_rel_width", 0.25);
  const double horizon_factor = j.value("horizon_factor", 2.0);
  const double envelope_c = j.value("envelope_c", 4.0);
  const int workers = worker_count(j);

  cblab::RunConfig base;
  base.n = j.value("n", 128);
  base.k_max = j.value("k_max", 16);
  base.dt = j.value("dt", 0.01);
  base.sample_interval = j.value("sample_interval", 10);
  base.init_shape = j.value("init_shape", std::string("quartic"));
  base.seed = j.value("seed", std::uint64_t(0));
  if (j.contains("modes")) {
    for (const auto& m : j.at("modes")) {
      cblab::InitMode im;
      im.k = m.at("k").get<int>();
      if (m.contains("amp_psi")) im.amp_psi = parse_complex(m.at("amp_psi"));
      if (m.contains("amp_theta"))
        im.amp_theta = parse_complex(m.at("amp_theta"));
      base.modes.push_back(im);
    }
  } else {
    base.modes.push_back({1, 1.0, 1.0});
    base.modes.push_back({2, 0.5, 0.5});
  }
  cblab::ChebGrid grid = cblab::build_grid(base.n);

  // The amplitude knob scales both data norms; "envelope" ties the
  // temperature data to amplitude * nu^{5/12} instead, so that the fitted
  // exponent reads directly against the nu^{1/2} velocity envelope.
  const std::string tie = j.value("temperature_tie", std::string("equal"));
  if (tie != "equal" && tie != "envelope")
    throw std::invalid_argument("temperature_tie must be equal or envelope");

  auto classify = [&](double nu, double amplitude) {
    cblab::RunConfig cfg = base;
    cfg.nu = nu;
    cfg.mu = nu;
    cfg.amp_mode = "raw";
    cfg.amp_velocity = amplitude;
    cfg.amp_temperature =
        tie == "equal" ? amplitude : amplitude * std::pow(nu, 5.0 / 12.0);
    cfg.T = horizon_factor / std::sqrt(nu);
    auto r = cblab::run(grid, cfg);
    if (r.halt != cblab::HaltReason::completed) return false;
    const double sum_e = r.ledger.sum_E();
    const double bound = envelope_c * r.ledger.initial_data_bound_E();
    return sum_e <= bound;
  };

  cblab::ThresholdScanResult result;
  if (workers <= 1 || nu_list.size() == 1) {
    result = cblab::threshold_scan(nu_list, amp_lo, amp_hi, classify, width);
  } else {
    // Scans for distinct nu values are independent; merge in nu order.
    std::vector<std::future<cblab::ThresholdScanResult>> futures;
    for (double nu : nu_list)
      futures.push_back(std::async(std::launch::async, [&, nu] {
        return cblab::threshold_scan({nu}, amp_lo, amp_hi, classify, width);
      }));
    for (auto& f : futures) {
      auto part = f.get();
      result.points.insert(result.points.end(), part.points.begin(),
                           part.points.end());
      result.brackets.insert(result.brackets.end(), part.brackets.begin(),
                             part.brackets.end());
    }
    std::vector<std::pair<double, double>> pts;
    for (const auto& b : result.brackets)
      if (b.reliable) pts.push_back({b.nu, std::sqrt(b.lo * b.hi)});
    if (pts.size() >= 3) result.exponent = cblab::fit_exponent(pts);
  }

  auto os = open_output(j.at("output_csv").get<std::string>());
  cblab::write_threshold_csv(os, result);
  std::printf("threshold-scan: %zu runs across %zu nu values\n",
              result.points.size(), nu_list.size());
  return 0;
}

int cmd_audit_energy(const std::string& config_path) {
  const json j = load_config(config_path);
  std::ifstream is(j.at("ledger_csv").get<std::string>());
  if (!is) throw std::invalid_argument("cannot open ledger csv");
  cblab::LedgerView view = cblab::read_ledger_csv(is);
  auto rows = cblab::audit_bootstrap(view);
  auto os = open_output(j.at("output_csv").get<std::string>());
  cblab::write_audit_csv(os, rows);
  if (j.contains("eps0") && j.contains("eps1")) {
    auto check = cblab::main_estimate_check(view, j.at("eps0").get<double>(),
                                            j.at("eps1").get<double>(),
                                            j.value("envelope_c", 4.0));
    std::printf("audit-energy: sum_E=%.12g (bound %.12g, %s) sum_H=%.12g "
                "(bound %.12g, %s)\n",
                check.sum_E, check.bound_E, check.pass_E ? "pass" : "fail",
                check.sum_H, check.bound_H, check.pass_H ? "pass" : "fail");
  } else {
    std::printf("audit-energy: %zu inequality rows\n", rows.size());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cblab: spectral lab for Boussinesq perturbations of Couette "
               "flow in a channel"};
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* desc;
    int (*fn)(const std::string&);
  };
  const Sub subs[] = {
      {"resolvent-sweep", "sweep the shifted-operator solves and norm ratios",
       cmd_resolvent_sweep},
      {"decay-fit", "fit enhanced-dissipation decay rates", cmd_decay_fit},
      {"verify-estimates", "measure forced space-time estimate constants",
       cmd_verify_estimates},
      {"simulate", "run the nonlinear solver and emit the energy ledger",
       cmd_simulate},
      {"threshold-scan", "bisect the stability threshold over nu",
       cmd_threshold_scan},
      {"audit-energy", "re-audit a ledger CSV", cmd_audit_energy},
  };

  std::string configs[6];
  int which = -1;
  for (int i = 0; i < 6; ++i) {
    auto* sub = app.add_subcommand(subs[i].name, subs[i].desc);
    sub->add_option("-c,--config", configs[i], "JSON config file")->required();
    sub->callback([&which, i] { which = i; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::endl;
    return 1;
  }

  try {
    return subs[which].fn(configs[which]);
  } catch (const cblab::numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << std::endl;
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }
}
