#include "cblab/energy_ledger.hpp"

#include "cblab/simulation.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace cblab;
using cblab::test::rel_diff;

namespace {

RunConfig small_run_config(int n) {
  RunConfig cfg;
  cfg.n = n;
  cfg.k_max = 3;
  cfg.nu = 1e-2;
  cfg.mu = 1e-2;
  cfg.eps0 = 0.4;
  cfg.eps1 = 0.4;
  cfg.modes = {{0, {0.2, 0.0}, {0.2, 0.0}},
               {1, {1.0, 0.3}, {0.8, 0.0}},
               {2, {0.0, 0.5}, {0.2, 0.1}}};
  cfg.T = 1.0;
  cfg.dt = 5e-3;
  cfg.sample_interval = 10;
  return cfg;
}

}  // namespace

TEST_CASE("zero state sampled repeatedly keeps all functionals at zero") {
  ChebGrid g = build_grid(16);
  ChannelState s = ChannelState::zero(g, 2);
  EnergyLedger led(g, 2, 1e-2, 1e-2);
  led.record_initial(s);
  for (int i = 0; i < 5; ++i) led.accumulate(s, 0.1);
  for (int k = 0; k <= 2; ++k) {
    CHECK(led.E(k) == 0.0);
    CHECK(led.H(k) == 0.0);
  }
}

TEST_CASE("constant single mode: E_0 equals its norm for any horizon") {
  ChebGrid g = build_grid(24);
  ChannelState s = ChannelState::zero(g, 2);
  Vec w(g.n);
  for (int j = 0; j < g.n; ++j) w[j] = g.nodes[j];  // ||y|| = sqrt(2/3)
  s.omega[0] = w / std::sqrt(2.0 / 3.0);            // unit L2 norm
  EnergyLedger led(g, 2, 1e-2, 1e-2);
  led.record_initial(s);
  for (int i = 0; i < 7; ++i) led.accumulate(s, 0.5);
  CHECK(rel_diff(led.E(0), 1.0) <= 1e-12);
}

TEST_CASE("accumulate with dt = 0 is idempotent on the integrals") {
  ChebGrid g = build_grid(24);
  Rng rng(3);
  ChannelState s = ChannelState::zero(g, 1);
  s.omega[1] = cblab::test::random_complex_field(g, rng);
  s.u1[1] = cblab::test::random_complex_field(g, rng);
  EnergyLedger led(g, 1, 1e-2, 1e-2);
  led.record_initial(s);
  led.accumulate(s, 0.3);
  const double e_before = led.E(1);
  led.accumulate(s, 0.0);
  led.accumulate(s, 0.0);
  CHECK(led.E(1) == e_before);
}

TEST_CASE("ledger values equal the offline recomputation from snapshots") {
  ChebGrid g = build_grid(48);
  RunConfig cfg = small_run_config(g.n);
  std::vector<double> times;
  std::vector<ChannelState> snaps;
  auto r = run(g, cfg, [&](const ChannelState& s) {
    times.push_back(s.time);
    snaps.push_back(s);
  });
  REQUIRE(r.halt == HaltReason::completed);
  const LedgerView view = r.ledger.view();

  for (int k = 0; k <= cfg.k_max; ++k) {
    Trajectory w_traj{OperatorKind::vorticity, k, cfg.nu, &g, times, {}, 0.0};
    Trajectory u1_traj = w_traj, u2_traj = w_traj, th_traj = w_traj;
    for (const auto& s : snaps) {
      w_traj.fields.push_back(s.omega[k]);
      u1_traj.fields.push_back(s.u1[k]);
      u2_traj.fields.push_back(s.u2[k]);
      th_traj.fields.push_back(s.theta[k]);
    }
    // sup-in-time components
    const double w_sup =
        k == 0 ? spacetime_norm(w_traj, 0, 2)
               : spacetime_norm(w_traj, 0, 2,
                                [](double y) { return 1.0 - std::abs(y); });
    CHECK(rel_diff(w_sup, view.w_weighted_sup[k]) <= 1e-10);
    const double th_sup = spacetime_norm(th_traj, 0, 2);
    CHECK(rel_diff(th_sup, view.theta_supl2[k]) <= 1e-10);
    // L2-in-time components combine the two velocity components
    const double u_l2 = std::sqrt(std::pow(spacetime_norm(u1_traj, 2, 2), 2) +
                                  std::pow(spacetime_norm(u2_traj, 2, 2), 2));
    CHECK(rel_diff(u_l2, view.u_l2l2[k]) <= 1e-10);
    const double w_l2 = spacetime_norm(w_traj, 2, 2);
    CHECK(rel_diff(w_l2, view.w_l2l2[k]) <= 1e-10);
    const double th_l2 = spacetime_norm(th_traj, 2, 2);
    CHECK(rel_diff(th_l2, view.theta_l2l2[k]) <= 1e-10);
    // the pointwise velocity sup is not a product norm; recompute directly
    double u_sup = 0.0;
    for (const auto& s : snaps)
      for (int j = 0; j < g.n; ++j)
        u_sup = std::max(u_sup, std::sqrt(std::norm(s.u1[k][j]) +
                                          std::norm(s.u2[k][j])));
    CHECK(rel_diff(u_sup, view.u_supinf[k]) <= 1e-10);
  }
}

TEST_CASE("extending the horizon never decreases the functionals") {
  ChebGrid g = build_grid(48);
  RunConfig cfg = small_run_config(g.n);
  auto r1 = run(g, cfg);
  RunConfig longer = cfg;
  longer.T = 2.0;
  auto r2 = run(g, longer);
  for (int k = 0; k <= cfg.k_max; ++k) {
    CHECK(r2.ledger.E(k) >= r1.ledger.E(k) * (1.0 - 1e-12));
    CHECK(r2.ledger.H(k) >= r1.ledger.H(k) * (1.0 - 1e-12));
  }
}

TEST_CASE("reality symmetry: E and H are even in k") {
  ChebGrid g = build_grid(24);
  ChannelState s = ChannelState::zero(g, 2);
  Rng rng(9);
  s.omega[2] = cblab::test::random_complex_field(g, rng);
  s.theta[2] = cblab::test::random_complex_field(g, rng);
  EnergyLedger led(g, 2, 1e-2, 1e-2);
  led.record_initial(s);
  led.accumulate(s, 0.25);
  CHECK(led.E(-2) == led.E(2));
  CHECK(led.H(-2) == led.H(2));
}

TEST_CASE("audit_bootstrap: zero ledger gives zero implied constants") {
  ChebGrid g = build_grid(16);
  EnergyLedger led(g, 3, 1e-2, 1e-3);
  led.record_initial(ChannelState::zero(g, 3));
  auto rows = audit_bootstrap(led.view());
  CHECK(rows.size() == 2 + 2 * 3);
  for (const auto& r : rows) CHECK(r.implied_c == 0.0);
}

TEST_CASE("audit rows reproduce by direct arithmetic on a linear-only run") {
  ChebGrid g = build_grid(48);
  RunConfig cfg = small_run_config(g.n);
  cfg.nonlinear = false;
  auto r = run(g, cfg);
  const LedgerView v = r.ledger.view();
  auto rows = audit_bootstrap(v);

  auto E = [&](int l) {
    return std::abs(l) <= v.k_max ? v.E[std::abs(l)] : 0.0;
  };
  auto H = [&](int l) {
    return std::abs(l) <= v.k_max ? v.H[std::abs(l)] : 0.0;
  };
  for (const auto& row : rows) {
    if (row.inequality != "E_k") continue;
    const int k = row.k;
    double conv = 0.0;
    for (int l = -v.k_max; l <= v.k_max; ++l)
      if (std::abs(k - l) <= v.k_max) conv += E(l) * E(k - l);
    const double term1 = conv / std::sqrt(v.nu);
    const double term2 =
        std::pow(v.nu, -0.25) * std::pow(v.mu, -1.0 / 6.0) * H(k);
    const double data = v.win_l2[k] + v.dywin_l2[k] / double(k);
    const double expect =
        std::max(0.0, (v.E[k] - data)) / (term1 + term2);
    CHECK(rel_diff(row.implied_c, expect) <= 1e-10);
  }
}

TEST_CASE("audit homogeneity: scaling fields scales terms exactly") {
  ChebGrid g = build_grid(48);
  RunConfig cfg = small_run_config(g.n);
  auto r = run(g, cfg);
  const double a = 3.5;
  auto rows = audit_bootstrap(r.ledger.view());
  auto scaled_rows = audit_bootstrap(r.ledger.scaled_by(a).view());
  REQUIRE(rows.size() == scaled_rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(rel_diff(scaled_rows[i].lhs, a * rows[i].lhs) <= 1e-10);
    CHECK(rel_diff(scaled_rows[i].data_term, a * rows[i].data_term) <= 1e-10);
    // convolution terms are quadratic in the fields
    if (rows[i].term1 > 0.0)
      CHECK(rel_diff(scaled_rows[i].term1, a * a * rows[i].term1) <= 1e-10);
    if (rows[i].inequality == "E_k" && rows[i].term2 > 0.0)
      CHECK(rel_diff(scaled_rows[i].term2, a * rows[i].term2) <= 1e-10);
  }
}

TEST_CASE("main_estimate_check sums and tail indicators") {
  ChebGrid g = build_grid(16);
  EnergyLedger led(g, 2, 1e-2, 1e-3);
  ChannelState s = ChannelState::zero(g, 2);
  Rng rng(31);
  s.omega[1] = cblab::test::random_complex_field(g, rng);
  s.theta[2] = cblab::test::random_complex_field(g, rng);
  led.record_initial(s);
  led.accumulate(s, 0.5);
  const LedgerView v = led.view();
  auto rep = main_estimate_check(v, 1.0, 1.0, 4.0);
  CHECK(rel_diff(rep.sum_E, v.E[0] + 2 * v.E[1] + 2 * v.E[2]) <= 1e-12);
  CHECK(rel_diff(rep.sum_H, v.H[0] + 2 * v.H[1] + 2 * v.H[2]) <= 1e-12);
  CHECK(rep.bound_E == doctest::Approx(4.0 * std::sqrt(1e-3)));
  CHECK(rep.tail_E == doctest::Approx(2 * v.E[2] / rep.sum_E));

  EnergyLedger zero(g, 2, 1e-2, 1e-3);
  zero.record_initial(ChannelState::zero(g, 2));
  auto zrep = main_estimate_check(zero.view(), 1.0, 1.0, 4.0);
  CHECK(zrep.sum_E == 0.0);
  CHECK(zrep.pass_E);
  CHECK(zrep.pass_H);
}

TEST_CASE("ledger CSV round trip reproduces the audit to the last bit") {
  ChebGrid g = build_grid(48);
  RunConfig cfg = small_run_config(g.n);
  auto r = run(g, cfg);
  const LedgerView v = r.ledger.view();

  std::stringstream csv;
  write_ledger_csv(csv, v);
  LedgerView back = read_ledger_csv(csv);
  CHECK(back.nu == v.nu);
  CHECK(back.mu == v.mu);
  CHECK(back.k_max == v.k_max);

  auto rows_a = audit_bootstrap(v);
  auto rows_b = audit_bootstrap(back);
  REQUIRE(rows_a.size() == rows_b.size());
  for (size_t i = 0; i < rows_a.size(); ++i) {
    CHECK(rel_diff(rows_a[i].implied_c, rows_b[i].implied_c) <= 1e-12);
    CHECK(rel_diff(rows_a[i].lhs, rows_b[i].lhs) <= 1e-12);
  }
}

TEST_CASE("read_ledger_csv rejects malformed input") {
  std::stringstream bad("k,w\n1,2\n");
  CHECK_THROWS_AS(read_ledger_csv(bad), std::invalid_argument);
}
