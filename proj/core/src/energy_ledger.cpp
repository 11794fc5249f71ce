#include "cblab/energy_ledger.hpp"

#include "cblab/simulation.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace cblab {

EnergyLedger::EnergyLedger(const ChebGrid& grid, int k_max, double nu,
                           double mu)
    : grid_(&grid), k_max_(k_max), nu_(nu), mu_(mu), acc_(k_max + 1) {
  if (k_max < 0) throw std::invalid_argument("EnergyLedger: k_max < 0");
}

void EnergyLedger::record_initial(const ChannelState& state) {
  if (state.k_max != k_max_)
    throw std::invalid_argument("EnergyLedger: k range mismatch");
  const ChebGrid& g = *grid_;
  for (int k = 0; k <= k_max_; ++k) {
    acc_[k].win_l2 = l2_norm(g, state.omega[k]);
    acc_[k].dywin_l2 = l2_norm(g, Vec(g.d1.cast<Complex>() * state.omega[k]));
    acc_[k].thetain_l2 = l2_norm(g, state.theta[k]);
  }
  initialized_ = true;
  accumulate(state, 0.0);
}

void EnergyLedger::accumulate(const ChannelState& state,
                              double dt_since_last) {
  if (!initialized_)
    throw std::logic_error("EnergyLedger: record_initial first");
  if (state.k_max != k_max_)
    throw std::invalid_argument("EnergyLedger: k range mismatch");
  const ChebGrid& g = *grid_;
  const int n = g.n;
  for (int k = 0; k <= k_max_; ++k) {
    ModeAcc& a = acc_[k];
    double w_weighted_sq = 0.0;
    double w_sq = 0.0, theta_sq = 0.0, u_sq = 0.0, u_inf = 0.0;
    for (int j = 0; j < n; ++j) {
      const double wj = g.weights[j];
      const double wk = std::norm(state.omega[k][j]);
      w_sq += wj * wk;
      w_weighted_sq +=
          wj * (k == 0 ? 1.0 : 1.0 - std::abs(g.nodes[j])) * wk;
      theta_sq += wj * std::norm(state.theta[k][j]);
      const double usq =
          std::norm(state.u1[k][j]) + std::norm(state.u2[k][j]);
      u_sq += wj * usq;
      u_inf = std::max(u_inf, std::sqrt(usq));
    }
    a.sup_w_weighted_sq = std::max(a.sup_w_weighted_sq, w_weighted_sq);
    a.sup_u_inf = std::max(a.sup_u_inf, u_inf);
    a.sup_theta_sq = std::max(a.sup_theta_sq, theta_sq);
    a.int_u_sq += 0.5 * dt_since_last * (a.prev_u_sq + u_sq);
    a.int_w_sq += 0.5 * dt_since_last * (a.prev_w_sq + w_sq);
    a.int_theta_sq += 0.5 * dt_since_last * (a.prev_theta_sq + theta_sq);
    a.prev_u_sq = u_sq;
    a.prev_w_sq = w_sq;
    a.prev_theta_sq = theta_sq;
  }
  time_ += dt_since_last;
}

double EnergyLedger::E(int k) const {
  const ModeAcc& a = acc_.at(std::abs(k));
  const double ak = std::abs(double(k));
  if (k == 0) return std::sqrt(a.sup_w_weighted_sq);
  return std::sqrt(a.sup_w_weighted_sq) + ak * std::sqrt(a.int_u_sq) +
         std::sqrt(ak) * a.sup_u_inf +
         std::pow(nu_ * ak * ak, 0.25) * std::sqrt(a.int_w_sq);
}

double EnergyLedger::H(int k) const {
  const ModeAcc& a = acc_.at(std::abs(k));
  const double ak = std::abs(double(k));
  if (k == 0) return std::sqrt(a.sup_theta_sq);
  return std::pow(ak, 1.0 / 6.0) * std::sqrt(a.sup_theta_sq) +
         std::pow(mu_, 1.0 / 6.0) * std::sqrt(ak) * std::sqrt(a.int_theta_sq);
}

double EnergyLedger::sum_E() const {
  double s = E(0);
  for (int k = 1; k <= k_max_; ++k) s += 2.0 * E(k);
  return s;
}

double EnergyLedger::sum_H() const {
  double s = H(0);
  for (int k = 1; k <= k_max_; ++k) s += 2.0 * H(k);
  return s;
}

double EnergyLedger::initial_data_bound_E() const {
  double s = acc_[0].win_l2;
  for (int k = 1; k <= k_max_; ++k)
    s += 2.0 * (acc_[k].win_l2 + acc_[k].dywin_l2 / double(k));
  return s;
}

double EnergyLedger::initial_data_bound_H() const {
  double s = acc_[0].thetain_l2;
  for (int k = 1; k <= k_max_; ++k)
    s += 2.0 * std::pow(double(k), 1.0 / 6.0) * acc_[k].thetain_l2;
  return s;
}

EnergyLedger EnergyLedger::scaled_by(double a) const {
  if (!(a > 0.0)) throw std::invalid_argument("scaled_by: a must be > 0");
  EnergyLedger out = *this;
  for (ModeAcc& m : out.acc_) {
    m.sup_w_weighted_sq *= a * a;
    m.int_u_sq *= a * a;
    m.sup_u_inf *= a;
    m.int_w_sq *= a * a;
    m.sup_theta_sq *= a * a;
    m.int_theta_sq *= a * a;
    m.prev_u_sq *= a * a;
    m.prev_w_sq *= a * a;
    m.prev_theta_sq *= a * a;
    m.win_l2 *= a;
    m.dywin_l2 *= a;
    m.thetain_l2 *= a;
  }
  return out;
}

LedgerView EnergyLedger::view() const {
  LedgerView v;
  v.nu = nu_;
  v.mu = mu_;
  v.k_max = k_max_;
  v.horizon = time_;
  v.E.resize(k_max_ + 1);
  v.H.resize(k_max_ + 1);
  v.win_l2.resize(k_max_ + 1);
  v.dywin_l2.resize(k_max_ + 1);
  v.thetain_l2.resize(k_max_ + 1);
  v.w_weighted_sup.resize(k_max_ + 1);
  v.u_l2l2.resize(k_max_ + 1);
  v.u_supinf.resize(k_max_ + 1);
  v.w_l2l2.resize(k_max_ + 1);
  v.theta_supl2.resize(k_max_ + 1);
  v.theta_l2l2.resize(k_max_ + 1);
  for (int k = 0; k <= k_max_; ++k) {
    const ModeAcc& a = acc_[k];
    v.E[k] = E(k);
    v.H[k] = H(k);
    v.win_l2[k] = a.win_l2;
    v.dywin_l2[k] = a.dywin_l2;
    v.thetain_l2[k] = a.thetain_l2;
    v.w_weighted_sup[k] = std::sqrt(a.sup_w_weighted_sq);
    v.u_l2l2[k] = std::sqrt(a.int_u_sq);
    v.u_supinf[k] = a.sup_u_inf;
    v.w_l2l2[k] = std::sqrt(a.int_w_sq);
    v.theta_supl2[k] = std::sqrt(a.sup_theta_sq);
    v.theta_l2l2[k] = std::sqrt(a.int_theta_sq);
  }
  return v;
}

namespace {

double implied_constant(double lhs, double data, double denom) {
  const double excess = lhs - data;
  if (excess <= 0.0) return 0.0;
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return excess / denom;
}

// E_{l} at any integer l, zero outside the stored range.
struct SymmetricLookup {
  const std::vector<double>& v;
  int k_max;
  double operator()(int l) const {
    const int a = std::abs(l);
    return a <= k_max ? v[a] : 0.0;
  }
};

}  // namespace

std::vector<AuditRow> audit_bootstrap(const LedgerView& led) {
  const int K = led.k_max;
  SymmetricLookup E{led.E, K}, H{led.H, K};
  std::vector<AuditRow> rows;

  // Mode-zero vorticity bound: E_0 <= ||w_in,0|| + C nu^{-1/2} sum E_l E_{-l}.
  {
    AuditRow r;
    r.inequality = "E_0";
    r.k = 0;
    r.lhs = E(0);
    r.data_term = led.win_l2[0];
    double conv = 0.0;
    for (int l = 1; l <= K; ++l) conv += 2.0 * E(l) * E(l);
    r.term1 = conv / std::sqrt(led.nu);
    r.implied_c = implied_constant(r.lhs, r.data_term, r.term1);
    rows.push_back(r);
  }
  // Mode-zero temperature bound:
  // H_0 <= ||theta_in,0|| + C mu^{-1/2} sum |l|^{-2/3} E_l H_{-l}.
  {
    AuditRow r;
    r.inequality = "H_0";
    r.k = 0;
    r.lhs = H(0);
    r.data_term = led.thetain_l2[0];
    double conv = 0.0;
    for (int l = 1; l <= K; ++l)
      conv += 2.0 * std::pow(double(l), -2.0 / 3.0) * E(l) * H(l);
    r.term1 = conv / std::sqrt(led.mu);
    r.implied_c = implied_constant(r.lhs, r.data_term, r.term1);
    rows.push_back(r);
  }

  for (int k = 1; k <= K; ++k) {
    // Vorticity bound at k != 0.
    {
      AuditRow r;
      r.inequality = "E_k";
      r.k = k;
      r.lhs = E(k);
      r.data_term = led.win_l2[k] + led.dywin_l2[k] / double(k);
      double conv = 0.0;
      for (int l = -K; l <= K; ++l)
        if (std::abs(k - l) <= K) conv += E(l) * E(k - l);
      r.term1 = conv / std::sqrt(led.nu);
      r.term2 = std::pow(led.nu, -0.25) * std::pow(led.mu, -1.0 / 6.0) * H(k);
      r.implied_c = implied_constant(r.lhs, r.data_term, r.term1 + r.term2);
      rows.push_back(r);
    }
    // Temperature bound at k != 0, split at mu k^2 = 1.
    {
      AuditRow r;
      r.k = k;
      r.lhs = H(k);
      r.data_term = std::pow(double(k), 1.0 / 6.0) * led.thetain_l2[k];
      double conv = 0.0;
      for (int l = -K; l <= K; ++l)
        if (std::abs(k - l) <= K) conv += E(l) * H(k - l);
      r.term1 = conv / std::sqrt(led.mu);
      const double pref =
          std::pow(led.nu, -0.125) * std::pow(led.mu, -5.0 / 24.0);
      if (led.mu * k * k <= 1.0) {
        r.inequality = "H_k_low";
        double restricted = 0.0;
        for (int l = -K; l <= K; ++l) {
          if (l == 0 || l == k) continue;
          const int d = std::abs(k - l);
          if (d > K || 2 * d > std::abs(k)) continue;
          restricted += E(l) * H(k - l);
        }
        r.term2 = pref * restricted;
      } else {
        r.inequality = "H_k_high";
        r.term2 = pref * E(k) * H(0);
      }
      r.implied_c = implied_constant(r.lhs, r.data_term, r.term1 + r.term2);
      rows.push_back(r);
    }
  }
  return rows;
}

MainEstimateReport main_estimate_check(const LedgerView& led, double eps0,
                                       double eps1, double envelope_c) {
  MainEstimateReport r;
  r.sum_E = led.E[0];
  r.sum_H = led.H[0];
  for (int k = 1; k <= led.k_max; ++k) {
    r.sum_E += 2.0 * led.E[k];
    r.sum_H += 2.0 * led.H[k];
  }
  const double m = std::min(led.nu, led.mu);
  r.bound_E = envelope_c * eps0 * std::sqrt(m);
  r.bound_H = envelope_c * eps1 * std::pow(m, 11.0 / 12.0);
  r.pass_E = r.sum_E <= r.bound_E;
  r.pass_H = r.sum_H <= r.bound_H;
  if (led.k_max >= 1) {
    if (r.sum_E > 0.0) r.tail_E = 2.0 * led.E[led.k_max] / r.sum_E;
    if (r.sum_H > 0.0) r.tail_H = 2.0 * led.H[led.k_max] / r.sum_H;
  }
  return r;
}

void write_ledger_csv(std::ostream& os, const LedgerView& led) {
  char buf[640];
  os << "# cblab-csv v1 energy-ledger\n";
  std::snprintf(buf, sizeof buf, "# nu=%.17g mu=%.17g k_max=%d horizon=%.17g\n",
                led.nu, led.mu, led.k_max, led.horizon);
  os << buf;
  os << "k,w_weighted_sup,u_l2l2,u_supinf,w_l2l2,theta_supl2,theta_l2l2,E,H,"
        "win_l2,dywin_l2,thetain_l2\n";
  for (int k = 0; k <= led.k_max; ++k) {
    std::snprintf(buf, sizeof buf,
                  "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%.17g\n",
                  k, led.w_weighted_sup[k], led.u_l2l2[k], led.u_supinf[k],
                  led.w_l2l2[k], led.theta_supl2[k], led.theta_l2l2[k],
                  led.E[k], led.H[k], led.win_l2[k], led.dywin_l2[k],
                  led.thetain_l2[k]);
    os << buf;
  }
}

LedgerView read_ledger_csv(std::istream& is) {
  LedgerView led;
  std::string line;
  bool have_params = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# nu=", 0) == 0) {
        if (std::sscanf(line.c_str(), "# nu=%lg mu=%lg k_max=%d horizon=%lg",
                        &led.nu, &led.mu, &led.k_max, &led.horizon) == 4)
          have_params = true;
      }
      continue;
    }
    if (line.rfind("k,", 0) == 0) continue;  // column header
    int k = 0;
    double v[11];
    if (std::sscanf(line.c_str(),
                    "%d,%lg,%lg,%lg,%lg,%lg,%lg,%lg,%lg,%lg,%lg,%lg", &k,
                    &v[0], &v[1], &v[2], &v[3], &v[4], &v[5], &v[6], &v[7],
                    &v[8], &v[9], &v[10]) != 12)
      throw std::invalid_argument("read_ledger_csv: malformed row: " + line);
    auto push = [](std::vector<double>& dst, int idx, double val) {
      if (int(dst.size()) <= idx) dst.resize(idx + 1, 0.0);
      dst[idx] = val;
    };
    push(led.w_weighted_sup, k, v[0]);
    push(led.u_l2l2, k, v[1]);
    push(led.u_supinf, k, v[2]);
    push(led.w_l2l2, k, v[3]);
    push(led.theta_supl2, k, v[4]);
    push(led.theta_l2l2, k, v[5]);
    push(led.E, k, v[6]);
    push(led.H, k, v[7]);
    push(led.win_l2, k, v[8]);
    push(led.dywin_l2, k, v[9]);
    push(led.thetain_l2, k, v[10]);
  }
  if (!have_params)
    throw std::invalid_argument("read_ledger_csv: missing parameter header");
  if (int(led.E.size()) != led.k_max + 1)
    throw std::invalid_argument("read_ledger_csv: missing rows");
  return led;
}

void write_audit_csv(std::ostream& os, const std::vector<AuditRow>& rows) {
  os << "# cblab-csv v1 bootstrap-audit\n";
  os << "inequality,k,lhs,data_term,term1,term2,implied_C\n";
  char buf[384];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.inequality.c_str(), r.k, r.lhs, r.data_term, r.term1,
                  r.term2, r.implied_c);
    os << buf;
  }
}

}  // namespace cblab
