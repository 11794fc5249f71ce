#pragma once

#include "cblab/chebyshev.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace cblab {

struct ChannelState;  // simulation.hpp

/// The per-mode numbers the bootstrap audit consumes: the space-time
/// functionals E_k, H_k and the initial-data norms, k = 0..k_max.
/// Values at negative wavenumbers follow from reality: E_{-k} = E_k.
struct LedgerView {
  double nu = 0.0;
  double mu = 0.0;
  int k_max = 0;
  double horizon = 0.0;
  std::vector<double> E, H;
  std::vector<double> win_l2, dywin_l2, thetain_l2;
  // Per-component values (E = sum of the first four, H of the last two).
  std::vector<double> w_weighted_sup, u_l2l2, u_supinf, w_l2l2;
  std::vector<double> theta_supl2, theta_l2l2;
};

/// Running accumulators for the space-time functionals
///   E_k = ||(1-|y|)^{1/2} w_k||_{LinfL2} + |k| ||u_k||_{L2L2}
///         + |k|^{1/2} ||u_k||_{LinfLinf} + (nu k^2)^{1/4} ||w_k||_{L2L2}
///   H_k = |k|^{1/6} ||theta_k||_{LinfL2} + mu^{1/6}|k|^{1/2} ||theta_k||_{L2L2}
/// with E_0 = ||w_0||_{LinfL2}, H_0 = ||theta_0||_{LinfL2}. Sup components
/// update by max over samples, L2-in-time components by trapezoid.
/// All values are horizon-truncated: they cover the sampled times only.
class EnergyLedger {
 public:
  EnergyLedger(const ChebGrid& grid, int k_max, double nu, double mu);

  /// Capture initial-data norms and the t = 0 sample.
  void record_initial(const ChannelState& state);

  /// Fold one sampled state in. dt_since_last = 0 leaves the integral
  /// accumulators unchanged.
  void accumulate(const ChannelState& state, double dt_since_last);

  double E(int k) const;
  double H(int k) const;
  double sum_E() const;  // E_0 + 2 sum_{k>=1} E_k
  double sum_H() const;

  int k_max() const { return k_max_; }
  double nu() const { return nu_; }
  double mu() const { return mu_; }
  double horizon() const { return time_; }

  double initial_data_bound_E() const;  // sum_k ||w_in|| + |k|^{-1}||d_y w_in||
  double initial_data_bound_H() const;  // ||theta_in,0|| + sum |k|^{1/6}||theta_in,k||

  /// Copy with all field amplitudes scaled by a > 0 (norms scale by a);
  /// used for the audit homogeneity checks.
  EnergyLedger scaled_by(double a) const;

  LedgerView view() const;

 private:
  const ChebGrid* grid_;
  int k_max_;
  double nu_, mu_;
  double time_ = 0.0;
  bool initialized_ = false;

  struct ModeAcc {
    double sup_w_weighted_sq = 0.0;  // plain ||w_0||^2 for k = 0
    double int_u_sq = 0.0;
    double sup_u_inf = 0.0;
    double int_w_sq = 0.0;
    double sup_theta_sq = 0.0;
    double int_theta_sq = 0.0;
    double prev_u_sq = 0.0, prev_w_sq = 0.0, prev_theta_sq = 0.0;
    double win_l2 = 0.0, dywin_l2 = 0.0, thetain_l2 = 0.0;
  };
  std::vector<ModeAcc> acc_;
};

struct AuditRow {
  std::string inequality;  // E_k, E_0, H_0, H_k_low, H_k_high
  int k = 0;
  double lhs = 0.0;
  double data_term = 0.0;
  double term1 = 0.0;  // convolution term with its nu/mu prefactor
  double term2 = 0.0;  // second structural term (0 when the inequality has none)
  double implied_c = 0.0;
};

/// Evaluate both sides of each bootstrap inequality exactly as written
/// (convolution sums truncated at |l|, |k-l| <= k_max) and report the
/// minimal constant that makes it hold. The low/high frequency split is
/// applied at mu k^2 = 1.
std::vector<AuditRow> audit_bootstrap(const LedgerView& ledger);

struct MainEstimateReport {
  double sum_E = 0.0, sum_H = 0.0;
  double bound_E = 0.0, bound_H = 0.0;
  bool pass_E = true, pass_H = true;
  // Fraction of the sums carried by the |k| = k_max modes.
  double tail_E = 0.0, tail_H = 0.0;
};

/// Compare the mode sums against C eps min(nu,mu)^{1/2} and
/// C eps min(nu,mu)^{11/12} envelopes.
MainEstimateReport main_estimate_check(const LedgerView& ledger, double eps0,
                                       double eps1, double envelope_c = 4.0);

void write_ledger_csv(std::ostream& os, const LedgerView& ledger);
LedgerView read_ledger_csv(std::istream& is);
void write_audit_csv(std::ostream& os, const std::vector<AuditRow>& rows);

}  // namespace cblab
