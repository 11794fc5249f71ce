#pragma once

#include "cblab/operators.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace cblab {

/// One (mu, k, lambda) resolvent solve together with the measured norm
/// ratios against the forcing.
struct ResolventSample {
  int k = 0;
  double mu = 0.0;
  double lambda = 0.0;
  int trial = 0;
  double norm_f = 0.0;       // ||F||_{L2}
  double norm_theta = 0.0;   // ||Theta||_{L2}
  double norm_dtheta = 0.0;  // ||d_y Theta||_{L2}
  double norm_shift = 0.0;   // ||(y - lambda) Theta||_{L2}
  double ratio_l2 = 0.0;
  double ratio_hm1 = 0.0;
};

/// Solve -mu (d_yy - k^2) Theta + ik (y - lambda) Theta = F, Theta(+-1) = 0.
/// op must be a temperature-kind operator; lambda shifts its drift term.
ModeField solve_resolvent(const ModeOperator& op, double lambda,
                          const ModeField& f);

/// Solve the resolvent problem and fill the norm-ratio sample:
/// ratio_l2  = (mu^{2/3}|k|^{1/3}||d_y Theta|| + (mu k^2)^{1/3}||Theta||
///              + |k|||(y-lambda)Theta||) / ||F||_{L2}
/// ratio_hm1 = (mu ||d_y Theta|| + mu^{2/3}|k|^{1/3}||Theta||) / ||F||_{H^-1}
/// Zero forcing yields zero ratios by convention.
ResolventSample resolvent_ratios(const ChebGrid& grid, int k, double mu,
                                 double lambda, const ModeField& f,
                                 const Hminus1Solver* hm1 = nullptr);

/// Resolvent-gap proxy for the semigroup decay rate: the minimum over the
/// lambda grid of the smallest singular value of (op - ik lambda) restricted
/// to interior unknowns, measured in the quadrature-weighted norm.
double gearhart_pruss_gap(const ModeOperator& op,
                          const std::vector<double>& lambda_grid);

struct SweepConfig {
  std::vector<int> k_list;
  std::vector<double> mu_list;
  std::vector<double> lambda_list;
  int trials = 1;
  std::uint64_t seed = 0;
};

/// Random-forcing sweep over (k, mu, lambda). Deterministic for a fixed
/// seed: the generator for each grid point is seeded by seed + point index,
/// so duplicated parameter points draw fresh samples from the same
/// distribution. Output is sorted by (k, mu, lambda, trial).
std::vector<ResolventSample> sweep_resolvent(const ChebGrid& grid,
                                             const SweepConfig& config);

void write_resolvent_csv(std::ostream& os,
                         const std::vector<ResolventSample>& samples);

}  // namespace cblab
