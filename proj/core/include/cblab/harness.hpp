#pragma once

#include "cblab/chebyshev.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

namespace cblab {

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double ci_half_width = 0.0;  // ~95%: two standard errors of the slope
};

/// Ordinary least squares on (log x, log y). Requires at least 3 strictly
/// positive points.
ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& pts);

struct ThresholdPoint {
  double nu = 0.0;
  double amplitude = 0.0;
  bool stable = false;
};

struct ThresholdBracket {
  double nu = 0.0;
  double lo = 0.0;  // largest amplitude observed stable
  double hi = 0.0;  // smallest amplitude observed departed
  bool reliable = true;
};

struct ThresholdScanResult {
  std::vector<ThresholdPoint> points;
  std::vector<ThresholdBracket> brackets;
  std::optional<ExponentFit> exponent;  // log(critical amp) vs log(nu)
};

/// Geometric bisection of the stable/departed boundary per nu value, down to
/// the requested relative bracket width. The classifier is injected so scans
/// can run against the simulator or against synthetic models. Brackets whose
/// endpoints do not classify as (stable, departed), or whose evaluations
/// violate monotonicity in amplitude, are flagged unreliable rather than
/// hidden. The exponent fit uses the geometric bracket midpoints of the
/// reliable brackets (skipped when fewer than 3).
ThresholdScanResult threshold_scan(
    const std::vector<double>& nu_list, double amp_lo, double amp_hi,
    const std::function<bool(double nu, double amplitude)>& stable_classifier,
    double bracket_rel_width = 0.25);

void write_threshold_csv(std::ostream& os, const ThresholdScanResult& r);

/// Deterministic smooth forcing profile
///   g(t, y) = 1_{t <= t_cutoff} sum_m (a_m cos(w_m t) + b_m sin(w_m t))
///             sin(m pi (y+1)/2)
/// with seeded complex coefficients. Smooth in y and resolution-independent,
/// so runs at different grid sizes see the same continuum forcing.
struct RandomSmoothForcing {
  int modes = 0;
  double t_cutoff = 0.0;  // <= 0 means no cutoff
  std::vector<Complex> ca, cb;
  std::vector<double> omega;

  static RandomSmoothForcing make(int modes, double amplitude,
                                  double t_cutoff, std::uint64_t seed);
  Vec eval(const ChebGrid& grid, double t) const;
  std::function<Vec(double)> bind(const ChebGrid& grid) const;
};

/// Deterministic smooth field sum_m c_m sin(m pi (y+1)/2) (vanishes at the
/// walls); the same coefficients evaluated on a finer grid give the same
/// continuum function.
struct RandomSmoothField {
  std::vector<Complex> c;

  static RandomSmoothField make(int modes, std::uint64_t seed);
  Vec eval(const ChebGrid& grid) const;
};

/// Critical-layer probe forcing: a Gaussian of width ell centered at y0,
/// rotating in time at the local drift frequency k y0. Concentrating the
/// forcing at the layer scale ell = (mu/|k|)^{1/3} drives the sharp regime
/// of the space-time estimates, which is what makes the measured implied
/// constants comparable across mu and k.
struct ResonantForcing {
  double y0 = 0.0;
  double ell = 0.1;
  double k = 1.0;

  Vec eval(const ChebGrid& grid, double t) const;
  std::function<Vec(double)> bind(const ChebGrid& grid) const;
};

}  // namespace cblab
