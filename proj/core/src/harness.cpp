#include "cblab/harness.hpp"

#include "cblab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <ostream>

namespace cblab {

ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 3)
    throw std::invalid_argument("fit_exponent: need at least 3 points");
  const double n = double(pts.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : pts) {
    if (!(x > 0.0) || !(y > 0.0))
      throw std::invalid_argument("fit_exponent: points must be positive");
    const double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  const double sxx_c = sxx - sx * sx / n;
  const double sxy_c = sxy - sx * sy / n;
  const double syy_c = syy - sy * sy / n;
  if (sxx_c <= 1e-12 * std::max(1.0, sxx))
    throw std::invalid_argument("fit_exponent: degenerate abscissas");
  ExponentFit f;
  f.slope = sxy_c / sxx_c;
  f.intercept = (sy - f.slope * sx) / n;
  const double ss_res = std::max(0.0, syy_c - f.slope * sxy_c);
  f.r2 = syy_c > 0.0 ? std::clamp(1.0 - ss_res / syy_c, 0.0, 1.0) : 1.0;
  if (pts.size() > 2) {
    const double var = ss_res / (n - 2.0);
    f.ci_half_width = 2.0 * std::sqrt(var / sxx_c);
  }
  return f;
}

ThresholdScanResult threshold_scan(
    const std::vector<double>& nu_list, double amp_lo, double amp_hi,
    const std::function<bool(double, double)>& stable_classifier,
    double bracket_rel_width) {
  if (nu_list.empty())
    throw std::invalid_argument("threshold_scan: empty nu list");
  if (!(amp_lo > 0.0) || !(amp_hi > amp_lo))
    throw std::invalid_argument("threshold_scan: need 0 < amp_lo < amp_hi");

  ThresholdScanResult result;
  for (double nu : nu_list) {
    std::vector<ThresholdPoint> local;
    auto classify = [&](double amp) {
      const bool stable = stable_classifier(nu, amp);
      local.push_back({nu, amp, stable});
      return stable;
    };
    ThresholdBracket bracket;
    bracket.nu = nu;
    bracket.lo = amp_lo;
    bracket.hi = amp_hi;
    const bool lo_stable = classify(amp_lo);
    const bool hi_stable = classify(amp_hi);
    if (!lo_stable || hi_stable) {
      bracket.reliable = false;
    } else {
      while (bracket.hi / bracket.lo - 1.0 > bracket_rel_width) {
        const double mid = std::sqrt(bracket.lo * bracket.hi);
        if (classify(mid))
          bracket.lo = mid;
        else
          bracket.hi = mid;
      }
    }
    // Monotonicity diagnostic: the stable set should be downward closed.
    double max_stable = 0.0;
    double min_departed = std::numeric_limits<double>::infinity();
    for (const auto& p : local) {
      if (p.stable)
        max_stable = std::max(max_stable, p.amplitude);
      else
        min_departed = std::min(min_departed, p.amplitude);
    }
    if (max_stable > min_departed) bracket.reliable = false;
    result.points.insert(result.points.end(), local.begin(), local.end());
    result.brackets.push_back(bracket);
  }

  std::vector<std::pair<double, double>> fit_pts;
  for (const auto& b : result.brackets)
    if (b.reliable) fit_pts.push_back({b.nu, std::sqrt(b.lo * b.hi)});
  if (fit_pts.size() >= 3) result.exponent = fit_exponent(fit_pts);
  return result;
}

void write_threshold_csv(std::ostream& os, const ThresholdScanResult& r) {
  os << "# cblab-csv v1 threshold-scan\n";
  if (r.exponent) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "# exponent slope=%.17g intercept=%.17g r2=%.17g "
                  "ci_half_width=%.17g\n",
                  r.exponent->slope, r.exponent->intercept, r.exponent->r2,
                  r.exponent->ci_half_width);
    os << buf;
  }
  os << "record,nu,amplitude,stable,lo,hi,reliable\n";
  char buf[256];
  for (const auto& p : r.points) {
    std::snprintf(buf, sizeof buf, "point,%.17g,%.17g,%d,,,\n", p.nu,
                  p.amplitude, p.stable ? 1 : 0);
    os << buf;
  }
  for (const auto& b : r.brackets) {
    std::snprintf(buf, sizeof buf, "bracket,%.17g,,,%.17g,%.17g,%d\n", b.nu,
                  b.lo, b.hi, b.reliable ? 1 : 0);
    os << buf;
  }
}

RandomSmoothForcing RandomSmoothForcing::make(int modes, double amplitude,
                                              double t_cutoff,
                                              std::uint64_t seed) {
  if (modes < 1) throw std::invalid_argument("RandomSmoothForcing: modes >= 1");
  RandomSmoothForcing f;
  f.modes = modes;
  f.t_cutoff = t_cutoff;
  Rng rng(seed);
  const double scale = amplitude / std::sqrt(double(modes));
  for (int m = 0; m < modes; ++m) {
    f.ca.push_back(scale * Complex(rng.normal(), rng.normal()));
    f.cb.push_back(scale * Complex(rng.normal(), rng.normal()));
    f.omega.push_back(3.0 * rng.uniform());
  }
  return f;
}

Vec RandomSmoothForcing::eval(const ChebGrid& grid, double t) const {
  Vec out = Vec::Zero(grid.n);
  if (t_cutoff > 0.0 && t > t_cutoff) return out;
  for (int m = 0; m < modes; ++m) {
    const Complex amp =
        ca[m] * std::cos(omega[m] * t) + cb[m] * std::sin(omega[m] * t);
    for (int j = 0; j < grid.n; ++j)
      out[j] += amp * std::sin((m + 1) * M_PI * (grid.nodes[j] + 1.0) / 2.0);
  }
  return out;
}

std::function<Vec(double)> RandomSmoothForcing::bind(
    const ChebGrid& grid) const {
  return [f = *this, &grid](double t) { return f.eval(grid, t); };
}

RandomSmoothField RandomSmoothField::make(int modes, std::uint64_t seed) {
  RandomSmoothField f;
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(double(modes));
  for (int m = 0; m < modes; ++m)
    f.c.push_back(scale * Complex(rng.normal(), rng.normal()));
  return f;
}

Vec RandomSmoothField::eval(const ChebGrid& grid) const {
  Vec out = Vec::Zero(grid.n);
  for (size_t m = 0; m < c.size(); ++m)
    for (int j = 0; j < grid.n; ++j)
      out[j] += c[m] * std::sin((m + 1) * M_PI * (grid.nodes[j] + 1.0) / 2.0);
  return out;
}

Vec ResonantForcing::eval(const ChebGrid& grid, double t) const {
  Vec v(grid.n);
  const Complex rot = std::exp(Complex(0.0, -k * y0 * t));
  for (int j = 0; j < grid.n; ++j) {
    const double z = (grid.nodes[j] - y0) / ell;
    v[j] = rot * std::exp(-0.5 * z * z);
  }
  return v;
}

std::function<Vec(double)> ResonantForcing::bind(const ChebGrid& grid) const {
  return [f = *this, &grid](double t) { return f.eval(grid, t); };
}

}  // namespace cblab
