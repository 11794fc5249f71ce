#include "cblab/resolvent.hpp"

#include "cblab/rng.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <ostream>
#include <tuple>

namespace cblab {

namespace {

Mat shifted_matrix(const ModeOperator& op, double lambda) {
  if (op.kind != OperatorKind::temperature)
    throw std::invalid_argument("solve_resolvent: temperature operator required");
  const int n = op.grid->n;
  Mat a = op.matrix;
  const Complex shift(0.0, -double(op.k) * lambda);
  for (int j = 1; j < n - 1; ++j) a(j, j) += shift;
  return a;
}

}  // namespace

ModeField solve_resolvent(const ModeOperator& op, double lambda,
                          const ModeField& f) {
  const ChebGrid& g = *op.grid;
  if (f.values.size() != g.n)
    throw std::invalid_argument("solve_resolvent: rhs size mismatch");
  Mat a = shifted_matrix(op, lambda);
  Vec b = f.values;
  b[0] = 0.0;
  b[g.n - 1] = 0.0;
  Eigen::PartialPivLU<Mat> lu(a);
  Vec theta = lu.solve(b);
  const double resid = (a * theta - b).norm();
  const double scale = std::max(1.0, b.norm());
  if (!std::isfinite(resid) || resid > 1e-6 * scale) {
    Eigen::JacobiSVD<Mat> svd(a);
    const double cond = svd.singularValues()(0) /
                        svd.singularValues()(svd.singularValues().size() - 1);
    throw numerical_error("solve_resolvent: solve failed, cond estimate " +
                          std::to_string(cond));
  }
  return ModeField{op.k, std::move(theta)};
}

ResolventSample resolvent_ratios(const ChebGrid& grid, int k, double mu,
                                 double lambda, const ModeField& f,
                                 const Hminus1Solver* hm1) {
  ResolventSample s;
  s.k = k;
  s.mu = mu;
  s.lambda = lambda;
  s.norm_f = weighted_l2_norm(grid, f);
  if (s.norm_f == 0.0) return s;

  ModeOperator op =
      assemble_mode_operator(grid, k, FluidParams{mu, mu}, OperatorKind::temperature);
  ModeField theta = solve_resolvent(op, lambda, f);

  Vec dtheta = grid.d1 * theta.values;
  Vec shifted(grid.n);
  for (int j = 0; j < grid.n; ++j)
    shifted[j] = (grid.nodes[j] - lambda) * theta.values[j];

  s.norm_theta = l2_norm(grid, theta.values);
  s.norm_dtheta = l2_norm(grid, dtheta);
  s.norm_shift = l2_norm(grid, shifted);

  const double ak = std::abs(double(k));
  s.ratio_l2 = (std::pow(mu, 2.0 / 3.0) * std::cbrt(ak) * s.norm_dtheta +
                std::cbrt(mu * ak * ak) * s.norm_theta + ak * s.norm_shift) /
               s.norm_f;
  const double fh = hm1 ? hm1->norm(f.values) : hminus1_norm(grid, f);
  s.ratio_hm1 =
      (mu * s.norm_dtheta + std::pow(mu, 2.0 / 3.0) * std::cbrt(ak) * s.norm_theta) /
      fh;
  return s;
}

double gearhart_pruss_gap(const ModeOperator& op,
                          const std::vector<double>& lambda_grid) {
  if (lambda_grid.empty())
    throw std::invalid_argument("gearhart_pruss_gap: empty lambda grid");
  const ChebGrid& g = *op.grid;
  const int m = g.n - 2;
  // Symmetrize with sqrt of the quadrature weights so singular values are
  // taken in the discrete L2 norm, not the raw nodal one.
  RVec sq(m), isq(m);
  for (int j = 0; j < m; ++j) {
    sq[j] = std::sqrt(g.weights[j + 1]);
    isq[j] = 1.0 / sq[j];
  }
  Mat base = op.interior();
  base = sq.asDiagonal().toDenseMatrix().cast<Complex>() * base *
         isq.asDiagonal().toDenseMatrix().cast<Complex>();
  double gap = std::numeric_limits<double>::infinity();
  for (double lambda : lambda_grid) {
    Mat a = base;
    const Complex shift(0.0, -double(op.k) * lambda);
    for (int j = 0; j < m; ++j) a(j, j) += shift;
    Eigen::JacobiSVD<Mat> svd(a);
    gap = std::min(gap, double(svd.singularValues()(m - 1)));
  }
  return gap;
}

std::vector<ResolventSample> sweep_resolvent(const ChebGrid& grid,
                                             const SweepConfig& config) {
  if (config.k_list.empty() || config.mu_list.empty() ||
      config.lambda_list.empty() || config.trials < 1)
    throw std::invalid_argument("sweep_resolvent: empty parameter lists");
  Hminus1Solver hm1(grid);
  std::vector<ResolventSample> out;
  std::uint64_t point_index = 0;
  for (int k : config.k_list) {
    for (double mu : config.mu_list) {
      for (double lambda : config.lambda_list) {
        Rng rng(config.seed + point_index);
        ++point_index;
        for (int t = 0; t < config.trials; ++t) {
          Vec f(grid.n);
          for (int j = 0; j < grid.n; ++j)
            f[j] = Complex(rng.normal(), rng.normal());
          ModeField ff{k, f};
          const double nf = weighted_l2_norm(grid, ff);
          ff.values /= nf;
          ResolventSample s;
          try {
            s = resolvent_ratios(grid, k, mu, lambda, ff, &hm1);
          } catch (const numerical_error&) {
            // Leave the failed point as a zero sample; the sweep continues.
            s.k = k;
            s.mu = mu;
            s.lambda = lambda;
          }
          s.trial = t;
          out.push_back(s);
        }
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const ResolventSample& a,
                                       const ResolventSample& b) {
    return std::tie(a.k, a.mu, a.lambda, a.trial) <
           std::tie(b.k, b.mu, b.lambda, b.trial);
  });
  return out;
}

void write_resolvent_csv(std::ostream& os,
                         const std::vector<ResolventSample>& samples) {
  os << "# cblab-csv v1 resolvent-sweep\n";
  os << "k,mu,lambda,trial,norm_f,norm_theta,norm_dtheta,norm_shift,ratio_l2,"
        "ratio_hm1\n";
  char buf[512];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof buf,
                  "%d,%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  s.k, s.mu, s.lambda, s.trial, s.norm_f, s.norm_theta,
                  s.norm_dtheta, s.norm_shift, s.ratio_l2, s.ratio_hm1);
    os << buf;
  }
}

}  // namespace cblab
