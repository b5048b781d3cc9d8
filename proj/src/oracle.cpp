#include "frmc/oracle.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "frmc/errors.hpp"
#include "frmc/matcher.hpp"

namespace frmc {

void OUParams::validate() const {
  if (!(alpha > 0.0)) throw ValidationError("OU alpha must be positive");
  if (!(t_star > 0.0 && t_star < T)) throw ValidationError("OU times need 0 < t* < T");
  if (!(epsilon >= 0.0)) throw ValidationError("OU bandwidth must be non-negative");
}

double bb_truth(std::size_t l) {
  if (l < 2) throw ValidationError("bb_truth needs l >= 2");
  const double n = static_cast<double>(l);
  return (n + 1.0) / (6.0 * (n - 1.0));
}

double ou_sigma2(double alpha, double s) { return -std::expm1(-2.0 * alpha * s) / (2.0 * alpha); }

double ou_mean_h(const OUParams& p) {
  p.validate();
  const double B = p.epsilon * p.epsilon * std::exp(-2.0 * p.alpha * (p.T - p.t_star));
  const double v = B + ou_sigma2(p.alpha, p.T);
  const double diff = std::exp(-p.alpha * p.T) * p.x - p.y;
  return std::exp(-diff * diff / (2.0 * v)) / std::sqrt(2.0 * std::numbers::pi * v);
}

double ou_var_h(const OUParams& p) {
  p.validate();
  if (p.N < 2) throw ValidationError("ou_var_h needs N >= 2");
  if (!(p.epsilon > 0.0)) throw ValidationError("ou_var_h needs epsilon > 0");
  const double pi = std::numbers::pi;
  const double N = static_cast<double>(p.N);
  const double diff = std::exp(-p.alpha * p.T) * p.x - p.y;
  const double A = diff * diff;
  const double B = p.epsilon * p.epsilon * std::exp(-2.0 * p.alpha * (p.T - p.t_star));
  const double sT = ou_sigma2(p.alpha, p.T);
  const double sR = ou_sigma2(p.alpha, p.T - p.t_star);
  const double t1 = -(2.0 * N - 1.0) / (2.0 * pi * N * N * (B + sT)) * std::exp(-A / (B + sT));
  const double t2 = (N - 1.0) / (2.0 * pi * N * N * std::sqrt(B + sR) * std::sqrt(B + 2.0 * sT - sR)) *
                    std::exp(-A / (B + 2.0 * sT - sR));
  const double t3 = (N - 1.0) / (2.0 * pi * N * N * std::sqrt(B + sT - sR) * std::sqrt(B + sT + sR)) *
                    std::exp(-A / (B + sT + sR));
  const double t4 = std::exp(p.alpha * (p.T - p.t_star)) / (2.0 * pi * N * N * p.epsilon * std::sqrt(B + 2.0 * sT)) *
                    std::exp(-A / (B + 2.0 * sT));
  return t1 + t2 + t3 + t4;
}

double transition_density(DensityModel model, double alpha, double t, double x, double s, double y) {
  if (!(s > t)) throw ValidationError("transition_density needs s > t");
  double mean = x;
  double var = s - t;
  if (model == DensityModel::ou) {
    if (!(alpha > 0.0)) throw ValidationError("OU alpha must be positive");
    mean = std::exp(-alpha * (s - t)) * x;
    var = ou_sigma2(alpha, s - t);
  }
  const double z = y - mean;
  return std::exp(-z * z / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

EstimateResult brute_force_double_sum(const ForwardBatch& fwd, const ReverseBatch& rev, const Functional& g,
                                      const EstimatorConfig& cfg) {
  cfg.validate();
  if (fwd.dim != rev.dim || cfg.kernel.dim != fwd.dim) throw ValidationError("brute force: dimension mismatch");
  if (fwd.n_traj == 0 || rev.m_traj == 0) throw ValidationError("brute force needs non-empty batches");
  const std::size_t d = fwd.dim;
  const bool truncated = cfg.kernel.truncated();
  const double r = cfg.search_radius();
  const double r2 = r * r;
  const bool use_density = rev.randomized_start();

  double numerator = 0.0;
  double denominator = 0.0;
  std::uint64_t pairs = 0;
  std::vector<double> u(d);
  for (std::size_t m = 0; m < rev.m_traj; ++m) {
    const auto y = rev.endpoint(m);
    double num_m = 0.0;
    double den_m = 0.0;
    for (std::size_t n = 0; n < fwd.n_traj; ++n) {
      const auto x = fwd.endpoint(n);
      if (truncated && !(squared_distance(x, y) <= r2)) continue;
      ++pairs;
      for (std::size_t i = 0; i < d; ++i) u[i] = (y[i] - x[i]) / cfg.epsilon;
      const double k = kernel_profile(cfg.kernel.family, u);
      if (k == 0.0) continue;
      const PathView view(fwd.path(n), rev.path(m), rev.start(m), fwd.steps, rev.steps, d, g.uses_terminal);
      const double gv = g.eval(view);
      if (!std::isfinite(gv)) throw NumericError("functional is not finite for pair (" + std::to_string(n) + ", " +
                                                 std::to_string(m) + ")");
      num_m += gv * k;
      den_m += k;
    }
    double w = std::exp(rev.log_weight[m]);
    if (use_density) w /= rev.start_density[m];
    numerator += w * num_m;
    denominator += w * den_m;
  }
  return finalize_estimate(numerator, denominator, pairs, fwd.n_traj, rev.m_traj, d, cfg);
}

}  // namespace frmc
