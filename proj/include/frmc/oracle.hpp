#pragma once

// Closed-form references and an O(NM) brute-force estimator, used by tests,
// acceptance checks and the `oracle` subcommand.

#include <cstddef>

#include "frmc/estimator.hpp"

namespace frmc {

struct OUParams {
  double alpha = 1.0;
  double x = 0.0;
  double y = 0.0;
  double T = 1.0;
  double t_star = 0.5;
  double epsilon = 0.1;
  std::size_t N = 1000;

  void validate() const;
};

/// (1/6)(l+1)/(l-1): E[g | X(1) = 0] of the bridge functional for 2-d BM on l segments.
double bb_truth(std::size_t l);

/// OU variance function (1 - e^{-2 alpha s}) / (2 alpha).
double ou_sigma2(double alpha, double s);

/// Expectation of h_hat for dX = -alpha X dt + dW with g == 1 and a Gaussian kernel.
double ou_mean_h(const OUParams& p);

/// Variance of h_hat for the same setup with N = M.
double ou_var_h(const OUParams& p);

enum class DensityModel { bm, ou };

/// Transition density p(t, x, s, y); alpha is ignored for BM.
double transition_density(DensityModel model, double alpha, double t, double x, double s, double y);

/// Full double sum over all pairs, m-major and n-ascending. Applies the same
/// closed-ball restriction and cutoff logic as estimate_point / estimate_set.
EstimateResult brute_force_double_sum(const ForwardBatch& fwd, const ReverseBatch& rev, const Functional& g,
                                      const EstimatorConfig& cfg);

}  // namespace frmc
