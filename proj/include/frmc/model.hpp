#pragma once

/**
 * @file model.hpp
 * Forward SDE models dX = a(t,X) dt + sigma(t,X) dW and the coefficients of
 * their reverse system (Y, weight).
 *
 * For b = sigma sigma^T and a horizon T the reverse system started at time 0 is
 *
 *   alpha^i(s,y) = sum_j d b^{ij}/d y^j (T-s, y) - a^i(T-s, y)
 *   sigma~(s,y)  = sigma(T-s, y)
 *   c(s,y)       = 1/2 sum_{i,j} d^2 b^{ij}/d y^i d y^j (T-s, y) - sum_i d a^i/d y^i (T-s, y)
 *
 * and the weight is exp(int_0^s c(u, Y(u)) du). The reverse system is an
 * ordinary forward-in-time SDE and is simulated like any other.
 *
 * Matrices are stored row-major; diffusion(t, x) is d x m.
 */

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frmc/rng.hpp"

namespace frmc {

using DriftFn = std::function<void(double t, std::span<const double> x, std::span<double> out)>;
using DiffusionFn = std::function<void(double t, std::span<const double> x, std::span<double> out)>;

/// Contracted derivatives of b = sigma sigma^T and a needed by the reverse coefficients.
struct DerivativeBundle {
  std::vector<double> div_b;  ///< div_b[i] = sum_j d b^{ij} / d y^j
  double hess_b = 0.0;        ///< sum_{i,j} d^2 b^{ij} / d y^i d y^j
  double div_a = 0.0;         ///< sum_i d a^i / d y^i
};

using DerivativeFn = std::function<void(double t, std::span<const double> x, DerivativeBundle& out)>;

/// Exact transition x(t0) -> x(t1); draws its Gaussians from `rng`.
using ExactSampler =
    std::function<void(double t0, double t1, std::span<const double> x, RandomStream& rng, std::span<double> out)>;

enum class DerivativeSource { analytic, finite_difference };

struct ModelSpec {
  std::string name;
  std::size_t dim = 0;
  std::size_t noise_dim = 0;
  DriftFn drift;
  DiffusionFn diffusion;
  DerivativeSource derivatives = DerivativeSource::finite_difference;
  DerivativeFn analytic_derivatives;
  bool autonomous = true;
  // Optional exact samplers, registered by built-ins whose transitions are Gaussian.
  // The reverse sampler assumes an autonomous model (it does not see the horizon).
  ExactSampler exact_forward;
  ExactSampler exact_reverse;
  std::optional<double> constant_weight_rate;

  /// Throws ConfigError when callbacks are missing or dimensions are zero.
  void validate() const;

  std::vector<double> drift_at(double t, std::span<const double> x) const;
  /// d x m row-major; throws ValidationError on non-finite output.
  std::vector<double> diffusion_at(double t, std::span<const double> x) const;
};

/// Reverse dynamics on [0, horizon].
struct ReverseSpec {
  double horizon = 0.0;
  std::size_t dim = 0;
  std::size_t noise_dim = 0;
  /// Writes alpha(s, y) into drift_out and returns c(s, y) in rate.
  std::function<void(double s, std::span<const double> y, std::span<double> drift_out, double& rate)> drift_and_rate;
  DiffusionFn rev_diffusion;
  ExactSampler exact;
  std::optional<double> constant_weight_rate;

  std::vector<double> rev_drift(double s, std::span<const double> y) const;
  std::vector<double> diffusion_at(double s, std::span<const double> y) const;
  double weight_rate(double s, std::span<const double> y) const;
};

/// Finite-difference step sizes. A zero step selects the per-coordinate default
/// eps^{1/3} max(1,|x_i|) for first derivatives and eps^{1/4} max(1,|x_i|) for second.
struct FdSteps {
  double first = 0.0;
  double second = 0.0;
};

/// Central-difference derivative bundle of b and a at (t, x).
DerivativeBundle fd_derivatives(const ModelSpec& model, double t, std::span<const double> x, FdSteps steps = {});

/// Same bundle with one absolute step h_fd used for every stencil.
DerivativeBundle fd_derivatives(const ModelSpec& model, double t, std::span<const double> x, double h_fd);

/// Derivative bundle from whichever supplier the model selects.
DerivativeBundle model_derivatives(const ModelSpec& model, double t, std::span<const double> x);

/// Reverse coefficients for horizon T (> 0). Time is always mapped through T - s.
ReverseSpec reverse_coefficients(const ModelSpec& model, double T);

// --- built-in models ---------------------------------------------------------

/// d-dimensional standard Brownian motion: a = 0, sigma = I.
ModelSpec brownian_motion(std::size_t d);

/// One-dimensional Ornstein-Uhlenbeck process dX = -alpha X dt + dW (alpha > 0).
ModelSpec ornstein_uhlenbeck(double alpha);

struct HestonParams {
  double mu = 0.05;
  double gamma = -0.15;
  double beta = -0.045;
  double xi = 0.3;
  double rho = -0.7;
};

/// Heston model X = (S, v): dS = mu S dt + sqrt(v) S dB1,
/// dv = (gamma v + beta) dt + xi sqrt(v) (rho dB1 + sqrt(1-rho^2) dB2).
/// sqrt(v) is evaluated as sqrt(max(v, 0)) (full truncation).
ModelSpec heston(const HestonParams& params);

}  // namespace frmc
