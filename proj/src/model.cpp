#include "frmc/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

#include "frmc/errors.hpp"

namespace frmc {
namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::string format_point(double s, std::span<const double> y) {
  std::ostringstream os;
  os.precision(17);
  os << "(s=" << s << ", y=[";
  for (std::size_t i = 0; i < y.size(); ++i) os << (i ? "," : "") << y[i];
  os << "])";
  return os.str();
}

// b = sigma sigma^T, d x d row-major.
void covariance_at(const ModelSpec& model, double t, std::span<const double> x, std::vector<double>& sigma,
                   std::span<double> b) {
  const std::size_t d = model.dim;
  const std::size_t m = model.noise_dim;
  sigma.assign(d * m, 0.0);
  model.diffusion(t, x, sigma);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < m; ++k) acc += sigma[i * m + k] * sigma[j * m + k];
      b[i * d + j] = acc;
    }
  }
  if (!all_finite(b)) throw NumericError("non-finite diffusion in finite-difference stencil at " + format_point(t, x));
}

double default_step(double root, double xi) { return root * std::max(1.0, std::abs(xi)); }

}  // namespace

void ModelSpec::validate() const {
  if (dim == 0 || noise_dim == 0) throw ConfigError("model '" + name + "': dimensions must be positive");
  if (!drift || !diffusion) throw ConfigError("model '" + name + "': drift and diffusion callbacks are required");
  if (derivatives == DerivativeSource::analytic && !analytic_derivatives) {
    throw ConfigError("model '" + name + "': analytic derivative supplier selected but not provided");
  }
}

std::vector<double> ModelSpec::drift_at(double t, std::span<const double> x) const {
  std::vector<double> out(dim, 0.0);
  drift(t, x, out);
  return out;
}

std::vector<double> ModelSpec::diffusion_at(double t, std::span<const double> x) const {
  std::vector<double> out(dim * noise_dim, 0.0);
  diffusion(t, x, out);
  if (!all_finite(out)) throw ValidationError("model '" + name + "': non-finite diffusion at " + format_point(t, x));
  return out;
}

std::vector<double> ReverseSpec::rev_drift(double s, std::span<const double> y) const {
  std::vector<double> out(dim, 0.0);
  double rate = 0.0;
  drift_and_rate(s, y, out, rate);
  return out;
}

std::vector<double> ReverseSpec::diffusion_at(double s, std::span<const double> y) const {
  std::vector<double> out(dim * noise_dim, 0.0);
  rev_diffusion(s, y, out);
  return out;
}

double ReverseSpec::weight_rate(double s, std::span<const double> y) const {
  std::vector<double> drift(dim, 0.0);
  double rate = 0.0;
  drift_and_rate(s, y, drift, rate);
  return rate;
}

DerivativeBundle fd_derivatives(const ModelSpec& model, double t, std::span<const double> x, FdSteps steps) {
  model.validate();
  const std::size_t d = model.dim;
  if (x.size() != d) throw ValidationError("fd_derivatives: state dimension mismatch");
  if (steps.first < 0.0 || steps.second < 0.0) throw ValidationError("fd_derivatives: steps must be positive");

  const double eps = std::numeric_limits<double>::epsilon();
  const double root3 = std::cbrt(eps);
  const double root4 = std::sqrt(std::sqrt(eps));
  std::vector<double> h1(d), h2(d);
  for (std::size_t i = 0; i < d; ++i) {
    h1[i] = steps.first > 0.0 ? steps.first : default_step(root3, x[i]);
    h2[i] = steps.second > 0.0 ? steps.second : default_step(root4, x[i]);
  }

  DerivativeBundle out;
  out.div_b.assign(d, 0.0);
  std::vector<double> sigma;
  std::vector<double> bp(d * d), bm(d * d), b0(d * d), bpp(d * d), bpm(d * d), bmp(d * d), bmm(d * d);
  std::vector<double> ap(d), am(d);
  std::vector<double> xp(x.begin(), x.end());

  covariance_at(model, t, x, sigma, b0);

  for (std::size_t j = 0; j < d; ++j) {
    // first derivatives of column j of b, and of a^j
    xp.assign(x.begin(), x.end());
    xp[j] = x[j] + h1[j];
    covariance_at(model, t, xp, sigma, bp);
    model.drift(t, xp, ap);
    xp[j] = x[j] - h1[j];
    covariance_at(model, t, xp, sigma, bm);
    model.drift(t, xp, am);
    for (std::size_t i = 0; i < d; ++i) out.div_b[i] += (bp[i * d + j] - bm[i * d + j]) / (2.0 * h1[j]);
    out.div_a += (ap[j] - am[j]) / (2.0 * h1[j]);

    // diagonal second derivative of b^{jj}
    xp[j] = x[j] + h2[j];
    covariance_at(model, t, xp, sigma, bp);
    xp[j] = x[j] - h2[j];
    covariance_at(model, t, xp, sigma, bm);
    out.hess_b += (bp[j * d + j] - 2.0 * b0[j * d + j] + bm[j * d + j]) / (h2[j] * h2[j]);
  }

  // mixed second derivatives; b^{ij} + b^{ji} handled together
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      auto eval = [&](double si, double sj, std::vector<double>& dst) {
        xp.assign(x.begin(), x.end());
        xp[i] += si * h2[i];
        xp[j] += sj * h2[j];
        covariance_at(model, t, xp, sigma, dst);
      };
      eval(+1, +1, bpp);
      eval(+1, -1, bpm);
      eval(-1, +1, bmp);
      eval(-1, -1, bmm);
      const std::size_t ij = i * d + j;
      const std::size_t ji = j * d + i;
      const double num = (bpp[ij] + bpp[ji]) - (bpm[ij] + bpm[ji]) - (bmp[ij] + bmp[ji]) + (bmm[ij] + bmm[ji]);
      out.hess_b += num / (4.0 * h2[i] * h2[j]);
    }
  }

  if (!all_finite(out.div_b) || !std::isfinite(out.hess_b) || !std::isfinite(out.div_a)) {
    throw NumericError("non-finite finite-difference derivative at " + format_point(t, x));
  }
  return out;
}

DerivativeBundle fd_derivatives(const ModelSpec& model, double t, std::span<const double> x, double h_fd) {
  if (!(h_fd > 0.0)) throw ValidationError("fd_derivatives: h_fd must be positive");
  return fd_derivatives(model, t, x, FdSteps{h_fd, h_fd});
}

DerivativeBundle model_derivatives(const ModelSpec& model, double t, std::span<const double> x) {
  if (model.derivatives == DerivativeSource::analytic) {
    if (!model.analytic_derivatives) {
      throw ConfigError("model '" + model.name + "': analytic derivative supplier selected but not provided");
    }
    DerivativeBundle out;
    out.div_b.assign(model.dim, 0.0);
    model.analytic_derivatives(t, x, out);
    return out;
  }
  return fd_derivatives(model, t, x);
}

ReverseSpec reverse_coefficients(const ModelSpec& model, double T) {
  model.validate();
  if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("reverse_coefficients: horizon T must be positive");
  if (model.derivatives == DerivativeSource::finite_difference && !model.analytic_derivatives) {
    std::clog << "warning: model '" << model.name
              << "' has no analytic derivatives; reverse coefficients use finite differences\n";
  }

  ReverseSpec rev;
  rev.horizon = T;
  rev.dim = model.dim;
  rev.noise_dim = model.noise_dim;
  rev.exact = model.exact_reverse;
  rev.constant_weight_rate = model.constant_weight_rate;

  rev.drift_and_rate = [model, T](double s, std::span<const double> y, std::span<double> drift_out, double& rate) {
    const double t = T - s;
    // per-call buffer: the drift may itself be a reverse drift (nested use)
    std::array<double, 8> small{};
    std::vector<double> large;
    std::span<double> a(small.data(), model.dim);
    if (model.dim > small.size()) {
      large.assign(model.dim, 0.0);
      a = large;
    }
    model.drift(t, y, a);
    const DerivativeBundle bundle = model_derivatives(model, t, y);
    for (std::size_t i = 0; i < model.dim; ++i) drift_out[i] = bundle.div_b[i] - a[i];
    rate = 0.5 * bundle.hess_b - bundle.div_a;
    if (!all_finite(drift_out) || !std::isfinite(rate)) {
      throw NumericError("non-finite reverse coefficient at " + format_point(s, y));
    }
  };
  rev.rev_diffusion = [diffusion = model.diffusion, T](double s, std::span<const double> y, std::span<double> out) {
    diffusion(T - s, y, out);
  };
  return rev;
}

// --- built-ins ---------------------------------------------------------------

ModelSpec brownian_motion(std::size_t d) {
  if (d == 0) throw ValidationError("brownian_motion: dimension must be positive");
  ModelSpec m;
  m.name = "bm";
  m.dim = d;
  m.noise_dim = d;
  m.drift = [](double, std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
  m.diffusion = [d](double, std::span<const double>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < d; ++i) out[i * d + i] = 1.0;
  };
  m.derivatives = DerivativeSource::analytic;
  m.analytic_derivatives = [](double, std::span<const double>, DerivativeBundle& out) {
    std::fill(out.div_b.begin(), out.div_b.end(), 0.0);
    out.hess_b = 0.0;
    out.div_a = 0.0;
  };
  auto step = [](double t0, double t1, std::span<const double> x, RandomStream& rng, std::span<double> out) {
    const double sd = std::sqrt(t1 - t0);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + sd * rng.normal();
  };
  m.exact_forward = step;
  m.exact_reverse = step;
  m.constant_weight_rate = 0.0;
  return m;
}

ModelSpec ornstein_uhlenbeck(double alpha) {
  if (!(alpha > 0.0)) throw ValidationError("ornstein_uhlenbeck: alpha must be positive");
  ModelSpec m;
  m.name = "ou";
  m.dim = 1;
  m.noise_dim = 1;
  m.drift = [alpha](double, std::span<const double> x, std::span<double> out) { out[0] = -alpha * x[0]; };
  m.diffusion = [](double, std::span<const double>, std::span<double> out) { out[0] = 1.0; };
  m.derivatives = DerivativeSource::analytic;
  m.analytic_derivatives = [alpha](double, std::span<const double>, DerivativeBundle& out) {
    out.div_b[0] = 0.0;
    out.hess_b = 0.0;
    out.div_a = -alpha;
  };
  m.exact_forward = [alpha](double t0, double t1, std::span<const double> x, RandomStream& rng, std::span<double> out) {
    const double h = t1 - t0;
    const double sd = std::sqrt(-std::expm1(-2.0 * alpha * h) / (2.0 * alpha));
    out[0] = std::exp(-alpha * h) * x[0] + sd * rng.normal();
  };
  // reverse: dY = alpha Y dt + dW
  m.exact_reverse = [alpha](double t0, double t1, std::span<const double> x, RandomStream& rng, std::span<double> out) {
    const double h = t1 - t0;
    const double sd = std::sqrt(std::expm1(2.0 * alpha * h) / (2.0 * alpha));
    out[0] = std::exp(alpha * h) * x[0] + sd * rng.normal();
  };
  m.constant_weight_rate = alpha;
  return m;
}

ModelSpec heston(const HestonParams& p) {
  if (!(p.rho >= -1.0 && p.rho <= 1.0)) throw ValidationError("heston: rho must lie in [-1, 1]");
  ModelSpec m;
  m.name = "heston";
  m.dim = 2;
  m.noise_dim = 2;
  m.drift = [p](double, std::span<const double> x, std::span<double> out) {
    out[0] = p.mu * x[0];
    out[1] = p.gamma * x[1] + p.beta;
  };
  const double rho_bar = std::sqrt(1.0 - p.rho * p.rho);
  m.diffusion = [p, rho_bar](double, std::span<const double> x, std::span<double> out) {
    const double sv = std::sqrt(std::max(x[1], 0.0));
    out[0] = sv * x[0];
    out[1] = 0.0;
    out[2] = p.xi * sv * p.rho;
    out[3] = p.xi * sv * rho_bar;
  };
  // b11 = v+ S^2, b12 = rho xi v+ S, b22 = xi^2 v+ with v+ = max(v, 0).
  m.derivatives = DerivativeSource::analytic;
  m.analytic_derivatives = [p](double, std::span<const double> x, DerivativeBundle& out) {
    const double s = x[0];
    const double vp = std::max(x[1], 0.0);
    const double on = x[1] > 0.0 ? 1.0 : 0.0;
    out.div_b[0] = 2.0 * vp * s + p.rho * p.xi * on * s;
    out.div_b[1] = p.rho * p.xi * vp + p.xi * p.xi * on;
    out.hess_b = 2.0 * vp + 2.0 * p.rho * p.xi * on;
    out.div_a = p.mu + p.gamma;
  };
  return m;
}

}  // namespace frmc
