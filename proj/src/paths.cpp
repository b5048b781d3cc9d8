#include "frmc/paths.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "frmc/errors.hpp"
#include "frmc/format.hpp"
#include "frmc/parallel.hpp"

namespace frmc {
namespace {

void require_finite(std::span<const double> x, const char* role, std::size_t traj) {
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string(role) + " trajectory " + std::to_string(traj) + " left the finite range");
    }
  }
}

// x += a h + sigma sqrt(h) Z for one Euler step.
void euler_increment(std::span<double> x, std::span<const double> drift, std::span<const double> sigma,
                     std::size_t noise_dim, double h, RandomStream& rng, std::vector<double>& dw) {
  const double sqrt_h = std::sqrt(h);
  for (std::size_t k = 0; k < noise_dim; ++k) dw[k] = sqrt_h * rng.normal();
  for (std::size_t i = 0; i < x.size(); ++i) {
    double acc = drift[i] * h;
    for (std::size_t k = 0; k < noise_dim; ++k) acc += sigma[i * noise_dim + k] * dw[k];
    x[i] += acc;
  }
}

void check_scheme(const Scheme& scheme) {
  if (scheme.kind == Scheme::Kind::euler && scheme.substeps < 1) {
    throw ValidationError("Euler scheme needs substeps >= 1");
  }
}

double laplace_quantile(double u) { return u < 0.5 ? std::log(2.0 * u) : -std::log(2.0 * (1.0 - u)); }

StartDistribution make_start(std::size_t d, std::vector<double> fixed, FreeLaw law, double location, double scale,
                             std::string name) {
  if (fixed.size() > d) throw ValidationError("hyperplane_start: more fixed coordinates than dimensions");
  if (!(scale > 0.0)) throw ValidationError("hyperplane_start: scale must be positive");
  StartDistribution dist;
  dist.name = std::move(name);
  dist.dim = d;
  const std::size_t k = fixed.size();
  dist.draw = [fixed, law, location, scale, d, k](RandomStream& rng, std::span<double> out) {
    for (std::size_t i = 0; i < k; ++i) out[i] = fixed[i];
    for (std::size_t i = k; i < d; ++i) {
      const double z = law == FreeLaw::normal ? rng.normal() : laplace_quantile(rng.uniform());
      out[i] = location + scale * z;
    }
  };
  dist.density = [law, location, scale, d, k](std::span<const double> x) {
    double log_phi = 0.0;
    for (std::size_t i = k; i < d; ++i) {
      const double z = (x[i] - location) / scale;
      if (law == FreeLaw::normal) {
        log_phi += -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(scale);
      } else {
        log_phi += -std::abs(z) - std::log(2.0 * scale);
      }
    }
    return std::exp(log_phi);
  };
  return dist;
}

}  // namespace

std::size_t substeps_for_mesh(const TimeGrid& grid, double h) {
  if (!(h > 0.0)) throw ValidationError("mesh must be positive");
  double widest = 0.0;
  for (std::size_t i = 1; i < grid.s_times.size(); ++i) widest = std::max(widest, grid.s_times[i] - grid.s_times[i - 1]);
  for (std::size_t i = 1; i < grid.t_times.size(); ++i) widest = std::max(widest, grid.t_times[i] - grid.t_times[i - 1]);
  // tolerate round-off when h divides the interval
  const double ratio = widest / h;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) < 1e-9 * std::max(1.0, nearest)) return std::max<std::size_t>(1, static_cast<std::size_t>(nearest));
  return static_cast<std::size_t>(std::ceil(ratio));
}

std::vector<double> ForwardBatch::endpoints() const {
  std::vector<double> out(n_traj * dim);
  for (std::size_t n = 0; n < n_traj; ++n) {
    const auto e = endpoint(n);
    std::copy(e.begin(), e.end(), out.begin() + static_cast<std::ptrdiff_t>(n * dim));
  }
  return out;
}

StartDistribution hyperplane_start(std::size_t d, std::vector<double> fixed, FreeLaw law, double location,
                                   double scale) {
  return make_start(d, std::move(fixed), law, location, scale, "hyperplane");
}

StartDistribution full_space_start(std::size_t d, FreeLaw law, double location, double scale) {
  return make_start(d, {}, law, location, scale, "full-space");
}

ForwardBatch simulate_forward(const ModelSpec& model, std::span<const double> x0, const TimeGrid& grid,
                              const Scheme& scheme, std::uint64_t seed, std::size_t n_traj, unsigned threads) {
  model.validate();
  check_scheme(scheme);
  if (x0.size() != model.dim) throw ValidationError("simulate_forward: x0 dimension mismatch");
  if (n_traj == 0) throw ValidationError("simulate_forward: n_traj must be positive");
  if (scheme.kind == Scheme::Kind::exact && !model.exact_forward) {
    throw ConfigError("exact scheme requested but model '" + model.name + "' has no exact sampler");
  }

  const std::size_t d = model.dim;
  const std::size_t K = grid.K();
  ForwardBatch batch;
  batch.n_traj = n_traj;
  batch.steps = K;
  batch.dim = d;
  batch.seed = seed;
  batch.states.assign(n_traj * K * d, 0.0);

  parallel_for(n_traj, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> x(d), next(d), drift(d), sigma(d * model.noise_dim), dw(model.noise_dim);
    for (std::size_t n = begin; n < end; ++n) {
      RandomStream rng(seed, StreamRole::forward, n);
      x.assign(x0.begin(), x0.end());
      for (std::size_t k = 1; k <= K; ++k) {
        const double t0 = grid.s_times[k - 1];
        const double t1 = grid.s_times[k];
        if (scheme.kind == Scheme::Kind::exact) {
          model.exact_forward(t0, t1, x, rng, next);
          x.swap(next);
        } else {
          const double h = (t1 - t0) / static_cast<double>(scheme.substeps);
          for (std::size_t j = 0; j < scheme.substeps; ++j) {
            const double t = t0 + static_cast<double>(j) * h;
            model.drift(t, x, drift);
            model.diffusion(t, x, sigma);
            euler_increment(x, drift, sigma, model.noise_dim, h, rng, dw);
          }
        }
        require_finite(x, "forward", n);
        std::copy(x.begin(), x.end(), batch.states.begin() + static_cast<std::ptrdiff_t>((n * K + k - 1) * d));
      }
    }
  });
  return batch;
}

ReverseBatch simulate_reverse(const ReverseSpec& rev, const ReverseStart& start, const TimeGrid& grid,
                              const Scheme& scheme, std::uint64_t seed, std::size_t m_traj, unsigned threads) {
  check_scheme(scheme);
  if (m_traj == 0) throw ValidationError("simulate_reverse: m_traj must be positive");
  if (rev.horizon != grid.horizon()) throw ConfigError("simulate_reverse: reverse horizon differs from grid horizon");
  if (scheme.kind == Scheme::Kind::exact && (!rev.exact || !rev.constant_weight_rate)) {
    throw ConfigError("exact scheme requested but the reverse model has no exact sampler with constant weight rate");
  }

  const std::size_t d = rev.dim;
  const std::size_t L = grid.L();
  const std::vector<double> hat = hat_times(grid);
  const auto* fixed = std::get_if<std::vector<double>>(&start);
  const auto* sampler = std::get_if<StartDistribution>(&start);
  if (fixed && fixed->size() != d) throw ValidationError("simulate_reverse: start dimension mismatch");
  if (sampler && (sampler->dim != d || !sampler->draw || !sampler->density)) {
    throw ValidationError("simulate_reverse: start distribution does not match the model dimension");
  }

  ReverseBatch batch;
  batch.m_traj = m_traj;
  batch.steps = L;
  batch.dim = d;
  batch.seed = seed;
  batch.states.assign(m_traj * L * d, 0.0);
  batch.log_weight.assign(m_traj, 0.0);
  batch.starts.assign(m_traj * d, 0.0);
  if (sampler) batch.start_density.assign(m_traj, 0.0);

  parallel_for(m_traj, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> y(d), next(d), drift(d), sigma(d * rev.noise_dim), dw(rev.noise_dim);
    for (std::size_t m = begin; m < end; ++m) {
      RandomStream rng(seed, StreamRole::reverse, m);
      if (fixed) {
        y.assign(fixed->begin(), fixed->end());
      } else {
        sampler->draw(rng, y);
        const double phi = sampler->density(y);
        if (!(phi > 0.0) || !std::isfinite(phi)) {
          throw NumericError("start density phi(xi) is not positive for reverse trajectory " + std::to_string(m));
        }
        batch.start_density[m] = phi;
      }
      std::copy(y.begin(), y.end(), batch.starts.begin() + static_cast<std::ptrdiff_t>(m * d));

      double log_w = 0.0;
      for (std::size_t i = 1; i <= L; ++i) {
        const double t0 = i == 1 ? 0.0 : hat[i - 2];
        const double t1 = hat[i - 1];
        if (scheme.kind == Scheme::Kind::exact) {
          rev.exact(t0, t1, y, rng, next);
          y.swap(next);
        } else {
          const double h = (t1 - t0) / static_cast<double>(scheme.substeps);
          for (std::size_t j = 0; j < scheme.substeps; ++j) {
            const double s = t0 + static_cast<double>(j) * h;
            double rate = 0.0;
            rev.drift_and_rate(s, y, drift, rate);
            rev.rev_diffusion(s, y, sigma);
            log_w += rate * h;
            euler_increment(y, drift, sigma, rev.noise_dim, h, rng, dw);
          }
        }
        require_finite(y, "reverse", m);
        std::copy(y.begin(), y.end(), batch.states.begin() + static_cast<std::ptrdiff_t>((m * L + i - 1) * d));
      }
      if (scheme.kind == Scheme::Kind::exact) log_w = *rev.constant_weight_rate * hat.back();
      if (!std::isfinite(log_w) || !std::isfinite(std::exp(log_w))) {
        throw NumericError("reverse weight overflow on trajectory " + std::to_string(m));
      }
      batch.log_weight[m] = log_w;
    }
  });
  return batch;
}

void write_csv(std::ostream& os, const ForwardBatch& batch) {
  const ClassicLocaleGuard classic(os);
  os << "traj,time_index,coordinate,value\n";
  for (std::size_t n = 0; n < batch.n_traj; ++n)
    for (std::size_t k = 0; k < batch.steps; ++k)
      for (std::size_t c = 0; c < batch.dim; ++c)
        os << n << ',' << k + 1 << ',' << c << ',' << format_double(batch.state(n, k)[c]) << '\n';
}

void write_csv(std::ostream& os, const ReverseBatch& batch) {
  const ClassicLocaleGuard classic(os);
  os << "traj,time_index,coordinate,value,log_weight\n";
  for (std::size_t m = 0; m < batch.m_traj; ++m)
    for (std::size_t i = 0; i < batch.steps; ++i)
      for (std::size_t c = 0; c < batch.dim; ++c)
        os << m << ',' << i + 1 << ',' << c << ',' << format_double(batch.state(m, i)[c]) << ','
           << format_double(batch.log_weight[m]) << '\n';
}

}  // namespace frmc
