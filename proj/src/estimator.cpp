#include "frmc/estimator.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "frmc/errors.hpp"
#include "frmc/parallel.hpp"
#include "frmc/rng.hpp"

namespace frmc {
namespace {

constexpr std::uint64_t kSelfReferenceStream = 0x5e1f5e1fULL;

struct PartialSums {
  double numerator = 0.0;
  double denominator = 0.0;
  std::uint64_t pairs = 0;
};

void check_batches(const ForwardBatch& fwd, const ReverseBatch& rev, const EstimatorConfig& cfg) {
  cfg.validate();
  if (fwd.n_traj == 0 || rev.m_traj == 0) throw ValidationError("estimator needs non-empty batches");
  if (fwd.dim != rev.dim) throw ValidationError("forward and reverse batches differ in dimension");
  if (cfg.kernel.dim != fwd.dim) throw ValidationError("kernel dimension differs from the state dimension");
  if (fwd.steps < 1 || rev.steps < 1) throw ValidationError("batches need K >= 1 and L >= 1 grid steps");
}

PathView make_view(const Functional& g, const ForwardBatch& fwd, std::size_t n, const ReverseBatch& rev,
                   std::size_t m) {
  return PathView(fwd.path(n), rev.path(m), rev.start(m), fwd.steps, rev.steps, fwd.dim, g.uses_terminal);
}

double reverse_multiplier(const ReverseBatch& rev, std::size_t m, bool use_density) {
  double w = std::exp(rev.log_weight[m]);
  if (use_density) w /= rev.start_density[m];
  return w;
}

// Kernel evaluated on u = (y - x) / eps without truncation; callers restrict the
// candidates to the closed ball |y - x| <= radius * eps beforehand.
double scaled_kernel(const KernelSpec& kernel, std::span<const double> x, std::span<const double> y, double eps,
                     std::span<double> u) {
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = (y[i] - x[i]) / eps;
  return kernel_profile(kernel.family, u);
}

EstimateResult accumulate(const ForwardBatch& fwd, const ReverseBatch& rev, const Functional& g,
                          const EstimatorConfig& cfg, const SpatialIndex* index, bool use_density) {
  const auto started = std::chrono::steady_clock::now();
  check_batches(fwd, rev, cfg);
  if (!g.eval) throw ConfigError("functional '" + g.name + "' has no evaluator");

  const bool truncated = cfg.kernel.truncated();
  SpatialIndex local;
  if (truncated && index == nullptr) {
    local = build_endpoint_index(fwd, cfg);
    index = &local;
  }
  if (truncated && index->cell_size() != cfg.search_radius()) {
    throw UsageError("spatial index radius does not match kernel radius * epsilon");
  }

  const std::size_t d = fwd.dim;
  std::vector<PartialSums> partial(rev.m_traj);
  parallel_for(rev.m_traj, cfg.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> candidates;
    std::vector<double> u(d);
    for (std::size_t m = begin; m < end; ++m) {
      const auto y_end = rev.endpoint(m);
      if (truncated) {
        index->query(y_end, index->cell_size(), candidates);
      } else {
        candidates.resize(fwd.n_traj);
        for (std::size_t n = 0; n < fwd.n_traj; ++n) candidates[n] = n;
      }
      PartialSums& acc = partial[m];
      acc.pairs = candidates.size();
      for (std::size_t n : candidates) {
        const double k = scaled_kernel(cfg.kernel, fwd.endpoint(n), y_end, cfg.epsilon, u);
        if (k == 0.0) continue;
        const double gv = g.eval(make_view(g, fwd, n, rev, m));
        if (!std::isfinite(gv)) {
          throw NumericError("functional '" + g.name + "' is not finite for pair (n=" + std::to_string(n) +
                             ", m=" + std::to_string(m) + ")");
        }
        acc.numerator += gv * k;
        acc.denominator += k;
      }
    }
  });

  double numerator = 0.0;
  double denominator = 0.0;
  std::uint64_t pairs = 0;
  for (std::size_t m = 0; m < rev.m_traj; ++m) {
    const double w = reverse_multiplier(rev, m, use_density);
    numerator += w * partial[m].numerator;
    denominator += w * partial[m].denominator;
    pairs += partial[m].pairs;
  }
  EstimateResult res = finalize_estimate(numerator, denominator, pairs, fwd.n_traj, rev.m_traj, d, cfg);
  res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return res;
}

}  // namespace

// --- functionals ---------------------------------------------------------------

Functional constant_one() {
  return {"one", [](const PathView&) { return 1.0; }, false};
}

Functional bridge_mean_square() {
  return {"bridge_mean_square",
          [](const PathView& v) {
            const std::size_t n = v.size();
            double total = 0.0;
            for (std::size_t j = 0; j < v.dim(); ++j) {
              double mean = 0.0;
              for (std::size_t i = 0; i < n; ++i) mean += v.at(i)[j];
              mean /= static_cast<double>(n);
              total += mean * mean;
            }
            return total;
          },
          false};
}

Functional realized_variance(std::size_t coord) {
  return {"realized_variance",
          [coord](const PathView& v) {
            double total = 0.0;
            double prev = std::log(v.at(0)[coord]);
            for (std::size_t i = 1; i < v.size(); ++i) {
              const double cur = std::log(v.at(i)[coord]);
              total += (cur - prev) * (cur - prev);
              prev = cur;
            }
            return total;
          },
          true};
}

Functional coordinate_square(std::size_t time_index, std::size_t coord) {
  return {"coordinate_square",
          [time_index, coord](const PathView& v) {
            const double x = v.at(time_index)[coord];
            return x * x;
          },
          false};
}

// --- configuration -----------------------------------------------------------------

double Cutoff::threshold(std::size_t N) const {
  switch (mode) {
    case Mode::disabled:
      return 0.0;
    case Mode::fixed:
      return 0.5 * p_bar;
    case Mode::sequence:
      return sequence_scale * std::pow(static_cast<double>(N), -sequence_decay);
  }
  return 0.0;
}

void EstimatorConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ValidationError("bandwidth epsilon must be positive");
  if (cutoff.mode == Cutoff::Mode::fixed && !(cutoff.p_bar > 0.0)) {
    throw ValidationError("fixed cutoff needs p_bar > 0");
  }
  if (cutoff.mode == Cutoff::Mode::sequence && !(cutoff.sequence_scale > 0.0 && cutoff.sequence_decay > 0.0)) {
    throw ValidationError("cutoff sequence needs positive scale and decay");
  }
}

// --- estimators --------------------------------------------------------------------

double pair_weight(const Functional& g, const ForwardBatch& fwd, std::size_t n, const ReverseBatch& rev,
                   std::size_t m, double epsilon, const KernelSpec& kernel) {
  if (fwd.dim != rev.dim || kernel.dim != fwd.dim) throw ValidationError("pair_weight: dimension mismatch");
  if (!(epsilon > 0.0)) throw ValidationError("pair_weight: epsilon must be positive");
  const auto x = fwd.endpoint(n);
  const auto y = rev.endpoint(m);
  std::vector<double> u(fwd.dim);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = (y[i] - x[i]) / epsilon;
  const double k = kernel_value(kernel, u);
  if (k == 0.0) return 0.0;
  const double gv = g.eval(make_view(g, fwd, n, rev, m));
  return std::pow(epsilon, -static_cast<double>(fwd.dim)) * gv * k *
         reverse_multiplier(rev, m, rev.randomized_start());
}

SpatialIndex build_endpoint_index(const ForwardBatch& fwd, const EstimatorConfig& cfg) {
  cfg.validate();
  if (!cfg.kernel.truncated()) throw UsageError("an untruncated kernel has no finite search radius");
  const std::vector<double> endpoints = fwd.endpoints();
  return SpatialIndex(endpoints, fwd.dim, cfg.search_radius());
}

EstimateResult finalize_estimate(double numerator, double denominator, std::uint64_t pairs, std::size_t N,
                                 std::size_t M, std::size_t dim, const EstimatorConfig& cfg) {
  EstimateResult res;
  res.N = N;
  res.M = M;
  res.epsilon = cfg.epsilon;
  res.pairs = pairs;
  res.numerator_sum = numerator;
  res.denominator_sum = denominator;
  const double norm = static_cast<double>(N) * static_cast<double>(M) * std::pow(cfg.epsilon, static_cast<double>(dim));
  res.h_hat = numerator / norm;
  res.p_hat = denominator / norm;
  if (cfg.cutoff.mode != Cutoff::Mode::disabled) {
    if (!(res.p_hat > cfg.cutoff.threshold(N))) {
      res.cutoff_triggered = true;
      res.H_hat = 0.0;
      return res;
    }
  } else if (!(denominator > 0.0)) {
    throw DegenerateDenominatorError("no matched pairs: degenerate denominator (" + std::to_string(pairs) +
                                     " candidate pairs)");
  }
  res.H_hat = numerator / denominator;
  return res;
}

EstimateResult estimate_point(const ForwardBatch& fwd, const ReverseBatch& rev, const Functional& g,
                              const EstimatorConfig& cfg, const SpatialIndex* index) {
  if (rev.randomized_start()) throw UsageError("estimate_point expects a reverse batch started at a fixed point");
  return accumulate(fwd, rev, g, cfg, index, false);
}

double estimate_density(const ForwardBatch& fwd, const ReverseBatch& rev, const EstimatorConfig& cfg,
                        const SpatialIndex* index) {
  EstimatorConfig plain = cfg;
  plain.cutoff = Cutoff::disabled();
  const Functional one = constant_one();
  try {
    return accumulate(fwd, rev, one, plain, index, rev.randomized_start()).p_hat;
  } catch (const DegenerateDenominatorError&) {
    return 0.0;
  }
}

EstimateResult estimate_set(const ForwardBatch& fwd, const ReverseBatch& rev, const Functional& g,
                            const EstimatorConfig& cfg, const SpatialIndex* index) {
  if (!rev.randomized_start()) throw UsageError("estimate_set expects a reverse batch with randomized starts");
  for (std::size_t m = 0; m < rev.m_traj; ++m) {
    if (!(rev.start_density[m] > 0.0)) {
      throw NumericError("start density is not positive for reverse trajectory " + std::to_string(m));
    }
  }
  return accumulate(fwd, rev, g, cfg, index, true);
}

// --- studies -----------------------------------------------------------------------

std::optional<double> loglog_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) return std::nullopt;
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

StudyResult convergence_study(const ReplicationFn& run, const BandwidthFn& epsilon_of, const StudyOptions& opts) {
  if (opts.N_list.empty()) throw ValidationError("convergence study needs a non-empty N list");
  for (std::size_t i = 1; i < opts.N_list.size(); ++i) {
    if (opts.N_list[i] <= opts.N_list[i - 1]) throw ValidationError("N list must be strictly ascending");
  }
  if (opts.replications < 2) throw ValidationError("convergence study needs at least two replications");

  StudyResult out;
  if (opts.reference.value) {
    out.reference = *opts.reference.value;
  } else {
    if (opts.reference.self_N == 0 || opts.reference.self_R == 0) {
      throw ValidationError("self-reference needs a positive N and replication count");
    }
    const std::uint64_t ref_seed = derive_seed(opts.seed, kSelfReferenceStream);
    double total = 0.0;
    for (std::size_t r = 0; r < opts.reference.self_R; ++r) {
      total += run(opts.reference.self_N, derive_seed(ref_seed, r)).H_hat;
    }
    out.reference = total / static_cast<double>(opts.reference.self_R);
  }
  const double scale = opts.relative ? out.reference * out.reference : 1.0;
  if (opts.relative && !(scale > 0.0)) throw NumericError("relative MSE needs a non-zero reference value");

  for (std::size_t N : opts.N_list) {
    std::vector<double> values;
    StudyRow row;
    row.N = N;
    row.epsilon = epsilon_of(N);
    for (std::size_t r = 0; r < opts.replications; ++r) {
      try {
        values.push_back(run(N, derive_seed(opts.seed, r)).H_hat);
      } catch (const Error& e) {
        ++row.failed;
        out.failures.push_back("N=" + std::to_string(N) + " replication " + std::to_string(r) + ": " + e.what());
      }
    }
    if (values.empty()) {
      throw NumericError("every replication failed at N=" + std::to_string(N) + ": " + out.failures.back());
    }
    const double R = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= R;
    double var = 0.0, mse = 0.0;
    for (double v : values) {
      var += (v - mean) * (v - mean);
      mse += (v - out.reference) * (v - out.reference);
    }
    row.mean = mean;
    row.bias2 = (mean - out.reference) * (mean - out.reference) / scale;
    row.variance = var / R / scale;
    row.mse = mse / R / scale;
    row.replications = values.size();
    out.rows.push_back(row);
  }

  std::vector<double> xs, ys;
  for (const auto& row : out.rows) {
    xs.push_back(static_cast<double>(row.N));
    ys.push_back(row.mse);
  }
  out.slope = loglog_slope(xs, ys);
  return out;
}

}  // namespace frmc
