#pragma once

/**
 * @file estimator.hpp
 * Forward-reverse kernel estimators for conditional expectations of path
 * functionals.
 *
 * With forward paths X^n (n < N) started at x and reverse paths (Y^m, weight^m)
 * (m < M) started at y, the pair weight is
 *
 *   Z_nm = eps^{-d} g(X^n(s_1..s_K), Y^m(t^_{L-1}), ..., Y^m(t^_1)) K((Y^m(t^_L) - X^n(t*)) / eps) weight^m
 *
 * h_hat = (NM)^{-1} sum Z_nm estimates p(s_0,x,T,y) E[g | X(T) = y], the g == 1
 * version p_hat estimates the transition density, and H_hat = h_hat / p_hat is
 * the self-normalized estimate of the conditional expectation. For a start
 * drawn from xi with density phi the weight is replaced by weight^m / phi(xi^m).
 *
 * Sums are accumulated per reverse trajectory m over forward indices in
 * ascending order, then reduced over m in ascending order; results are
 * bit-identical for any thread count.
 */

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frmc/kernel.hpp"
#include "frmc/matcher.hpp"
#include "frmc/paths.hpp"

namespace frmc {

/// Chronological view of one (forward n, reverse m) pair:
/// index 0..K-1 -> X(s_1..s_K), K..K+L-2 -> Z(t_1..t_{L-1}) = Y(T - t_j),
/// and K+L-1 -> the terminal value Y(0) when the functional asks for it.
class PathView {
 public:
  PathView(std::span<const double> forward, std::span<const double> reverse, std::span<const double> terminal,
           std::size_t K, std::size_t L, std::size_t dim, bool with_terminal)
      : forward_(forward), reverse_(reverse), terminal_(terminal), K_(K), L_(L), dim_(dim),
        with_terminal_(with_terminal) {}

  std::size_t size() const { return K_ + L_ - 1 + (with_terminal_ ? 1 : 0); }
  std::size_t dim() const { return dim_; }
  std::span<const double> at(std::size_t i) const {
    if (i < K_) return forward_.subspan(i * dim_, dim_);
    if (i < K_ + L_ - 1) return reverse_.subspan((L_ + K_ - 2 - i) * dim_, dim_);
    return terminal_;
  }

 private:
  std::span<const double> forward_;
  std::span<const double> reverse_;
  std::span<const double> terminal_;
  std::size_t K_, L_, dim_;
  bool with_terminal_;
};

struct Functional {
  std::string name;
  std::function<double(const PathView&)> eval;  ///< must be pure; called concurrently
  bool uses_terminal = false;
};

/// g == 1.
Functional constant_one();
/// sum_j (mean over the view's states of coordinate j)^2.
Functional bridge_mean_square();
/// sum_i (log x_{i+1}[coord] - log x_i[coord])^2 over the view including the terminal value.
Functional realized_variance(std::size_t coord = 0);
/// (x_{time_index}[coord])^2 with time_index counted in the chronological view.
Functional coordinate_square(std::size_t time_index, std::size_t coord);

struct Cutoff {
  enum class Mode { disabled, fixed, sequence };
  Mode mode = Mode::disabled;
  double p_bar = 0.0;          ///< fixed: indicator p_hat > p_bar / 2
  double sequence_scale = 1.0; ///< sequence: indicator p_hat > scale * N^{-decay}
  double sequence_decay = 0.1;

  static Cutoff disabled() { return {}; }
  static Cutoff fixed(double p_bar) { return {Mode::fixed, p_bar, 1.0, 0.1}; }
  static Cutoff sequence(double scale, double decay) { return {Mode::sequence, 0.0, scale, decay}; }

  /// Threshold the density estimate must exceed; meaningless when disabled.
  double threshold(std::size_t N) const;
};

struct EstimatorConfig {
  double epsilon = 0.0;
  KernelSpec kernel;
  Cutoff cutoff;
  unsigned threads = 1;

  void validate() const;
  /// Radius of the matching ball in state units, kernel.radius * epsilon.
  double search_radius() const { return kernel.radius * epsilon; }
};

struct EstimateResult {
  double H_hat = 0.0;
  double h_hat = 0.0;
  double p_hat = 0.0;
  std::size_t N = 0;
  std::size_t M = 0;
  double epsilon = 0.0;
  std::uint64_t pairs = 0;
  bool cutoff_triggered = false;
  double wall_ms = 0.0;
  double numerator_sum = 0.0;    ///< sum g K weight
  double denominator_sum = 0.0;  ///< sum K weight
};

/// Z_nm for one pair (includes 1/phi(xi^m) for randomized starts).
double pair_weight(const Functional& g, const ForwardBatch& fwd, std::size_t n, const ReverseBatch& rev,
                   std::size_t m, double epsilon, const KernelSpec& kernel);

/// Index over forward t* endpoints with radius kernel.radius * epsilon.
SpatialIndex build_endpoint_index(const ForwardBatch& fwd, const EstimatorConfig& cfg);

/// Ratio estimator for a fixed terminal point. `index` may be null for untruncated
/// kernels (dense double sum) or to have it built on the fly.
EstimateResult estimate_point(const ForwardBatch& fwd, const ReverseBatch& rev, const Functional& g,
                              const EstimatorConfig& cfg, const SpatialIndex* index = nullptr);

/// Forward-reverse transition density estimate (the normalized denominator).
double estimate_density(const ForwardBatch& fwd, const ReverseBatch& rev, const EstimatorConfig& cfg,
                        const SpatialIndex* index = nullptr);

/// Ratio estimator for a terminal set, with weights divided by phi(xi^m).
EstimateResult estimate_set(const ForwardBatch& fwd, const ReverseBatch& rev, const Functional& g,
                            const EstimatorConfig& cfg, const SpatialIndex* index = nullptr);

/// Turns raw sums into an EstimateResult (normalization, cutoff, degenerate check).
/// Shared by the brute-force oracle so both paths apply identical indicator logic.
EstimateResult finalize_estimate(double numerator, double denominator, std::uint64_t pairs, std::size_t N,
                                 std::size_t M, std::size_t dim, const EstimatorConfig& cfg);

// --- convergence studies -------------------------------------------------------

struct StudyRow {
  std::size_t N = 0;
  double epsilon = 0.0;
  double mean = 0.0;
  double bias2 = 0.0;
  double variance = 0.0;  ///< population variance, so mse == bias2 + variance
  double mse = 0.0;
  std::size_t replications = 0;
  std::size_t failed = 0;
};

struct StudyReference {
  std::optional<double> value;  ///< known truth; otherwise self-reference
  std::size_t self_N = 0;
  std::size_t self_R = 1;
};

struct StudyOptions {
  std::vector<std::size_t> N_list;
  std::size_t replications = 20;
  std::uint64_t seed = 0;
  StudyReference reference;
  bool relative = false;  ///< divide bias2, variance and mse by reference^2
};

struct StudyResult {
  std::vector<StudyRow> rows;
  double reference = 0.0;
  std::optional<double> slope;  ///< least squares on (log N, log mse); absent when undefined
  std::vector<std::string> failures;
};

using ReplicationFn = std::function<EstimateResult(std::size_t N, std::uint64_t seed)>;
using BandwidthFn = std::function<double(std::size_t N)>;

/// Replication r uses seed derive_seed(opts.seed, r) at every N.
/// Throws Error when every replication at some N fails.
StudyResult convergence_study(const ReplicationFn& run, const BandwidthFn& epsilon_of, const StudyOptions& opts);

/// Least-squares slope of log y against log x over points with y > 0.
std::optional<double> loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace frmc
