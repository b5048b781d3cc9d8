// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
// Every seed and tolerance is fixed below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "frmc/errors.hpp"
#include "frmc/estimator.hpp"
#include "frmc/matcher.hpp"
#include "frmc/oracle.hpp"
#include "frmc/rng.hpp"
#include "golden_constants.hpp"
#include "run_config.hpp"

namespace {

using namespace frmc;
using cli::Experiment;
using cli::RunConfig;

constexpr std::uint64_t kSeed = 2024;

// 1. bridge mean
constexpr double kBridgeRelTol = 0.01;
constexpr double kBridgeRuntimeSec = 120.0;
// 2. bridge MSE slope
constexpr double kBridgeSlopeLo = -1.3;
constexpr double kBridgeSlopeHi = -0.7;
// 3. OU moments
constexpr std::size_t kOuReplications = 50;
constexpr double kOuMeanSe = 3.0;
constexpr double kOuVarRelTol = 0.25;
// 4. reverse weights, relative round-off allowance
constexpr double kWeightRelTol = 8.0 * std::numeric_limits<double>::epsilon();
// 5. fast path vs brute force
constexpr std::size_t kMatcherInstances = 100;
constexpr std::size_t kMatcherBatch = 200;
constexpr double kMatcherRelTol = 1e-12;
// 6. set conditioning
constexpr double kSetRelTol = 0.05;
constexpr std::size_t kSetReplications = 20;
// 7. Heston self-convergence
constexpr double kHestonSlopeLo = -1.4;
constexpr double kHestonSlopeHi = -0.6;
constexpr double kHestonRuntimeSec = 600.0;
// 9. cutoff: p_bar far above the 2-d BM density 1/(2 pi) at the origin
constexpr double kUnreachablePbar = 10.0;
constexpr double kReachablePbar = 0.01;

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel_diff(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

RunConfig bridge_config(double t_star) {
  RunConfig c = cli::preset("example-bb");
  c.t_star = t_star;
  c.seed = kSeed;
  return c;
}

// 1 and 2 share the studies: the N = 4096 row holds the R = 20 replications.
void bridge_criteria() {
  const double truth = bb_truth(10);
  bool mean_ok = true, slope_ok = true, time_ok = true;
  std::string mean_detail, slope_detail;
  for (double t_star : {0.1, 0.4}) {
    const RunConfig cfg = bridge_config(t_star);
    const Experiment exp(cfg);
    StudyOptions opts;
    opts.N_list = cfg.N_list;
    opts.replications = cfg.R;
    opts.seed = kSeed;
    opts.reference.value = truth;
    const auto t0 = std::chrono::steady_clock::now();
    const StudyResult res = convergence_study([&](std::size_t N, std::uint64_t s) { return exp.run(N, s); },
                                              [&](std::size_t N) { return exp.epsilon_for(N); }, opts);
    const double secs = seconds_since(t0);
    time_ok = time_ok && secs < kBridgeRuntimeSec;
    for (const auto& row : res.rows) {
      if (row.N != 4096) continue;
      const double rel = std::abs(row.mean - truth) / truth;
      mean_ok = mean_ok && rel <= kBridgeRelTol && row.replications == cfg.R;
      mean_detail += fmt("t*=%.1f mean=%.7f rel=%.4f; ", t_star, row.mean, rel);
    }
    const double slope = res.slope.value_or(std::numeric_limits<double>::quiet_NaN());
    slope_ok = slope_ok && slope >= kBridgeSlopeLo && slope <= kBridgeSlopeHi;
    slope_detail += fmt("t*=%.1f slope=%.3f (%.1fs); ", t_star, slope, secs);
  }
  report(1, "bridge mean at N=M=4096, R=20",
         mean_ok && time_ok, mean_detail + fmt("truth=%.7f tol=%.2f", truth, kBridgeRelTol));
  report(2, "bridge MSE slope over N=2^8..2^13",
         slope_ok, slope_detail + fmt("band=[%.1f, %.1f]", kBridgeSlopeLo, kBridgeSlopeHi));
}

void ou_moments() {
  RunConfig cfg = cli::preset("ou-density");
  cfg.seed = kSeed;
  const Experiment exp(cfg);
  std::vector<double> h;
  for (std::size_t r = 0; r < kOuReplications; ++r) h.push_back(exp.run(1000, derive_seed(kSeed, r)).h_hat);
  const double R = static_cast<double>(h.size());
  double mean = 0.0;
  for (double v : h) mean += v;
  mean /= R;
  double var = 0.0;
  for (double v : h) var += (v - mean) * (v - mean);
  var /= R - 1.0;

  OUParams p;
  p.alpha = 1.0;
  p.T = 1.0;
  p.t_star = 0.5;
  p.epsilon = 0.1;
  p.N = 1000;
  const double mean_ref = ou_mean_h(p);
  const double var_ref = ou_var_h(p);
  const double se = std::sqrt(var / R);
  const double z = std::abs(mean - mean_ref) / se;
  const double var_rel = std::abs(var - var_ref) / var_ref;
  const bool closed_forms_ok =
      rel_diff(mean_ref, golden::kOuMeanEps01) < 1e-11 && rel_diff(var_ref, golden::kOuVarN1000) < 1e-11;
  report(3, "OU mean and variance of h_hat, R=50", closed_forms_ok && z <= kOuMeanSe && var_rel <= kOuVarRelTol,
         fmt("mean=%.6f ref=%.6f |z|=%.2f (<=%.0f); var=%.4e ref=%.4e rel=%.3f (<=%.2f)", mean, mean_ref, z,
             kOuMeanSe, var, var_ref, var_rel, kOuVarRelTol));
}

void weight_exactness() {
  RunConfig ou_cfg = cli::preset("ou-density");
  ou_cfg.seed = kSeed;
  const Experiment ou(ou_cfg);
  const ReverseBatch rev = ou.reverse(1000, 1000, kSeed);
  const double expected = std::exp(ou_cfg.ou_alpha * (ou_cfg.T - 0.5));
  double worst = 0.0;
  for (double lw : rev.log_weight) worst = std::max(worst, rel_diff(std::exp(lw), expected));

  RunConfig bm_cfg = bridge_config(0.4);
  const Experiment bm(bm_cfg);
  const ReverseBatch bm_rev = bm.reverse(4096, 4096, kSeed);
  bool bm_unit = true;
  for (double lw : bm_rev.log_weight) bm_unit = bm_unit && std::exp(lw) == 1.0;
  report(4, "reverse weight exactness", worst <= kWeightRelTol && bm_unit,
         fmt("OU max rel dev=%.2e (<=%.2e) from e^{alpha(T-t*)}=%.15f; BM weights all 1: %s", worst, kWeightRelTol,
             expected, bm_unit ? "yes" : "no"));
}

void matcher_equivalence() {
  std::size_t estimate_mismatch = 0, query_mismatch = 0, both_degenerate = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < kMatcherInstances; ++i) {
    const std::size_t d = 1 + i % 4;
    RandomStream pick(kSeed, StreamRole::bench, i);
    const std::size_t l = 4 + static_cast<std::size_t>(pick.uniform() * 6.0);
    const std::size_t K = 1 + static_cast<std::size_t>(pick.uniform() * static_cast<double>(l - 1));
    RunConfig c;
    c.model = "bm";
    c.dim = d;
    c.T = 1.0;
    c.l = l;
    c.K = K;
    c.y.assign(d, pick.normal() * 0.5);
    c.functional = "bridge_mean_square";
    c.eta = 1e-3;
    c.epsilon = 0.1 + 0.4 * pick.uniform();
    c.N = kMatcherBatch;
    const Experiment exp(c);
    const std::uint64_t seed = derive_seed(kSeed, 1000 + i);
    const ForwardBatch fwd = exp.forward(kMatcherBatch, seed);
    const ReverseBatch rev = exp.reverse(kMatcherBatch, kMatcherBatch, seed);
    const EstimatorConfig ecfg = exp.estimator_for(kMatcherBatch);
    const Functional g = bridge_mean_square();

    const SpatialIndex index = build_endpoint_index(fwd, ecfg);
    const double r2 = ecfg.search_radius() * ecfg.search_radius();
    for (std::size_t m = 0; m < rev.m_traj; ++m) {
      const auto hits = query_ball(index, rev.endpoint(m), ecfg.search_radius());
      std::vector<std::size_t> scan;
      for (std::size_t n = 0; n < fwd.n_traj; ++n) {
        if (squared_distance(fwd.endpoint(n), rev.endpoint(m)) <= r2) scan.push_back(n);
      }
      if (hits != scan) ++query_mismatch;
    }

    bool fast_degenerate = false, brute_degenerate = false;
    EstimateResult fast, brute;
    try {
      fast = estimate_point(fwd, rev, g, ecfg, &index);
    } catch (const DegenerateDenominatorError&) {
      fast_degenerate = true;
    }
    try {
      brute = brute_force_double_sum(fwd, rev, g, ecfg);
    } catch (const DegenerateDenominatorError&) {
      brute_degenerate = true;
    }
    if (fast_degenerate || brute_degenerate) {
      if (fast_degenerate != brute_degenerate) ++estimate_mismatch;
      else ++both_degenerate;
      continue;
    }
    const double dev = std::max({rel_diff(fast.H_hat, brute.H_hat), rel_diff(fast.h_hat, brute.h_hat),
                                 rel_diff(fast.p_hat, brute.p_hat)});
    worst = std::max(worst, dev);
    if (dev > kMatcherRelTol || fast.pairs != brute.pairs) ++estimate_mismatch;
  }
  report(5, "fast path vs brute force, 100 instances d=1..4",
         estimate_mismatch == 0 && query_mismatch == 0,
         fmt("estimate mismatches=%zu (max rel dev %.1e, tol %.0e), query mismatches=%zu, both degenerate=%zu",
             estimate_mismatch, worst, kMatcherRelTol, query_mismatch, both_degenerate));
}

void set_conditioning() {
  double means[2] = {0.0, 0.0};
  const double truth[2] = {0.25, 0.5};
  for (std::size_t coord = 0; coord < 2; ++coord) {
    RunConfig c = cli::preset("bm-hyperplane");
    c.seed = kSeed;
    c.coord = coord;
    const Experiment exp(c);
    for (std::size_t r = 0; r < kSetReplications; ++r) means[coord] += exp.run(4096, derive_seed(kSeed, r)).H_hat;
    means[coord] /= static_cast<double>(kSetReplications);
  }
  const double rel0 = std::abs(means[0] - truth[0]) / truth[0];
  const double rel1 = std::abs(means[1] - truth[1]) / truth[1];
  report(6, "set conditioning on X1(1)=0", rel0 <= kSetRelTol && rel1 <= kSetRelTol,
         fmt("E[X1(1/2)^2]=%.5f (0.25, rel %.3f); E[X2(1/2)^2]=%.5f (0.5, rel %.3f); tol %.2f", means[0], rel0,
             means[1], rel1, kSetRelTol));
}

void heston_convergence() {
  RunConfig cfg = cli::preset("example-heston");
  cfg.seed = kSeed;
  const Experiment exp(cfg);
  std::uint64_t min_pairs = std::numeric_limits<std::uint64_t>::max();
  StudyOptions opts;
  opts.N_list = cfg.N_list;
  opts.replications = cfg.R;
  opts.seed = kSeed;
  opts.reference.self_N = cfg.ref_N;
  opts.reference.self_R = cfg.ref_R;
  opts.relative = true;
  const auto t0 = std::chrono::steady_clock::now();
  const StudyResult res = convergence_study(
      [&](std::size_t N, std::uint64_t s) {
        const EstimateResult r = exp.run(N, s);
        min_pairs = std::min(min_pairs, r.pairs);
        return r;
      },
      [&](std::size_t N) { return exp.epsilon_for(N); }, opts);
  const double secs = seconds_since(t0);
  const double slope = res.slope.value_or(std::numeric_limits<double>::quiet_NaN());
  const bool ok = slope >= kHestonSlopeLo && slope <= kHestonSlopeHi && min_pairs > 0 && res.failures.empty() &&
                  secs < kHestonRuntimeSec;
  report(7, "Heston relative-MSE slope vs self-reference", ok,
         fmt("slope=%.3f band=[%.1f, %.1f], reference=%.6f (N=%zu x %zu), min pairs=%llu, failed=%zu, %.1fs", slope,
             kHestonSlopeLo, kHestonSlopeHi, res.reference, cfg.ref_N, cfg.ref_R,
             static_cast<unsigned long long>(min_pairs), res.failures.size(), secs));
}

std::string cli_output(RunConfig cfg, unsigned threads, bool study) {
  cfg.threads = threads;
  cfg.wall_clock = false;
  std::ostringstream out, log;
  if (study) cli::run_converge(cfg, out, log);
  else cli::run_estimate(cfg, out);
  return out.str();
}

void determinism() {
  std::vector<std::pair<std::string, RunConfig>> cases;
  cases.emplace_back("estimate example-bb", bridge_config(0.4));
  RunConfig heston = cli::preset("example-heston");
  heston.seed = kSeed;
  cases.emplace_back("estimate example-heston", heston);
  RunConfig hyper = cli::preset("bm-hyperplane");
  hyper.seed = kSeed;
  cases.emplace_back("estimate bm-hyperplane", hyper);
  RunConfig study = bridge_config(0.4);
  study.N_list = {256, 512, 1024};
  study.R = 4;
  cases.emplace_back("converge example-bb", study);
  RunConfig hstudy = heston;
  hstudy.N_list = {1024, 2048};
  hstudy.R = 3;
  hstudy.ref_N = 4096;
  hstudy.ref_R = 2;
  cases.emplace_back("converge example-heston", hstudy);

  bool ok = true;
  std::string detail;
  for (const auto& [name, cfg] : cases) {
    const bool is_study = name.rfind("converge", 0) == 0;
    const std::string one = cli_output(cfg, 1, is_study);
    const bool same = one == cli_output(cfg, 2, is_study) && one == cli_output(cfg, 8, is_study) &&
                      one == cli_output(cfg, 1, is_study);
    ok = ok && same;
    detail += name + (same ? " identical; " : " DIFFERS; ");
  }
  report(8, "byte-identical CSV for threads 1, 2, 8", ok, detail);
}

void cutoff_semantics() {
  RunConfig high = bridge_config(0.4);
  high.cutoff = "fixed";
  high.p_bar = kUnreachablePbar;
  const EstimateResult r_high = Experiment(high).run(4096, kSeed);
  RunConfig low = high;
  low.p_bar = kReachablePbar;
  const EstimateResult r_low = Experiment(low).run(4096, kSeed);
  const bool ok = r_high.cutoff_triggered && r_high.H_hat == 0.0 && !r_low.cutoff_triggered && r_low.H_hat > 0.0 &&
                  r_high.p_hat == r_low.p_hat;
  report(9, "cutoff semantics", ok,
         fmt("p_bar=%.2f: H=%g triggered=%d (p_hat=%.4f); p_bar=%.2f: H=%.5f triggered=%d", kUnreachablePbar,
             r_high.H_hat, r_high.cutoff_triggered, r_high.p_hat, kReachablePbar, r_low.H_hat,
             r_low.cutoff_triggered));
}

template <class Fn>
void guarded(int id, const char* name, Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main() {
  guarded(1, "bridge mean / slope", bridge_criteria);
  guarded(3, "OU mean and variance", ou_moments);
  guarded(4, "reverse weight exactness", weight_exactness);
  guarded(5, "fast path vs brute force", matcher_equivalence);
  guarded(6, "set conditioning", set_conditioning);
  guarded(7, "Heston self-convergence", heston_convergence);
  guarded(8, "determinism", determinism);
  guarded(9, "cutoff semantics", cutoff_semantics);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
