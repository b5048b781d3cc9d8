#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>

#include "run_config.hpp"

namespace frmc::cli {

inline constexpr const char* kEstimateHeader = "N,M,epsilon,seed,H_hat,h_hat,p_hat,pairs,cutoff,wall_ms";
inline constexpr const char* kConvergeHeader = "N,epsilon,mean,bias2,variance,mse,replications";

/// One estimate; writes the header and one row.
void run_estimate(const RunConfig& cfg, std::ostream& out);

/// Convergence study; writes the header, one row per N and a closing
/// "# slope=<value|NA>" line. Replication diagnostics go to `log`.
void run_converge(const RunConfig& cfg, std::ostream& out, std::ostream& log);

struct BenchOptions {
  std::size_t N = 100000;
  std::size_t dim = 2;
  double radius = 0.05;
  std::size_t queries = 10000;
  std::uint64_t seed = 1;
};

/// Index build and query timings against a brute-force scan on uniform points.
void run_bench_matcher(const BenchOptions& opts, std::ostream& out);

}  // namespace frmc::cli
