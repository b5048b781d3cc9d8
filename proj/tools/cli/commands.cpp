#include "commands.hpp"

#include <chrono>
#include <ostream>

#include "frmc/errors.hpp"
#include "frmc/format.hpp"
#include "frmc/matcher.hpp"
#include "frmc/oracle.hpp"
#include "frmc/rng.hpp"

namespace frmc::cli {
namespace {

std::uint64_t require_seed(const RunConfig& cfg) {
  if (!cfg.seed) throw ConfigError("missing required key 'run.seed' (use --seed)");
  return *cfg.seed;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

void run_estimate(const RunConfig& cfg, std::ostream& out) {
  const std::uint64_t seed = require_seed(cfg);
  if (cfg.N == 0) throw ValidationError("key 'estimator.N': N must be positive");
  if (cfg.M && *cfg.M == 0) throw ValidationError("key 'estimator.M': M must be positive");
  const auto started = std::chrono::steady_clock::now();
  const Experiment exp(cfg);
  const EstimateResult r = exp.run(cfg.N, seed);
  const double wall = cfg.wall_clock ? elapsed_ms(started) : 0.0;
  const ClassicLocaleGuard classic(out);
  out << kEstimateHeader << '\n'
      << r.N << ',' << r.M << ',' << format_double(r.epsilon) << ',' << seed << ',' << format_double(r.H_hat) << ','
      << format_double(r.h_hat) << ',' << format_double(r.p_hat) << ',' << r.pairs << ','
      << (r.cutoff_triggered ? 1 : 0) << ',' << format_double(wall) << '\n';
}

void run_converge(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  const std::uint64_t seed = require_seed(cfg);
  const Experiment exp(cfg);
  StudyOptions opts;
  opts.N_list = cfg.N_list;
  opts.replications = cfg.R;
  opts.seed = seed;
  opts.relative = cfg.relative;
  if (cfg.reference == "bb") {
    opts.reference.value = bb_truth(cfg.l);
  } else if (cfg.reference == "value") {
    opts.reference.value = cfg.reference_value;
  } else if (cfg.reference == "density") {
    if ((cfg.model != "bm" && cfg.model != "ou") || cfg.dim != 1 || cfg.terminal != "point") {
      throw ConfigError("key 'study.reference': density needs a 1-d bm or ou model with a point terminal");
    }
    const auto model = cfg.model == "ou" ? DensityModel::ou : DensityModel::bm;
    opts.reference.value = transition_density(model, cfg.ou_alpha, 0.0, cfg.x0.at(0), cfg.T, cfg.y.at(0));
  } else if (cfg.reference == "self") {
    opts.reference.self_N = cfg.ref_N;
    opts.reference.self_R = cfg.ref_R;
  } else {
    throw ConfigError("key 'study.reference': expected self, value, bb or density, got '" + cfg.reference + "'");
  }
  if (cfg.target != "H" && cfg.target != "p") {
    throw ConfigError("key 'study.target': expected H or p, got '" + cfg.target + "'");
  }
  const bool density = cfg.target == "p";
  const auto run = [&](std::size_t N, std::uint64_t s) {
    EstimateResult r = exp.run(N, s);
    if (density) r.H_hat = r.p_hat;
    return r;
  };
  const StudyResult res = convergence_study(run, [&](std::size_t N) { return exp.epsilon_for(N); }, opts);
  for (const auto& f : res.failures) log << "replication failed: " << f << '\n';
  const ClassicLocaleGuard classic(out);
  out << kConvergeHeader << '\n';
  for (const auto& row : res.rows) {
    out << row.N << ',' << format_double(row.epsilon) << ',' << format_double(row.mean) << ','
        << format_double(row.bias2) << ',' << format_double(row.variance) << ',' << format_double(row.mse) << ','
        << row.replications << '\n';
  }
  out << "# slope=" << (res.slope ? format_double(*res.slope) : std::string("NA")) << '\n';
}

void run_bench_matcher(const BenchOptions& opts, std::ostream& out) {
  if (opts.N == 0 || opts.queries == 0) throw ValidationError("bench-matcher needs positive N and query count");
  std::vector<double> points(opts.N * opts.dim), centers(opts.queries * opts.dim);
  RandomStream rng(opts.seed, StreamRole::bench, 0);
  for (double& p : points) p = rng.uniform();
  for (double& c : centers) c = rng.uniform();

  auto t0 = std::chrono::steady_clock::now();
  const SpatialIndex index(points, opts.dim, opts.radius);
  const double build_ms = elapsed_ms(t0);

  std::vector<std::size_t> hits;
  std::uint64_t fast_pairs = 0;
  t0 = std::chrono::steady_clock::now();
  for (std::size_t q = 0; q < opts.queries; ++q) {
    index.query({centers.data() + q * opts.dim, opts.dim}, opts.radius, hits);
    fast_pairs += hits.size();
  }
  const double query_ms = elapsed_ms(t0);

  std::uint64_t brute_pairs = 0;
  const double r2 = opts.radius * opts.radius;
  t0 = std::chrono::steady_clock::now();
  for (std::size_t q = 0; q < opts.queries; ++q) {
    const std::span<const double> c(centers.data() + q * opts.dim, opts.dim);
    for (std::size_t n = 0; n < opts.N; ++n) {
      if (squared_distance(index.point(n), c) <= r2) ++brute_pairs;
    }
  }
  const double brute_ms = elapsed_ms(t0);
  if (fast_pairs != brute_pairs) throw NumericError("index and brute-force pair counts differ");

  const ClassicLocaleGuard classic(out);
  out << "N,dim,radius,queries,cells,pairs,build_ms,query_ms,brute_ms\n"
      << opts.N << ',' << opts.dim << ',' << format_double(opts.radius) << ',' << opts.queries << ','
      << index.cell_count() << ',' << fast_pairs << ',' << format_double(build_ms) << ',' << format_double(query_ms)
      << ',' << format_double(brute_ms) << '\n';
}

}  // namespace frmc::cli
