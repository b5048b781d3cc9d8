// frmc: forward-reverse Monte Carlo estimates, convergence studies and
// closed-form references from the command line.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "frmc/errors.hpp"
#include "frmc/format.hpp"
#include "frmc/oracle.hpp"

namespace {

using frmc::cli::RunConfig;

struct Overrides {
  std::optional<std::string> preset;
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> out;
  std::optional<std::size_t> N, M, l, K, R, ref_N, ref_R;
  std::optional<double> tstar, epsilon, eta, pbar;
  std::optional<std::string> cutoff;
  std::vector<std::size_t> N_list;
  std::vector<std::string> sets;
  bool no_wall_clock = false;
};

void add_run_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("preset", o.preset, "built-in experiment (example-bb, example-heston, ou-density, bm-hyperplane)");
  cmd->add_option("--config", o.config, "INI configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--threads", o.threads, "worker threads (0 = hardware concurrency)");
  cmd->add_option("--out", o.out, "write CSV here instead of standard output");
  cmd->add_option("--N", o.N, "forward trajectories");
  cmd->add_option("--M", o.M, "reverse trajectories (default N)");
  cmd->add_option("--l", o.l, "grid segments");
  cmd->add_option("--K", o.K, "forward grid steps");
  cmd->add_option("--tstar", o.tstar, "meeting time t*");
  cmd->add_option("--epsilon", o.epsilon, "fixed bandwidth");
  cmd->add_option("--eta", o.eta, "kernel truncation threshold (0 = none)");
  cmd->add_option("--cutoff", o.cutoff, "none | fixed | sequence");
  cmd->add_option("--pbar", o.pbar, "density lower bound for the fixed cutoff");
  cmd->add_option("--R", o.R, "replications per N");
  cmd->add_option("--N-list", o.N_list, "study sample sizes")->delimiter(',');
  cmd->add_option("--ref-N", o.ref_N, "self-reference sample size");
  cmd->add_option("--ref-R", o.ref_R, "self-reference replications");
  cmd->add_option("--set", o.sets, "section.key=value override, repeatable");
  cmd->add_flag("--no-wall-clock", o.no_wall_clock, "report wall_ms as 0 for byte-comparable output");
}

RunConfig resolve(const Overrides& o) {
  RunConfig cfg = o.preset ? frmc::cli::preset(*o.preset) : RunConfig{};
  if (o.config) frmc::cli::load_ini(cfg, *o.config);
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw frmc::ConfigError("--set expects section.key=value, got '" + s + "'");
    frmc::cli::set_key(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  if (o.out) cfg.out = *o.out;
  if (o.N) cfg.N = *o.N;
  if (o.M) cfg.M = *o.M;
  if (o.l) cfg.l = *o.l;
  if (o.K) {
    cfg.K = *o.K;
    cfg.t_star.reset();
  }
  if (o.tstar) {
    cfg.t_star = *o.tstar;
    cfg.K.reset();
  }
  if (o.epsilon) cfg.epsilon = *o.epsilon;
  if (o.eta) cfg.eta = *o.eta;
  if (o.cutoff) cfg.cutoff = *o.cutoff;
  if (o.pbar) cfg.p_bar = *o.pbar;
  if (o.R) cfg.R = *o.R;
  if (!o.N_list.empty()) cfg.N_list = o.N_list;
  if (o.ref_N) cfg.ref_N = *o.ref_N;
  if (o.ref_R) cfg.ref_R = *o.ref_R;
  if (o.no_wall_clock) cfg.wall_clock = false;
  return cfg;
}

template <class Fn>
void with_output(const RunConfig& cfg, Fn&& fn) {
  if (cfg.out.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream file(cfg.out);
  if (!file) throw frmc::ConfigError("cannot open output file '" + cfg.out + "'");
  fn(file);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forward-reverse Monte Carlo for pinned diffusions"};
  app.require_subcommand(1);

  Overrides est_opts, conv_opts;
  auto* estimate = app.add_subcommand("estimate", "one forward-reverse estimate as a CSV row");
  add_run_options(estimate, est_opts);
  auto* converge = app.add_subcommand("converge", "MSE convergence study as CSV");
  add_run_options(converge, conv_opts);

  auto* oracle = app.add_subcommand("oracle", "closed-form reference values");
  oracle->require_subcommand(1);
  std::size_t bb_l = 10;
  auto* bb = oracle->add_subcommand("bb-truth", "bridge functional truth for l segments");
  bb->add_option("--l", bb_l, "segments")->capture_default_str();

  frmc::OUParams ou;
  auto add_ou = [&ou](CLI::App* c, bool with_N) {
    c->add_option("--alpha", ou.alpha)->capture_default_str();
    c->add_option("--x", ou.x)->capture_default_str();
    c->add_option("--y", ou.y)->capture_default_str();
    c->add_option("--T", ou.T)->capture_default_str();
    c->add_option("--tstar", ou.t_star)->capture_default_str();
    c->add_option("--epsilon", ou.epsilon)->capture_default_str();
    if (with_N) c->add_option("--N", ou.N)->capture_default_str();
  };
  auto* ou_mean = oracle->add_subcommand("ou-mean", "expectation of h_hat for the OU example");
  add_ou(ou_mean, false);
  auto* ou_var = oracle->add_subcommand("ou-var", "variance of h_hat for the OU example");
  add_ou(ou_var, true);

  std::string density_model = "bm";
  double d_alpha = 1.0, d_t = 0.0, d_x = 0.0, d_s = 1.0, d_y = 0.0;
  auto* density = oracle->add_subcommand("density", "transition density p(t, x, s, y)");
  density->add_option("--model", density_model, "bm | ou")->capture_default_str();
  density->add_option("--alpha", d_alpha)->capture_default_str();
  density->add_option("--t", d_t)->capture_default_str();
  density->add_option("--x", d_x)->capture_default_str();
  density->add_option("--s", d_s)->capture_default_str();
  density->add_option("--y", d_y)->capture_default_str();

  frmc::cli::BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench-matcher", "time the neighbor index against a brute-force scan");
  bench_cmd->add_option("--N", bench.N)->capture_default_str();
  bench_cmd->add_option("--dim", bench.dim)->capture_default_str();
  bench_cmd->add_option("--radius", bench.radius)->capture_default_str();
  bench_cmd->add_option("--queries", bench.queries)->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*estimate) {
      const RunConfig cfg = resolve(est_opts);
      with_output(cfg, [&](std::ostream& os) { frmc::cli::run_estimate(cfg, os); });
    } else if (*converge) {
      const RunConfig cfg = resolve(conv_opts);
      with_output(cfg, [&](std::ostream& os) { frmc::cli::run_converge(cfg, os, std::cerr); });
    } else if (*oracle) {
      double value = 0.0;
      if (*bb) {
        value = frmc::bb_truth(bb_l);
      } else if (*ou_mean) {
        value = frmc::ou_mean_h(ou);
      } else if (*ou_var) {
        value = frmc::ou_var_h(ou);
      } else {
        if (density_model != "bm" && density_model != "ou") {
          throw frmc::ConfigError("--model expects bm or ou, got '" + density_model + "'");
        }
        const auto m = density_model == "ou" ? frmc::DensityModel::ou : frmc::DensityModel::bm;
        value = frmc::transition_density(m, d_alpha, d_t, d_x, d_s, d_y);
      }
      std::cout << frmc::format_double(value) << '\n';
    } else if (*bench_cmd) {
      frmc::cli::run_bench_matcher(bench, std::cout);
    }
  } catch (const frmc::Error& e) {
    std::cerr << "frmc: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
