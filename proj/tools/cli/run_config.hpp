#pragma once

// Run configuration for the frmc command line: presets, INI files and flag
// overrides resolve into one RunConfig, which builds an Experiment.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "frmc/estimator.hpp"
#include "frmc/grid.hpp"
#include "frmc/model.hpp"
#include "frmc/paths.hpp"

namespace frmc::cli {

struct RunConfig {
  // [model]
  std::string model;  ///< bm | ou | heston
  std::size_t dim = 2;
  double ou_alpha = 1.0;
  HestonParams heston;
  std::vector<double> x0;

  // [grid]
  double T = 1.0;
  std::size_t l = 10;
  std::optional<double> t_star;
  std::optional<std::size_t> K;
  std::string scheme = "exact";  ///< exact | euler
  double mesh_max = 0.0;         ///< euler mesh h = min(mesh_max, sqrt(mesh_scale / N))
  double mesh_scale = 0.0;       ///< 0 means h = mesh_max

  // [terminal]
  std::string terminal = "point";  ///< point | hyperplane
  std::vector<double> y;
  std::vector<double> fixed;       ///< hyperplane: values of the leading coordinates
  std::string free_law = "normal";
  double free_location = 0.0;
  double free_scale = 1.0;

  // [functional]
  std::string functional = "bridge_mean_square";
  std::size_t coord = 0;
  std::size_t time_index = 0;

  // [kernel]
  std::string kernel = "gaussian";
  double eta = 1e-3;  ///< 0 disables truncation

  // [bandwidth]
  std::optional<double> epsilon;  ///< fixed value; otherwise C (n_mult N)^{-alpha}
  double bw_C = 1.0;
  std::string bw_rule = "fixed";  ///< fixed | auto
  double bw_alpha = 0.4;
  std::size_t bw_n_mult = 1;

  // [estimator]
  std::size_t N = 4096;
  std::optional<std::size_t> M;  ///< defaults to N
  std::string cutoff = "none";   ///< none | fixed | sequence
  double p_bar = 0.0;
  double seq_scale = 1.0;
  double seq_decay = 0.1;

  // [study]
  std::vector<std::size_t> N_list;
  std::size_t R = 20;
  std::string target = "H";        ///< H | p: studied estimate, H_hat or the density p_hat
  std::string reference = "self";  ///< self | value | bb | density
  double reference_value = 0.0;
  std::size_t ref_N = 0;
  std::size_t ref_R = 1;
  bool relative = false;

  // [run]
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::string out;
  bool wall_clock = true;
};

/// Names accepted by preset().
std::vector<std::string> preset_names();
RunConfig preset(const std::string& name);

/// Sets one key given as "section.key"; throws ConfigError naming the key.
void set_key(RunConfig& cfg, const std::string& key, const std::string& value);
/// Applies every key of an INI file.
void load_ini(RunConfig& cfg, const std::string& path);
void load_ini(RunConfig& cfg, std::istream& in);

/// Everything needed to run replications of one configuration.
class Experiment {
 public:
  explicit Experiment(const RunConfig& cfg);

  const RunConfig& config() const { return cfg_; }
  const TimeGrid& grid() const { return grid_; }
  std::size_t dim() const { return model_.dim; }
  double epsilon_for(std::size_t N) const;
  Scheme scheme_for(std::size_t N) const;
  EstimatorConfig estimator_for(std::size_t N) const;
  std::size_t reverse_count(std::size_t N) const;

  ForwardBatch forward(std::size_t N, std::uint64_t seed) const;
  ReverseBatch reverse(std::size_t M, std::size_t N, std::uint64_t seed) const;
  EstimateResult run(std::size_t N, std::uint64_t seed) const;

 private:
  RunConfig cfg_;
  ModelSpec model_;
  ReverseSpec reverse_;
  TimeGrid grid_;
  ReverseStart start_;
  Functional g_;
  KernelSpec kernel_;
  Cutoff cutoff_;
};

}  // namespace frmc::cli
