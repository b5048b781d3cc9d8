#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "frmc/errors.hpp"
#include "frmc/kernel.hpp"

namespace frmc::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("key '" + key + "': expected a number, got '" + raw + "'");
  }
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + raw + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + raw + "'");
}

template <class T, class Parse>
std::vector<T> parse_list(const std::string& key, const std::string& raw, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(static_cast<T>(parse(key, item)));
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& key, const std::string& raw) {
  return parse_list<double>(key, raw, parse_double);
}

std::vector<std::size_t> parse_sizes(const std::string& key, const std::string& raw) {
  return parse_list<std::size_t>(key, raw, parse_u64);
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"model.name", [](RunConfig& c, auto&, auto& v) { c.model = trim(v); }},
      {"model.dim", [](RunConfig& c, auto& k, auto& v) { c.dim = parse_u64(k, v); }},
      {"model.alpha", [](RunConfig& c, auto& k, auto& v) { c.ou_alpha = parse_double(k, v); }},
      {"model.mu", [](RunConfig& c, auto& k, auto& v) { c.heston.mu = parse_double(k, v); }},
      {"model.gamma", [](RunConfig& c, auto& k, auto& v) { c.heston.gamma = parse_double(k, v); }},
      {"model.beta", [](RunConfig& c, auto& k, auto& v) { c.heston.beta = parse_double(k, v); }},
      {"model.xi", [](RunConfig& c, auto& k, auto& v) { c.heston.xi = parse_double(k, v); }},
      {"model.rho", [](RunConfig& c, auto& k, auto& v) { c.heston.rho = parse_double(k, v); }},
      {"model.x0", [](RunConfig& c, auto& k, auto& v) { c.x0 = parse_doubles(k, v); }},
      {"grid.T", [](RunConfig& c, auto& k, auto& v) { c.T = parse_double(k, v); }},
      {"grid.l", [](RunConfig& c, auto& k, auto& v) { c.l = parse_u64(k, v); }},
      {"grid.tstar", [](RunConfig& c, auto& k, auto& v) { c.t_star = parse_double(k, v); c.K.reset(); }},
      {"grid.K", [](RunConfig& c, auto& k, auto& v) { c.K = parse_u64(k, v); c.t_star.reset(); }},
      {"grid.scheme", [](RunConfig& c, auto&, auto& v) { c.scheme = trim(v); }},
      {"grid.mesh", [](RunConfig& c, auto& k, auto& v) { c.mesh_max = parse_double(k, v); }},
      {"grid.mesh_scale", [](RunConfig& c, auto& k, auto& v) { c.mesh_scale = parse_double(k, v); }},
      {"terminal.kind", [](RunConfig& c, auto&, auto& v) { c.terminal = trim(v); }},
      {"terminal.y", [](RunConfig& c, auto& k, auto& v) { c.y = parse_doubles(k, v); }},
      {"terminal.fixed", [](RunConfig& c, auto& k, auto& v) { c.fixed = parse_doubles(k, v); }},
      {"terminal.law", [](RunConfig& c, auto&, auto& v) { c.free_law = trim(v); }},
      {"terminal.location", [](RunConfig& c, auto& k, auto& v) { c.free_location = parse_double(k, v); }},
      {"terminal.scale", [](RunConfig& c, auto& k, auto& v) { c.free_scale = parse_double(k, v); }},
      {"functional.name", [](RunConfig& c, auto&, auto& v) { c.functional = trim(v); }},
      {"functional.coord", [](RunConfig& c, auto& k, auto& v) { c.coord = parse_u64(k, v); }},
      {"functional.time_index", [](RunConfig& c, auto& k, auto& v) { c.time_index = parse_u64(k, v); }},
      {"kernel.family", [](RunConfig& c, auto&, auto& v) { c.kernel = trim(v); }},
      {"kernel.eta", [](RunConfig& c, auto& k, auto& v) { c.eta = parse_double(k, v); }},
      {"bandwidth.epsilon", [](RunConfig& c, auto& k, auto& v) { c.epsilon = parse_double(k, v); }},
      {"bandwidth.C", [](RunConfig& c, auto& k, auto& v) { c.bw_C = parse_double(k, v); }},
      {"bandwidth.rule", [](RunConfig& c, auto&, auto& v) { c.bw_rule = trim(v); }},
      {"bandwidth.alpha", [](RunConfig& c, auto& k, auto& v) { c.bw_alpha = parse_double(k, v); }},
      {"bandwidth.n_mult", [](RunConfig& c, auto& k, auto& v) { c.bw_n_mult = parse_u64(k, v); }},
      {"estimator.N", [](RunConfig& c, auto& k, auto& v) { c.N = parse_u64(k, v); }},
      {"estimator.M", [](RunConfig& c, auto& k, auto& v) { c.M = parse_u64(k, v); }},
      {"estimator.cutoff", [](RunConfig& c, auto&, auto& v) { c.cutoff = trim(v); }},
      {"estimator.pbar", [](RunConfig& c, auto& k, auto& v) { c.p_bar = parse_double(k, v); }},
      {"estimator.sequence_scale", [](RunConfig& c, auto& k, auto& v) { c.seq_scale = parse_double(k, v); }},
      {"estimator.sequence_decay", [](RunConfig& c, auto& k, auto& v) { c.seq_decay = parse_double(k, v); }},
      {"study.N_list", [](RunConfig& c, auto& k, auto& v) { c.N_list = parse_sizes(k, v); }},
      {"study.R", [](RunConfig& c, auto& k, auto& v) { c.R = parse_u64(k, v); }},
      {"study.target", [](RunConfig& c, auto&, auto& v) { c.target = trim(v); }},
      {"study.reference", [](RunConfig& c, auto&, auto& v) { c.reference = trim(v); }},
      {"study.reference_value", [](RunConfig& c, auto& k, auto& v) { c.reference_value = parse_double(k, v); }},
      {"study.ref_N", [](RunConfig& c, auto& k, auto& v) { c.ref_N = parse_u64(k, v); }},
      {"study.ref_R", [](RunConfig& c, auto& k, auto& v) { c.ref_R = parse_u64(k, v); }},
      {"study.relative", [](RunConfig& c, auto& k, auto& v) { c.relative = parse_bool(k, v); }},
      {"run.seed", [](RunConfig& c, auto& k, auto& v) { c.seed = parse_u64(k, v); }},
      {"run.threads", [](RunConfig& c, auto& k, auto& v) { c.threads = static_cast<unsigned>(parse_u64(k, v)); }},
      {"run.out", [](RunConfig& c, auto&, auto& v) { c.out = trim(v); }},
      {"run.wall_clock", [](RunConfig& c, auto& k, auto& v) { c.wall_clock = parse_bool(k, v); }},
      {"run.preset", [](RunConfig& c, auto&, auto& v) { c = preset(trim(v)); }},
  };
  return table;
}

std::vector<std::size_t> powers_of_two(int lo, int hi) {
  std::vector<std::size_t> out;
  for (int e = lo; e <= hi; ++e) out.push_back(std::size_t{1} << e);
  return out;
}

FreeLaw free_law_from_name(const std::string& name) {
  if (name == "normal") return FreeLaw::normal;
  if (name == "laplace") return FreeLaw::laplace;
  throw ConfigError("key 'terminal.law': unknown law '" + name + "'");
}

}  // namespace

std::vector<std::string> preset_names() { return {"example-bb", "example-heston", "ou-density", "bm-hyperplane"}; }

RunConfig preset(const std::string& name) {
  RunConfig c;
  if (name == "example-bb") {
    c.model = "bm";
    c.dim = 2;
    c.x0 = {0.0, 0.0};
    c.T = 1.0;
    c.l = 10;
    c.t_star = 0.4;
    c.scheme = "exact";
    c.terminal = "point";
    c.y = {0.0, 0.0};
    c.functional = "bridge_mean_square";
    c.kernel = "gaussian";
    c.eta = 1e-3;
    c.bw_C = 1.0;
    c.bw_alpha = 0.4;
    c.N = 4096;
    c.N_list = powers_of_two(8, 13);
    c.R = 20;
    c.reference = "bb";
  } else if (name == "example-heston") {
    c.model = "heston";
    c.dim = 2;
    c.x0 = {10.0, 0.25};
    c.T = 1.0 / 12.0;
    c.l = 30;
    c.K = 15;
    c.scheme = "euler";
    c.mesh_max = 1.0 / 360.0;
    c.mesh_scale = 0.05;
    c.terminal = "hyperplane";
    c.fixed = {12.0};
    c.free_law = "normal";
    c.functional = "realized_variance";
    c.coord = 0;
    c.kernel = "gaussian";
    c.eta = 1e-3;
    c.bw_C = 1.0;
    c.bw_alpha = 0.4;
    c.bw_n_mult = 4;
    c.N = 1024;
    c.N_list = powers_of_two(10, 13);
    c.R = 50;
    c.reference = "self";
    c.ref_N = std::size_t{1} << 16;
    c.ref_R = 8;
    c.relative = true;
  } else if (name == "ou-density") {
    c.model = "ou";
    c.dim = 1;
    c.ou_alpha = 1.0;
    c.x0 = {0.0};
    c.T = 1.0;
    c.l = 2;
    c.K = 1;
    c.scheme = "exact";
    c.terminal = "point";
    c.y = {0.0};
    c.functional = "one";
    c.kernel = "gaussian";
    c.eta = 0.0;
    c.epsilon = 0.1;
    c.N = 1000;
    c.N_list = {250, 500, 1000, 2000};
    c.R = 50;
    c.target = "p";
    c.reference = "density";
  } else if (name == "bm-hyperplane") {
    c.model = "bm";
    c.dim = 2;
    c.x0 = {0.0, 0.0};
    c.T = 1.0;
    c.l = 2;
    c.K = 1;
    c.scheme = "exact";
    c.terminal = "hyperplane";
    c.fixed = {0.0};
    c.free_law = "normal";
    c.functional = "coordinate_square";
    c.time_index = 0;
    c.coord = 0;
    c.kernel = "gaussian";
    c.eta = 1e-3;
    c.bw_C = 1.0;
    c.bw_alpha = 0.4;
    c.N = 4096;
    c.N_list = powers_of_two(8, 12);
    c.R = 20;
    c.reference = "value";
    c.reference_value = 0.25;
  } else {
    std::string known;
    for (const auto& p : preset_names()) known += (known.empty() ? "" : ", ") + p;
    throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
  }
  return c;
}

void set_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown configuration key '" + key + "'");
  it->second(cfg, key, value);
}

void load_ini(RunConfig& cfg, std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  // a preset, if any, is applied first so the remaining keys override it
  if (const auto run = tree.get_child_optional("run")) {
    if (const auto p = run->get_optional<std::string>("preset")) set_key(cfg, "run.preset", *p);
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("configuration key '" + section + "' is outside a section");
    for (const auto& [key, leaf] : body) {
      const std::string full = section + "." + key;
      if (full == "run.preset") continue;
      set_key(cfg, full, leaf.data());
    }
  }
}

void load_ini(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  load_ini(cfg, in);
}

// --- Experiment ----------------------------------------------------------------------

Experiment::Experiment(const RunConfig& cfg) : cfg_(cfg) {
  if (cfg_.model.empty()) throw ConfigError("missing required key 'model.name'");
  if (cfg_.model == "bm") {
    model_ = brownian_motion(cfg_.dim);
  } else if (cfg_.model == "ou") {
    model_ = ornstein_uhlenbeck(cfg_.ou_alpha);
  } else if (cfg_.model == "heston") {
    model_ = heston(cfg_.heston);
  } else {
    throw ConfigError("key 'model.name': unknown model '" + cfg_.model + "'");
  }
  const std::size_t d = model_.dim;
  if (cfg_.x0.empty()) cfg_.x0.assign(d, 0.0);
  if (cfg_.x0.size() != d) throw ConfigError("key 'model.x0': expected " + std::to_string(d) + " values");

  std::size_t K = 0;
  if (cfg_.K) {
    K = *cfg_.K;
  } else if (cfg_.t_star) {
    const double k = *cfg_.t_star * static_cast<double>(cfg_.l) / cfg_.T;
    if (!(std::abs(k - std::round(k)) < 1e-9)) {
      throw ConfigError("key 'grid.tstar': t* must be a multiple of T / l");
    }
    K = static_cast<std::size_t>(std::llround(k));
  } else {
    throw ConfigError("missing key 'grid.tstar' or 'grid.K'");
  }
  try {
    grid_ = uniform_grid(cfg_.T, cfg_.l, K);
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("section [grid]: ") + e.what());
  }

  if (cfg_.scheme != "exact" && cfg_.scheme != "euler") {
    throw ConfigError("key 'grid.scheme': expected exact or euler, got '" + cfg_.scheme + "'");
  }
  if (cfg_.scheme == "euler" && !(cfg_.mesh_max > 0.0)) throw ConfigError("key 'grid.mesh' must be positive");
  reverse_ = reverse_coefficients(model_, cfg_.T);

  if (cfg_.terminal == "point") {
    if (cfg_.y.empty()) cfg_.y.assign(d, 0.0);
    if (cfg_.y.size() != d) throw ConfigError("key 'terminal.y': expected " + std::to_string(d) + " values");
    start_ = cfg_.y;
  } else if (cfg_.terminal == "hyperplane") {
    if (cfg_.fixed.size() >= d) throw ConfigError("key 'terminal.fixed': a hyperplane needs a free coordinate");
    if (!(cfg_.free_scale > 0.0)) throw ConfigError("key 'terminal.scale' must be positive");
    start_ = hyperplane_start(d, cfg_.fixed, free_law_from_name(cfg_.free_law), cfg_.free_location, cfg_.free_scale);
  } else {
    throw ConfigError("key 'terminal.kind': expected point or hyperplane, got '" + cfg_.terminal + "'");
  }

  if (cfg_.functional == "bridge_mean_square") {
    g_ = bridge_mean_square();
  } else if (cfg_.functional == "realized_variance") {
    if (cfg_.coord >= d) throw ConfigError("key 'functional.coord' out of range");
    g_ = realized_variance(cfg_.coord);
  } else if (cfg_.functional == "coordinate_square") {
    if (cfg_.coord >= d) throw ConfigError("key 'functional.coord' out of range");
    if (cfg_.time_index + 1 >= cfg_.l) throw ConfigError("key 'functional.time_index' out of range");
    g_ = coordinate_square(cfg_.time_index, cfg_.coord);
  } else if (cfg_.functional == "one") {
    g_ = constant_one();
  } else {
    throw ConfigError("key 'functional.name': unknown functional '" + cfg_.functional + "'");
  }

  try {
    kernel_ = make_kernel(kernel_family_from_name(cfg_.kernel), d, cfg_.eta);
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("key 'kernel.eta': ") + e.what());
  }

  if (cfg_.cutoff == "none") {
    cutoff_ = Cutoff::disabled();
  } else if (cfg_.cutoff == "fixed") {
    if (!(cfg_.p_bar > 0.0)) throw ConfigError("key 'estimator.pbar' must be positive for a fixed cutoff");
    cutoff_ = Cutoff::fixed(cfg_.p_bar);
  } else if (cfg_.cutoff == "sequence") {
    cutoff_ = Cutoff::sequence(cfg_.seq_scale, cfg_.seq_decay);
  } else {
    throw ConfigError("key 'estimator.cutoff': expected none, fixed or sequence, got '" + cfg_.cutoff + "'");
  }
  if (cfg_.bw_rule != "fixed" && cfg_.bw_rule != "auto") {
    throw ConfigError("key 'bandwidth.rule': expected fixed or auto, got '" + cfg_.bw_rule + "'");
  }
  if (cfg_.bw_n_mult < 1) throw ConfigError("key 'bandwidth.n_mult' must be at least 1");
  if (cfg_.epsilon && !(*cfg_.epsilon > 0.0)) throw ConfigError("key 'bandwidth.epsilon' must be positive");
}

double Experiment::epsilon_for(std::size_t N) const {
  if (cfg_.epsilon) return *cfg_.epsilon;
  const BandwidthRule rule = cfg_.bw_rule == "auto" ? BandwidthRule::automatic() : BandwidthRule::fixed(cfg_.bw_alpha);
  try {
    return bandwidth(N * cfg_.bw_n_mult, model_.dim, cfg_.bw_C, rule);
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("section [bandwidth]: ") + e.what());
  }
}

Scheme Experiment::scheme_for(std::size_t N) const {
  if (cfg_.scheme == "exact") return Scheme::exact();
  double h = cfg_.mesh_max;
  if (cfg_.mesh_scale > 0.0) h = std::min(h, std::sqrt(cfg_.mesh_scale / static_cast<double>(N)));
  return Scheme::euler(substeps_for_mesh(grid_, h));
}

EstimatorConfig Experiment::estimator_for(std::size_t N) const {
  EstimatorConfig e;
  e.epsilon = epsilon_for(N);
  e.kernel = kernel_;
  e.cutoff = cutoff_;
  e.threads = cfg_.threads;
  return e;
}

std::size_t Experiment::reverse_count(std::size_t N) const {
  // a fixed M only applies to the configured N; studies pair M = N
  if (cfg_.M && N == cfg_.N) return *cfg_.M;
  return N;
}

ForwardBatch Experiment::forward(std::size_t N, std::uint64_t seed) const {
  return simulate_forward(model_, cfg_.x0, grid_, scheme_for(N), seed, N, cfg_.threads);
}

ReverseBatch Experiment::reverse(std::size_t M, std::size_t N, std::uint64_t seed) const {
  return simulate_reverse(reverse_, start_, grid_, scheme_for(N), seed, M, cfg_.threads);
}

EstimateResult Experiment::run(std::size_t N, std::uint64_t seed) const {
  if (N == 0) throw ValidationError("key 'estimator.N': N must be positive");
  const std::size_t M = reverse_count(N);
  if (M == 0) throw ValidationError("key 'estimator.M': M must be positive");
  const ForwardBatch fwd = forward(N, seed);
  const ReverseBatch rev = reverse(M, N, seed);
  const EstimatorConfig ecfg = estimator_for(N);
  if (std::holds_alternative<StartDistribution>(start_)) return estimate_set(fwd, rev, g_, ecfg);
  return estimate_point(fwd, rev, g_, ecfg);
}

}  // namespace frmc::cli
