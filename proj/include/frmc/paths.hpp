#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "frmc/grid.hpp"
#include "frmc/model.hpp"
#include "frmc/rng.hpp"

namespace frmc {

struct Scheme {
  enum class Kind { exact, euler };
  Kind kind = Kind::euler;
  std::size_t substeps = 1;  ///< Euler steps per grid interval

  static Scheme exact() { return {Kind::exact, 1}; }
  static Scheme euler(std::size_t substeps) { return {Kind::euler, substeps}; }
};

/// Smallest substep count whose uniform refinement of every grid interval has mesh <= h.
std::size_t substeps_for_mesh(const TimeGrid& grid, double h);

/// Forward trajectories at s_1..s_K; states are [n_traj x K x d].
struct ForwardBatch {
  std::size_t n_traj = 0;
  std::size_t steps = 0;
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  std::vector<double> states;

  std::span<const double> path(std::size_t n) const { return {states.data() + n * steps * dim, steps * dim}; }
  std::span<const double> state(std::size_t n, std::size_t k) const {
    return {states.data() + (n * steps + k) * dim, dim};
  }
  /// State at t* = s_K.
  std::span<const double> endpoint(std::size_t n) const { return state(n, steps - 1); }
  /// Flat [n_traj x d] copy of the t* states.
  std::vector<double> endpoints() const;
};

/// Reverse trajectories at t^_1..t^_L with log of the weight at t^_L.
struct ReverseBatch {
  std::size_t m_traj = 0;
  std::size_t steps = 0;
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  std::vector<double> states;      ///< [m_traj x L x d]
  std::vector<double> log_weight;  ///< [m_traj]
  std::vector<double> starts;      ///< [m_traj x d], Y(0) of each trajectory
  std::vector<double> start_density;  ///< [m_traj], phi(xi^m); empty for a fixed start

  bool randomized_start() const { return !start_density.empty(); }
  std::span<const double> path(std::size_t m) const { return {states.data() + m * steps * dim, steps * dim}; }
  std::span<const double> state(std::size_t m, std::size_t i) const {
    return {states.data() + (m * steps + i) * dim, dim};
  }
  /// State at t^_L.
  std::span<const double> endpoint(std::size_t m) const { return state(m, steps - 1); }
  std::span<const double> start(std::size_t m) const { return {starts.data() + m * dim, dim}; }
};

/// Law of a random reverse start xi with density phi > 0 w.r.t. its reference measure.
struct StartDistribution {
  std::string name;
  std::size_t dim = 0;
  std::function<void(RandomStream& rng, std::span<double> out)> draw;
  std::function<double(std::span<const double> x)> density;
};

enum class FreeLaw { normal, laplace };

/// Start on the hyperplane {x : x^1 = c^1, ..., x^k = c^k}; the remaining d - k
/// coordinates are independent draws of `law` with the given location/scale.
/// The density is with respect to Lebesgue measure on the free coordinates.
StartDistribution hyperplane_start(std::size_t d, std::vector<double> fixed, FreeLaw law = FreeLaw::normal,
                                   double location = 0.0, double scale = 1.0);

/// Start over all of R^d (every coordinate free).
StartDistribution full_space_start(std::size_t d, FreeLaw law = FreeLaw::normal, double location = 0.0,
                                   double scale = 1.0);

using ReverseStart = std::variant<std::vector<double>, StartDistribution>;

ForwardBatch simulate_forward(const ModelSpec& model, std::span<const double> x0, const TimeGrid& grid,
                              const Scheme& scheme, std::uint64_t seed, std::size_t n_traj, unsigned threads = 1);

ReverseBatch simulate_reverse(const ReverseSpec& rev, const ReverseStart& start, const TimeGrid& grid,
                              const Scheme& scheme, std::uint64_t seed, std::size_t m_traj, unsigned threads = 1);

/// Debug dumps: header traj,time_index,coordinate,value (reverse adds log_weight).
void write_csv(std::ostream& os, const ForwardBatch& batch);
void write_csv(std::ostream& os, const ReverseBatch& batch);

}  // namespace frmc
