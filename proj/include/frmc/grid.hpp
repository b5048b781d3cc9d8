#pragma once

#include <cstddef>
#include <vector>

namespace frmc {

/// Composite grid s_0 < ... < s_K = t* = t_0 < ... < t_L = T.
struct TimeGrid {
  std::vector<double> s_times;
  std::vector<double> t_times;

  std::size_t K() const { return s_times.size() - 1; }
  std::size_t L() const { return t_times.size() - 1; }
  double start() const { return s_times.front(); }
  double t_star() const { return t_times.front(); }
  double horizon() const { return t_times.back(); }
};

/// Validates and returns the grid; ValidationError names the offending index.
TimeGrid make_grid(std::vector<double> s_times, std::vector<double> t_times);

/// Grid with s_i = i T / l and t_j = (K + j) T / l, L = l - K.
TimeGrid uniform_grid(double T, std::size_t l, std::size_t K);

/// Reverse sampling times t^_i = T - t_{L-i}, i = 1..L.
std::vector<double> hat_times(const TimeGrid& grid);

}  // namespace frmc
