#include "frmc/grid.hpp"

#include <cmath>
#include <string>

#include "frmc/errors.hpp"

namespace frmc {
namespace {

void check_increasing(const std::vector<double>& v, const char* name) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw ValidationError(std::string(name) + "[" + std::to_string(i) + "] is not finite");
    if (i > 0 && !(v[i] > v[i - 1])) {
      throw ValidationError(std::string(name) + " not strictly increasing at index " + std::to_string(i));
    }
  }
}

}  // namespace

TimeGrid make_grid(std::vector<double> s_times, std::vector<double> t_times) {
  if (s_times.size() < 2) throw ValidationError("s_times needs at least two points (K >= 1)");
  if (t_times.size() < 2) throw ValidationError("t_times needs at least two points (L >= 1)");
  check_increasing(s_times, "s_times");
  check_increasing(t_times, "t_times");
  if (s_times.back() != t_times.front()) {
    throw ValidationError("s_times[" + std::to_string(s_times.size() - 1) + "] must equal t_times[0] (t*)");
  }
  return TimeGrid{std::move(s_times), std::move(t_times)};
}

TimeGrid uniform_grid(double T, std::size_t l, std::size_t K) {
  if (!(T > 0.0)) throw ValidationError("uniform_grid: T must be positive");
  if (K < 1 || K >= l) throw ValidationError("uniform_grid: need 1 <= K < l");
  std::vector<double> s(K + 1), t(l - K + 1);
  const auto at = [&](std::size_t i) { return static_cast<double>(i) * T / static_cast<double>(l); };
  for (std::size_t i = 0; i <= K; ++i) s[i] = at(i);
  for (std::size_t j = 0; j <= l - K; ++j) t[j] = at(K + j);
  return make_grid(std::move(s), std::move(t));
}

std::vector<double> hat_times(const TimeGrid& grid) {
  const std::size_t L = grid.L();
  std::vector<double> out(L);
  for (std::size_t i = 1; i <= L; ++i) out[i - 1] = grid.horizon() - grid.t_times[L - i];
  return out;
}

}  // namespace frmc
