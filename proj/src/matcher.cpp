#include "frmc/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "frmc/errors.hpp"
#include "frmc/rng.hpp"

namespace frmc {

std::size_t SpatialIndex::KeyHash::operator()(const CellKey& key) const noexcept {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (std::int64_t c : key) h = mix64(h ^ static_cast<std::uint64_t>(c));
  return static_cast<std::size_t>(h);
}

SpatialIndex::SpatialIndex(std::span<const double> points, std::size_t dim, double radius)
    : dim_(dim), cell_size_(radius), points_(points.begin(), points.end()) {
  if (dim == 0 || dim > kMaxIndexDim) {
    throw ValidationError("spatial index supports dimensions 1.." + std::to_string(kMaxIndexDim));
  }
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ValidationError("spatial index radius must be positive");
  if (points.size() % dim != 0) throw ValidationError("point array is not a multiple of the dimension");
  const std::size_t n = points.size() / dim;
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = point(i);
    for (double v : p) {
      if (!std::isfinite(v)) throw ValidationError("non-finite point at index " + std::to_string(i));
    }
    cells_[cell_of(p)].push_back(i);
  }
}

SpatialIndex::CellKey SpatialIndex::cell_of(std::span<const double> p) const {
  CellKey key{};
  for (std::size_t i = 0; i < dim_; ++i) {
    const double c = std::floor(p[i] / cell_size_);
    if (!(std::abs(c) < 4.0e18)) throw ValidationError("point too far from the origin for the cell grid");
    key[i] = static_cast<std::int64_t>(c);
  }
  return key;
}

std::span<const std::size_t> SpatialIndex::members(const CellKey& cell) const {
  const auto it = cells_.find(cell);
  if (it == cells_.end()) return {};
  return it->second;
}

std::size_t SpatialIndex::query(std::span<const double> center, double radius, std::vector<std::size_t>& out) const {
  out.clear();
  if (radius != cell_size_) {
    throw UsageError("query radius differs from the index cell size; rebuild the index for a new radius");
  }
  if (center.size() != dim_) throw ValidationError("query center dimension mismatch");
  if (cells_.empty()) return 0;

  const CellKey base = cell_of(center);
  const double r2 = radius * radius;
  std::array<int, kMaxIndexDim> offset{};
  offset.fill(-1);
  std::size_t probed = 0;
  while (true) {
    CellKey key = base;
    for (std::size_t i = 0; i < dim_; ++i) key[i] += offset[i];
    ++probed;
    if (const auto it = cells_.find(key); it != cells_.end()) {
      for (std::size_t idx : it->second) {
        if (squared_distance(point(idx), center) <= r2) out.push_back(idx);
      }
    }
    // odometer over {-1, 0, 1}^d
    std::size_t axis = 0;
    while (axis < dim_ && offset[axis] == 1) offset[axis++] = -1;
    if (axis == dim_) break;
    ++offset[axis];
  }
  std::sort(out.begin(), out.end());
  return probed;
}

SpatialIndex build_index(std::span<const double> points, std::size_t dim, double radius) {
  return SpatialIndex(points, dim, radius);
}

std::vector<std::size_t> query_ball(const SpatialIndex& index, std::span<const double> center, double radius) {
  std::vector<std::size_t> out;
  index.query(center, radius, out);
  return out;
}

}  // namespace frmc
