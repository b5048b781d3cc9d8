#pragma once

// Fixed-radius neighbor search over a uniform hash grid.
//
// Cells have edge length equal to the query radius, so every point within the
// radius of a query lies in one of the 3^d cells around the query's cell.
// Query results come back sorted by point index, which fixes the summation
// order of everything downstream.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace frmc {

inline constexpr std::size_t kMaxIndexDim = 8;

/// Squared Euclidean distance, summed in coordinate order. Shared by the index
/// and the brute-force oracle so both use the identical closed-ball predicate.
inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    acc += diff * diff;
  }
  return acc;
}

class SpatialIndex {
 public:
  using CellKey = std::array<std::int64_t, kMaxIndexDim>;

  SpatialIndex() = default;
  /// points is [N x dim] row-major; radius > 0 becomes the cell size.
  SpatialIndex(std::span<const double> points, std::size_t dim, double radius);

  std::size_t size() const { return dim_ == 0 ? 0 : points_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  double cell_size() const { return cell_size_; }
  std::size_t cell_count() const { return cells_.size(); }
  std::span<const double> point(std::size_t i) const { return {points_.data() + i * dim_, dim_}; }

  /// floor(p / cell_size) componentwise (unused trailing entries are zero).
  CellKey cell_of(std::span<const double> p) const;
  /// Indices stored in a cell, ascending; empty span when the cell is unoccupied.
  std::span<const std::size_t> members(const CellKey& cell) const;

  /// Indices n with |points[n] - center| <= radius, ascending. radius must equal cell_size().
  /// Returns the number of cells probed.
  std::size_t query(std::span<const double> center, double radius, std::vector<std::size_t>& out) const;

 private:
  struct KeyHash {
    std::size_t operator()(const CellKey& key) const noexcept;
  };

  std::size_t dim_ = 0;
  double cell_size_ = 0.0;
  std::vector<double> points_;
  std::unordered_map<CellKey, std::vector<std::size_t>, KeyHash> cells_;
};

SpatialIndex build_index(std::span<const double> points, std::size_t dim, double radius);

std::vector<std::size_t> query_ball(const SpatialIndex& index, std::span<const double> center, double radius);

}  // namespace frmc
