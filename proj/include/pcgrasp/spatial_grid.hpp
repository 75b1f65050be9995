#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "pcgrasp/execution.hpp"
#include "pcgrasp/geometry.hpp"

namespace pcgrasp {

/// Exact fixed-radius neighbor index: a uniform hash grid whose cell edge is
/// the largest radius it will be queried with, so every neighbor of a point
/// lies in the 27 cells around it.
class SpatialGrid {
 public:
  /// Largest neighbor reach, in cells, that the index supports.
  static constexpr int kMaxReach = 2;

  SpatialGrid(std::span<const Point3> points, double cell_size);

  double cell_size() const { return cell_size_; }
  std::size_t size() const { return sorted_.size(); }
  std::size_t cell_count() const { return cells_.size(); }

  /// Calls fn(index, squared_distance) for every indexed point within
  /// `radius` of q (inclusive). radius must not exceed cell_size().
  /// Visit order is deterministic but unspecified.
  template <class Fn>
  void for_each_within(const Point3& q, double radius, Fn&& fn) const {
    const double r2 = radius * radius;
    const CellCoord c = coord_of(q);
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const auto it = lookup_.find(pack({c.x + dx, c.y + dy, c.z + dz}));
          if (it == lookup_.end()) continue;
          const Cell& cell = cells_[it->second];
          for (std::uint32_t k = cell.begin; k < cell.end; ++k) {
            const double d2 = squared_distance(q, sorted_[k]);
            if (d2 <= r2) fn(static_cast<std::size_t>(original_[k]), d2);
          }
        }
  }

  /// Calls fn(i, j, squared_distance) once for every unordered pair of
  /// distinct indexed points within `radius` (inclusive), i and j being
  /// original indices.
  template <class Fn>
  void for_each_pair_within(double radius, Fn&& fn) const {
    const double r2 = radius * radius;
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      const Cell& cell = cells_[c];
      for (std::uint32_t k = cell.begin; k < cell.end; ++k)
        for (std::uint32_t l = k + 1; l < cell.end; ++l) {
          const double d2 = squared_distance(sorted_[k], sorted_[l]);
          if (d2 <= r2) fn(static_cast<std::size_t>(original_[k]), static_cast<std::size_t>(original_[l]), d2);
        }
      const CellCoord cc = unpack(cell.key);
      for (const auto& off : kForwardOffsets) {
        const auto it = lookup_.find(pack({cc.x + off[0], cc.y + off[1], cc.z + off[2]}));
        if (it == lookup_.end()) continue;
        const Cell& other = cells_[it->second];
        for (std::uint32_t k = cell.begin; k < cell.end; ++k)
          for (std::uint32_t l = other.begin; l < other.end; ++l) {
            const double d2 = squared_distance(sorted_[k], sorted_[l]);
            if (d2 <= r2) fn(static_cast<std::size_t>(original_[k]), static_cast<std::size_t>(original_[l]), d2);
          }
      }
    }
  }

  // Cell-level access, in sorted (cell-grouped) point order.
  struct CellRange {
    std::uint32_t begin, end;
    std::uint32_t size() const { return end - begin; }
  };
  CellRange cell(std::size_t c) const { return {cells_[c].begin, cells_[c].end}; }
  std::size_t original_index(std::uint32_t k) const { return original_[k]; }
  const double* xs() const { return xs_.data(); }
  const double* ys() const { return ys_.data(); }
  const double* zs() const { return zs_.data(); }

  /// Calls fn(other) for every occupied cell whose coordinates differ from
  /// cell c by at most `reach` (<= kMaxReach) on each axis, c included.
  template <class Fn>
  void for_each_nearby_cell(std::size_t c, int reach, Fn&& fn) const {
    const CellCoord cc = unpack(cells_[c].key);
    for (int dz = -reach; dz <= reach; ++dz)
      for (int dy = -reach; dy <= reach; ++dy) {
        std::size_t first = 0, last = 0;
        if (!row_span({cc.x - reach, cc.y + dy, cc.z + dz}, 2 * reach, first, last)) continue;
        for (std::size_t o = first; o < last; ++o) fn(o);
      }
  }

  /// Self-inclusive count of points within `radius` of every indexed point,
  /// in original index order. The serial path queries point by point; the
  /// parallel path walks cells and shares the neighbor-cell lookup across a
  /// cell's points. Results are identical.
  std::vector<std::uint32_t> count_within(double radius, Execution exec) const;

 private:
  struct CellCoord {
    std::int64_t x, y, z;
  };
  struct Cell {
    std::uint64_t key;
    std::uint32_t begin, end;
  };

  // Half of the 26 neighbor offsets; with the cell itself they cover each
  // adjacent cell pair once.
  static constexpr int kForwardOffsets[13][3] = {
      {1, 0, 0},  {-1, 1, 0}, {0, 1, 0},  {1, 1, 0},  {-1, -1, 1}, {0, -1, 1}, {1, -1, 1},
      {-1, 0, 1}, {0, 0, 1},  {1, 0, 1},  {-1, 1, 1}, {0, 1, 1},   {1, 1, 1}};

  CellCoord coord_of(const Point3& p) const;
  static std::uint64_t pack(CellCoord c);
  static CellCoord unpack(std::uint64_t key);
  // Cells [first, last) lying on the x-row from `start` to start.x + width.
  bool row_span(CellCoord start, int width, std::size_t& first, std::size_t& last) const;

  std::vector<std::uint32_t> count_serial(double radius) const;
  std::vector<std::uint32_t> count_parallel(double radius) const;

  double cell_size_;
  Point3 origin_;
  std::vector<Point3> sorted_;           // points grouped by cell
  std::vector<double> xs_, ys_, zs_;     // sorted_ as separate coordinate arrays
  std::vector<std::uint32_t> original_;  // sorted position -> original index
  std::vector<Cell> cells_;
  std::unordered_map<std::uint64_t, std::uint32_t> lookup_;
};

}  // namespace pcgrasp
