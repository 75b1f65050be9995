#include "pcgrasp/spatial_grid.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <numeric>

#include "pcgrasp/error.hpp"

namespace pcgrasp {

namespace {

constexpr std::int64_t kCoordBits = 21;
constexpr std::int64_t kCoordLimit = std::int64_t{1} << kCoordBits;

}  // namespace

SpatialGrid::SpatialGrid(std::span<const Point3> points, double cell_size)
    : cell_size_(cell_size) {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size))
    throw ConfigError("spatial grid: cell size must be positive");
  if (points.size() >= std::numeric_limits<std::uint32_t>::max())
    throw ConfigError("spatial grid: too many points");

  origin_ = {std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
             std::numeric_limits<double>::max()};
  for (const auto& p : points) {
    origin_.x = std::min(origin_.x, p.x);
    origin_.y = std::min(origin_.y, p.y);
    origin_.z = std::min(origin_.z, p.z);
  }
  // Spare cells below the minimum keep every neighbor coordinate visited
  // (up to kMaxReach cells away) non-negative.
  const double margin = (kMaxReach + 1) * cell_size;
  origin_ = origin_ - Point3{margin, margin, margin};

  std::vector<std::uint64_t> keys(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const CellCoord c = coord_of(points[i]);
    if (c.x + kMaxReach >= kCoordLimit || c.y + kMaxReach >= kCoordLimit ||
        c.z + kMaxReach >= kCoordLimit)
      throw ConfigError("spatial grid: cloud extent too large for the cell size");
    keys[i] = pack(c);
  }

  original_.resize(points.size());
  std::iota(original_.begin(), original_.end(), 0u);
  std::stable_sort(original_.begin(), original_.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return keys[a] < keys[b]; });

  sorted_.resize(points.size());
  xs_.resize(points.size());
  ys_.resize(points.size());
  zs_.resize(points.size());
  for (std::size_t k = 0; k < original_.size(); ++k) {
    sorted_[k] = points[original_[k]];
    xs_[k] = sorted_[k].x;
    ys_[k] = sorted_[k].y;
    zs_[k] = sorted_[k].z;
    const std::uint64_t key = keys[original_[k]];
    if (cells_.empty() || cells_.back().key != key)
      cells_.push_back({key, static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k)});
    cells_.back().end = static_cast<std::uint32_t>(k + 1);
  }
  lookup_.reserve(cells_.size() * 2);
  for (std::uint32_t c = 0; c < cells_.size(); ++c) lookup_.emplace(cells_[c].key, c);
}

SpatialGrid::CellCoord SpatialGrid::coord_of(const Point3& p) const {
  return {static_cast<std::int64_t>(std::floor((p.x - origin_.x) / cell_size_)),
          static_cast<std::int64_t>(std::floor((p.y - origin_.y) / cell_size_)),
          static_cast<std::int64_t>(std::floor((p.z - origin_.z) / cell_size_))};
}

std::uint64_t SpatialGrid::pack(CellCoord c) {
  // Indexed coordinates lie in [kMaxReach, limit - 1 - kMaxReach], so
  // neighbor steps never wrap.
  const auto clamp = [](std::int64_t v) {
    return static_cast<std::uint64_t>(v) & static_cast<std::uint64_t>(kCoordLimit - 1);
  };
  return (clamp(c.z) << (2 * kCoordBits)) | (clamp(c.y) << kCoordBits) | clamp(c.x);
}

SpatialGrid::CellCoord SpatialGrid::unpack(std::uint64_t key) {
  return {static_cast<std::int64_t>(key & (kCoordLimit - 1)),
          static_cast<std::int64_t>((key >> kCoordBits) & (kCoordLimit - 1)),
          static_cast<std::int64_t>(key >> (2 * kCoordBits))};
}

bool SpatialGrid::row_span(CellCoord start, int width, std::size_t& first, std::size_t& last) const {
  const std::uint64_t lo = pack(start);
  const std::uint64_t hi = pack({start.x + width, start.y, start.z});
  const auto f = std::lower_bound(cells_.begin(), cells_.end(), lo,
                                  [](const Cell& a, std::uint64_t k) { return a.key < k; });
  if (f == cells_.end() || f->key > hi) return false;
  const auto l = std::upper_bound(f, cells_.end(), hi,
                                  [](std::uint64_t k, const Cell& a) { return k < a.key; });
  first = static_cast<std::size_t>(f - cells_.begin());
  last = static_cast<std::size_t>(l - cells_.begin());
  return true;
}

std::vector<std::uint32_t> SpatialGrid::count_within(double radius, Execution exec) const {
  if (radius > cell_size_) throw ConfigError("spatial grid: query radius exceeds cell size");
  return exec == Execution::serial ? count_serial(radius) : count_parallel(radius);
}

std::vector<std::uint32_t> SpatialGrid::count_serial(double radius) const {
  std::vector<std::uint32_t> counts(sorted_.size(), 0);
  for (std::size_t k = 0; k < sorted_.size(); ++k) {
    std::uint32_t n = 0;
    for_each_within(sorted_[k], radius, [&](std::size_t, double) { ++n; });
    counts[original_[k]] = n;
  }
  return counts;
}

namespace {

// Neighbors of (qx, qy, qz) among [begin, end) of the coordinate arrays.
// Kept branch-free so the compiler can vectorize it.
std::uint32_t count_range(const double* __restrict xs, const double* __restrict ys,
                          const double* __restrict zs, std::uint32_t begin, std::uint32_t end,
                          double qx, double qy, double qz, double r2) {
  // A double tally (exact for any realistic count) keeps the loop
  // vectorizable on plain SSE2.
  double n = 0.0;
#pragma omp simd reduction(+ : n)
  for (std::uint32_t j = begin; j < end; ++j) {
    const double dx = qx - xs[j];
    const double dy = qy - ys[j];
    const double dz = qz - zs[j];
    n += (dx * dx + dy * dy + dz * dz) <= r2 ? 1.0 : 0.0;
  }
  return static_cast<std::uint32_t>(n);
}

}  // namespace

std::vector<std::uint32_t> SpatialGrid::count_parallel(double radius) const {
  std::vector<std::uint32_t> counts(sorted_.size(), 0);
  const double r2 = radius * radius;
  const std::int64_t ncells = static_cast<std::int64_t>(cells_.size());
  const double* xs = xs_.data();
  const double* ys = ys_.data();
  const double* zs = zs_.data();

#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t c = 0; c < ncells; ++c) {
    const Cell& cell = cells_[c];
    const CellCoord cc = unpack(cell.key);
    // Cells are sorted by key with x fastest, so the three cells of each
    // (dy, dz) row are one contiguous run of sorted points.
    std::uint32_t ranges[9][2];
    int nranges = 0;
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy) {
        std::size_t first = 0, last = 0;
        if (!row_span({cc.x - 1, cc.y + dy, cc.z + dz}, 2, first, last)) continue;
        ranges[nranges][0] = cells_[first].begin;
        ranges[nranges][1] = cells_[last - 1].end;
        ++nranges;
      }
    for (std::uint32_t k = cell.begin; k < cell.end; ++k) {
      std::uint32_t n = 0;
      for (int r = 0; r < nranges; ++r)
        n += count_range(xs, ys, zs, ranges[r][0], ranges[r][1], xs[k], ys[k], zs[k], r2);
      counts[original_[k]] = n;
    }
  }
  return counts;
}

}  // namespace pcgrasp
