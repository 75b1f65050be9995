#include "pcgrasp/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "pcgrasp/error.hpp"
#include "pcgrasp/spatial_grid.hpp"

namespace pcgrasp {

void ClusterParams::validate() const {
  if (!(epsilon > 0.0)) throw ConfigError("cluster.epsilon_mm must be > 0");
  if (mu < 1) throw ConfigError("cluster.mu must be >= 1");
}

std::size_t ClusterAssignment::noise_count() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kNoiseLabel));
}

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

// Numbers clusters by smallest member index. `group[i]` is any per-cluster
// key (kNone for noise).
ClusterAssignment canonicalize(const std::vector<std::size_t>& group,
                               std::vector<PointKind> kinds) {
  ClusterAssignment out;
  out.labels.assign(group.size(), kNoiseLabel);
  out.kinds = std::move(kinds);
  std::vector<int> label_of_group(group.size(), kNoiseLabel);
  for (std::size_t i = 0; i < group.size(); ++i) {
    if (group[i] == kNone) continue;
    int& label = label_of_group[group[i]];
    if (label == kNoiseLabel) label = out.k++;
    out.labels[i] = label;
  }
  return out;
}

// Cells of side just under epsilon / sqrt(3): any two points sharing a
// cell are neighbors, and every neighbor lies within two cells. Core tests
// stop at mu, and clusters are joined cell to cell.
ClusterAssignment dbscan_cells(const PointCloud& cloud, const ClusterParams& params) {
  const std::size_t n = cloud.size();
  const double r2 = params.epsilon * params.epsilon;
  const SpatialGrid grid(cloud.points, params.epsilon / std::sqrt(3.0) * (1.0 - 1e-9));
  constexpr int kReach = 2;
  const std::int64_t ncells = static_cast<std::int64_t>(grid.cell_count());
  const double* xs = grid.xs();
  const double* ys = grid.ys();
  const double* zs = grid.zs();
  const auto close = [&](std::uint32_t a, std::uint32_t b) {
    const double dx = xs[a] - xs[b];
    const double dy = ys[a] - ys[b];
    const double dz = zs[a] - zs[b];
    return dx * dx + dy * dy + dz * dz <= r2;
  };

  // Core flags in sorted order.
  std::vector<char> core(n, 0);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t c = 0; c < ncells; ++c) {
    const auto cell = grid.cell(c);
    if (cell.size() >= params.mu) {
      std::fill(core.begin() + cell.begin, core.begin() + cell.end, 1);
      continue;
    }
    for (std::uint32_t k = cell.begin; k < cell.end; ++k) {
      std::uint32_t count = cell.size();
      grid.for_each_nearby_cell(c, kReach, [&](std::size_t o) {
        if (count >= params.mu || static_cast<std::int64_t>(o) == c) return;
        const auto other = grid.cell(o);
        for (std::uint32_t j = other.begin; j < other.end && count < params.mu; ++j)
          count += close(k, j) ? 1 : 0;
      });
      core[k] = count >= params.mu ? 1 : 0;
    }
  }

  std::vector<char> has_core(static_cast<std::size_t>(ncells), 0);
  for (std::int64_t c = 0; c < ncells; ++c) {
    const auto cell = grid.cell(c);
    has_core[c] = std::any_of(core.begin() + cell.begin, core.begin() + cell.end,
                              [](char f) { return f != 0; });
  }

  DisjointSets sets(static_cast<std::size_t>(ncells));
  for (std::int64_t c = 0; c < ncells; ++c) {
    if (!has_core[c]) continue;
    const auto cell = grid.cell(c);
    grid.for_each_nearby_cell(c, kReach, [&](std::size_t o) {
      if (static_cast<std::int64_t>(o) <= c || !has_core[o]) return;
      if (sets.find(static_cast<std::size_t>(c)) == sets.find(o)) return;
      const auto other = grid.cell(o);
      for (std::uint32_t k = cell.begin; k < cell.end; ++k) {
        if (!core[k]) continue;
        for (std::uint32_t j = other.begin; j < other.end; ++j) {
          if (core[j] && close(k, j)) {
            sets.unite(static_cast<std::size_t>(c), o);
            return;
          }
        }
      }
    });
  }

  std::vector<PointKind> kinds(n, PointKind::noise);
  std::vector<std::size_t> group(n, kNone);
  for (std::int64_t c = 0; c < ncells; ++c) {
    const auto cell = grid.cell(c);
    for (std::uint32_t k = cell.begin; k < cell.end; ++k) {
      const std::size_t i = grid.original_index(k);
      if (core[k]) {
        kinds[i] = PointKind::core;
        group[i] = sets.find(static_cast<std::size_t>(c));
        continue;
      }
      // Nearest core within epsilon; ties go to the smaller original index.
      std::size_t nearest = kNone;
      std::size_t nearest_cell = 0;
      double best = std::numeric_limits<double>::infinity();
      grid.for_each_nearby_cell(c, kReach, [&](std::size_t o) {
        if (!has_core[o]) return;
        const auto other = grid.cell(o);
        for (std::uint32_t j = other.begin; j < other.end; ++j) {
          if (!core[j]) continue;
          const double dx = xs[k] - xs[j];
          const double dy = ys[k] - ys[j];
          const double dz = zs[k] - zs[j];
          const double d2 = dx * dx + dy * dy + dz * dz;
          if (d2 > r2) continue;
          const std::size_t oj = grid.original_index(j);
          if (d2 < best || (d2 == best && oj < nearest)) {
            best = d2;
            nearest = oj;
            nearest_cell = o;
          }
        }
      });
      if (nearest != kNone) {
        kinds[i] = PointKind::border;
        group[i] = sets.find(nearest_cell);
      }
    }
  }
  return canonicalize(group, std::move(kinds));
}

}  // namespace

ClusterAssignment dbscan(const PointCloud& cloud, const ClusterParams& params, Execution exec) {
  params.validate();
  const std::size_t n = cloud.size();
  if (n == 0) return {};
  if (exec == Execution::parallel) return dbscan_cells(cloud, params);

  const SpatialGrid grid(cloud.points, params.epsilon);
  const auto counts = grid.count_within(params.epsilon, exec);

  std::vector<PointKind> kinds(n, PointKind::noise);
  for (std::size_t i = 0; i < n; ++i)
    if (counts[i] >= params.mu) kinds[i] = PointKind::core;

  // Core components come from a grid over the core points alone, so the
  // pair walk never touches border or noise points.
  std::vector<std::size_t> core_index;
  std::vector<Point3> core_points;
  for (std::size_t i = 0; i < n; ++i) {
    if (kinds[i] != PointKind::core) continue;
    core_index.push_back(i);
    core_points.push_back(cloud.points[i]);
  }
  DisjointSets sets(core_points.size());
  std::vector<std::size_t> group(n, kNone);
  if (core_points.empty()) return canonicalize(group, std::move(kinds));

  const SpatialGrid core_grid(core_points, params.epsilon);
  core_grid.for_each_pair_within(params.epsilon,
                                 [&](std::size_t a, std::size_t b, double) { sets.unite(a, b); });

  for (std::size_t c = 0; c < core_index.size(); ++c) group[core_index[c]] = core_index[sets.find(c)];
  for (std::size_t i = 0; i < n; ++i) {
    if (kinds[i] == PointKind::core) continue;
    std::size_t nearest = kNone;
    double best = std::numeric_limits<double>::infinity();
    core_grid.for_each_within(cloud.points[i], params.epsilon, [&](std::size_t c, double d2) {
      if (d2 < best || (d2 == best && c < nearest)) {
        best = d2;
        nearest = c;
      }
    });
    if (nearest != kNone) {
      kinds[i] = PointKind::border;
      group[i] = group[core_index[nearest]];
    }
  }
  return canonicalize(group, std::move(kinds));
}

ClusterAssignment dbscan_reference(const PointCloud& cloud, const ClusterParams& params) {
  params.validate();
  const std::size_t n = cloud.size();
  if (n > kReferenceDbscanLimit)
    throw ConfigError("dbscan_reference: cloud of " + std::to_string(n) +
                      " points exceeds the oracle limit of " +
                      std::to_string(kReferenceDbscanLimit));
  if (n == 0) return {};

  const double r2 = params.epsilon * params.epsilon;
  std::vector<std::vector<double>> d2(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d2[i][j] = squared_distance(cloud.points[i], cloud.points[j]);

  std::vector<PointKind> kinds(n, PointKind::noise);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t count = 0;
    for (std::size_t j = 0; j < n; ++j) count += d2[i][j] <= r2 ? 1 : 0;
    if (count >= params.mu) kinds[i] = PointKind::core;
  }

  // Flood fill core components, seeded in index order.
  std::vector<std::size_t> group(n, kNone);
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (kinds[seed] != PointKind::core || group[seed] != kNone) continue;
    std::vector<std::size_t> frontier{seed};
    group[seed] = seed;
    while (!frontier.empty()) {
      const std::size_t i = frontier.back();
      frontier.pop_back();
      for (std::size_t j = 0; j < n; ++j) {
        if (kinds[j] == PointKind::core && group[j] == kNone && d2[i][j] <= r2) {
          group[j] = seed;
          frontier.push_back(j);
        }
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (kinds[i] == PointKind::core) continue;
    std::size_t nearest = kNone;
    for (std::size_t j = 0; j < n; ++j) {
      if (kinds[j] != PointKind::core || d2[i][j] > r2) continue;
      if (nearest == kNone || d2[i][j] < d2[i][nearest]) nearest = j;
    }
    if (nearest != kNone) {
      kinds[i] = PointKind::border;
      group[i] = group[nearest];
    }
  }
  return canonicalize(group, std::move(kinds));
}

}  // namespace pcgrasp
