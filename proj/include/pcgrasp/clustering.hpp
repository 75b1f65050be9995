#pragma once

#include <cstdint>
#include <vector>

#include "pcgrasp/depth_io.hpp"
#include "pcgrasp/execution.hpp"

namespace pcgrasp {

struct ClusterParams {
  double epsilon = 15.0;  ///< mm
  std::uint32_t mu = 12;  ///< minimum self-inclusive neighbor count of a core point

  void validate() const;
};

enum class PointKind : std::uint8_t { core, border, noise };

/// Labels are -1 for noise and 0..k-1 otherwise, numbered by each cluster's
/// smallest member index.
struct ClusterAssignment {
  std::vector<int> labels;
  std::vector<PointKind> kinds;
  int k = 0;

  std::size_t noise_count() const;
};

inline constexpr int kNoiseLabel = -1;

/// Density-based clustering. Core points (>= mu neighbors within epsilon,
/// self included) connected through chains of core points share a cluster.
/// A non-core point within epsilon of some core point joins the cluster of
/// its nearest core point, ties going to the smaller core index; every other
/// point is noise. The result does not depend on traversal order.
ClusterAssignment dbscan(const PointCloud& cloud, const ClusterParams& params,
                         Execution exec = Execution::parallel);

/// Same contract computed from exhaustive pairwise distances. Intended as a
/// test oracle; throws ConfigError above 2000 points.
ClusterAssignment dbscan_reference(const PointCloud& cloud, const ClusterParams& params);

inline constexpr std::size_t kReferenceDbscanLimit = 2000;

}  // namespace pcgrasp
