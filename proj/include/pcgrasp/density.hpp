#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pcgrasp/depth_io.hpp"
#include "pcgrasp/execution.hpp"

namespace pcgrasp {

struct DensityParams {
  double epsilon = 10.0;  ///< neighborhood radius, mm

  void validate() const;
};

/// A cloud with densities and confidences filled in, plus the permutation
/// that visits it by descending confidence.
struct OrderedCloud {
  PointCloud cloud;
  std::vector<std::size_t> order;

  std::size_t size() const { return order.size(); }
  const Point3& ranked(std::size_t rank) const { return cloud.points[order[rank]]; }
};

/// Number of points within epsilon of each point, the point itself
/// included. Exact. Throws ConfigError on an empty cloud.
std::vector<std::uint32_t> neighborhood_density(const PointCloud& cloud, const DensityParams& params,
                                                Execution exec = Execution::parallel);

/// Min-max normalization of densities into [0, 1]. When every density is
/// equal the weights are all 1.
std::vector<double> confidence_weights(std::span<const std::uint32_t> densities);
std::vector<double> confidence_weights(std::span<const double> densities);

/// Orders by weight descending, ties by ascending original index. The
/// returned cloud keeps its original order and carries the weights.
OrderedCloud sort_by_confidence(PointCloud cloud, std::span<const double> weights);

/// Density, weights, and ordering in one call.
OrderedCloud order_by_confidence(PointCloud cloud, const DensityParams& params,
                                 Execution exec = Execution::parallel);

/// Cloud permuted so that position k holds original point order[k]; parallel
/// lists follow their points.
PointCloud apply_order(const PointCloud& cloud, std::span<const std::size_t> order);

}  // namespace pcgrasp
