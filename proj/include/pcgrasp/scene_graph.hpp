#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "pcgrasp/clustering.hpp"
#include "pcgrasp/depth_io.hpp"
#include "pcgrasp/geometry.hpp"

namespace pcgrasp {

/// One object cluster summarized by its mean and principal axes.
struct ObjectNode {
  int label = 0;
  Point3 centroid;
  std::array<Vec3, 3> axes{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
  std::array<double, 3> extents{};  ///< std-dev along each axis, non-increasing
  std::size_t point_count = 0;
};

struct SceneGraph {
  std::vector<ObjectNode> nodes;
  std::uint64_t frame_timestamp = 0;
  std::optional<std::size_t> target_index;

  const ObjectNode* target() const { return target_index ? &nodes[*target_index] : nullptr; }
};

/// origin_norm picks the centroid nearest the camera center; axis_radial the
/// centroid nearest the optical axis.
enum class TargetPolicy { origin_norm, axis_radial };

TargetPolicy parse_target_policy(std::string_view name);
std::string_view to_string(TargetPolicy policy);

/// Eigen-decomposition of a symmetric 3x3 matrix by cyclic Jacobi sweeps.
/// Eigenvalues come back in non-increasing order; column k of `vectors` is
/// the unit eigenvector of values[k].
struct SymmetricEigen3 {
  std::array<double, 3> values{};
  Mat3 vectors;
};
SymmetricEigen3 eigen_symmetric3(const Mat3& a);

/// Population covariance (divide by n) of a point set around `mean`.
Mat3 covariance(std::span<const Point3> points, const Point3& mean);

/// One node per non-noise cluster, in label order. Throws ConfigError when
/// the assignment length differs from the cloud.
SceneGraph cluster_centroids_pca(const PointCloud& cloud, const ClusterAssignment& assignment,
                                 std::uint64_t timestamp = 0);

/// Sets target_index to the argmin of the policy's distance; ties go to the
/// smaller index. An empty graph gets no target.
SceneGraph select_target(SceneGraph graph, TargetPolicy policy = TargetPolicy::origin_norm);

/// Euclidean norm of the selected centroid, if any.
std::optional<double> target_distance(const SceneGraph& graph);

}  // namespace pcgrasp
