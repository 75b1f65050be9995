#include "pcgrasp/scene_graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pcgrasp/error.hpp"

namespace pcgrasp {

TargetPolicy parse_target_policy(std::string_view name) {
  if (name == "origin_norm") return TargetPolicy::origin_norm;
  if (name == "axis_radial") return TargetPolicy::axis_radial;
  throw ConfigError("unknown target policy '" + std::string(name) +
                    "' (expected origin_norm or axis_radial)");
}

std::string_view to_string(TargetPolicy policy) {
  return policy == TargetPolicy::origin_norm ? "origin_norm" : "axis_radial";
}

SymmetricEigen3 eigen_symmetric3(const Mat3& input) {
  Mat3 a = input;
  Mat3 v = Mat3::identity();
  constexpr int kMaxSweeps = 50;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    const double off = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    const double diag = a(0, 0) * a(0, 0) + a(1, 1) * a(1, 1) + a(2, 2) * a(2, 2);
    if (off <= 1e-30 * diag || off == 0.0) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // A <- J^T A J with J the Givens rotation in the (p, q) plane.
        for (int k = 0; k < 3; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::array<int, 3> idx{0, 1, 2};
  std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) { return a(i, i) > a(j, j); });
  SymmetricEigen3 out;
  for (int k = 0; k < 3; ++k) {
    out.values[k] = a(idx[k], idx[k]);
    for (int r = 0; r < 3; ++r) out.vectors(r, k) = v(r, idx[k]);
  }
  return out;
}

Mat3 covariance(std::span<const Point3> points, const Point3& mean) {
  Mat3 c;
  c.m.fill(0.0);
  for (const auto& p : points) {
    const Vec3 d = p - mean;
    const double e[3] = {d.x, d.y, d.z};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) c(i, j) += e[i] * e[j];
  }
  const double inv = points.empty() ? 0.0 : 1.0 / static_cast<double>(points.size());
  for (double& x : c.m) x *= inv;
  return c;
}

SceneGraph cluster_centroids_pca(const PointCloud& cloud, const ClusterAssignment& assignment,
                                 std::uint64_t timestamp) {
  if (assignment.labels.size() != cloud.size())
    throw ConfigError("cluster_centroids_pca: assignment length differs from cloud");
  SceneGraph graph;
  graph.frame_timestamp = timestamp;
  if (assignment.k <= 0) return graph;

  std::vector<std::vector<Point3>> members(static_cast<std::size_t>(assignment.k));
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const int label = assignment.labels[i];
    if (label == kNoiseLabel) continue;
    if (label < 0 || label >= assignment.k)
      throw ConfigError("cluster_centroids_pca: label out of range");
    members[static_cast<std::size_t>(label)].push_back(cloud.points[i]);
  }

  graph.nodes.resize(members.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t k = 0; k < static_cast<std::int64_t>(members.size()); ++k) {
    const auto& pts = members[static_cast<std::size_t>(k)];
    ObjectNode& node = graph.nodes[static_cast<std::size_t>(k)];
    node.label = static_cast<int>(k);
    node.point_count = pts.size();
    if (pts.empty()) continue;
    Point3 sum;
    for (const auto& p : pts) sum = sum + p;
    node.centroid = (1.0 / static_cast<double>(pts.size())) * sum;
    const auto eig = eigen_symmetric3(covariance(pts, node.centroid));
    for (int a = 0; a < 3; ++a) {
      node.axes[a] = eig.vectors.column(a);
      node.extents[a] = std::sqrt(std::max(eig.values[a], 0.0));
    }
  }
  return graph;
}

SceneGraph select_target(SceneGraph graph, TargetPolicy policy) {
  graph.target_index.reset();
  double best = 0.0;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const Point3& g = graph.nodes[i].centroid;
    const double score = policy == TargetPolicy::origin_norm
                             ? std::sqrt(g.x * g.x + g.y * g.y + g.z * g.z)
                             : std::sqrt(g.x * g.x + g.y * g.y);
    if (!graph.target_index || score < best) {
      best = score;
      graph.target_index = i;
    }
  }
  return graph;
}

std::optional<double> target_distance(const SceneGraph& graph) {
  const ObjectNode* t = graph.target();
  if (!t) return std::nullopt;
  return norm(t->centroid);
}

}  // namespace pcgrasp
