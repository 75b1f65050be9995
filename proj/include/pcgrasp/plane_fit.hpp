#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pcgrasp/density.hpp"
#include "pcgrasp/execution.hpp"
#include "pcgrasp/geometry.hpp"

namespace pcgrasp {

/// ax + by + cz + d = 0 with (a, b, c) a unit vector; d in millimeters.
struct PlaneModel {
  double a = 0.0;
  double b = 0.0;
  double c = 1.0;
  double d = 0.0;
  std::size_t support = 0;

  Vec3 normal() const { return {a, b, c}; }
  double signed_distance(const Point3& p) const { return a * p.x + b * p.y + c * p.z + d; }
};

struct ProsacParams {
  std::size_t m0 = 0;  ///< initial sampling range; 0 selects max(3, N/2)
  double delta = 8.0;  ///< inlier distance, mm
  /// Early acceptance bar. The default of 1 only stops early on full
  /// consensus, so the fit returns the best of max_iterations models.
  double min_support_fraction = 1.0;
  std::size_t max_iterations = 500;
  std::uint64_t seed = 1;

  /// Range checks that do not depend on the cloud size.
  void validate() const;
  /// m0 resolved against a cloud of n points, capped at n.
  std::size_t initial_range(std::size_t n) const;
};

struct PlaneFit {
  PlaneModel plane;
  std::vector<std::size_t> inliers;  ///< ascending original indices
  std::size_t iterations = 0;        ///< sampling iterations consumed
  bool reached_support = false;      ///< stopped on the support criterion
};

/// Plane through three points. Empty when the cross product norm is at most
/// 1e-9 mm^2 (collinear or repeated points).
std::optional<PlaneModel> try_plane_from_three_points(const Point3& pa, const Point3& pb,
                                                      const Point3& pc);

/// As above; throws GeometryError for a degenerate triple.
PlaneModel plane_from_three_points(const Point3& pa, const Point3& pb, const Point3& pc);

/// |Ax + By + Cz + D| / sqrt(A^2 + B^2 + C^2).
double point_plane_distance(const Point3& p, const PlaneModel& plane);

/// Number of points within delta of the plane. The parallel path is an
/// OpenMP reduction over point ranges.
std::size_t count_support(std::span<const Point3> points, const PlaneModel& plane, double delta,
                          Execution exec = Execution::parallel);

/// Exact support when it exceeds `floor`; empty once the remaining points
/// can no longer lift the count above it.
std::optional<std::size_t> count_support_above(std::span<const Point3> points, const PlaneModel& plane,
                                               double delta, std::size_t floor,
                                               Execution exec = Execution::parallel);

/// Sampling range at (zero-based) iteration n: min(N, m0 + n).
constexpr std::size_t sampling_range(std::size_t n_points, std::size_t m0, std::size_t iteration) {
  return m0 + iteration < n_points ? m0 + iteration : n_points;
}

/// Progressive sample consensus over a confidence-ordered cloud. Iteration n
/// draws three distinct ranks uniformly from the top m(n); support is always
/// counted over the whole cloud. Stops once the best support reaches
/// min_support_fraction * N or after max_iterations. Throws ConfigError for
/// fewer than 3 points or invalid parameters, GeometryError when no model
/// reaches a support of 3.
PlaneFit fit_plane_prosac(const OrderedCloud& ordered, const ProsacParams& params,
                          Execution exec = Execution::parallel);

/// Identical procedure with the sampling range pinned at N (plain RANSAC).
PlaneFit fit_plane_uniform(const OrderedCloud& ordered, ProsacParams params,
                           Execution exec = Execution::parallel);

/// Indices of points within delta of the plane, ascending.
std::vector<std::size_t> plane_inliers(std::span<const Point3> points, const PlaneModel& plane,
                                       double delta);

/// Points farther than delta from the plane, in their original relative order.
PointCloud remove_plane(const PointCloud& cloud, const PlaneModel& plane, double delta);

}  // namespace pcgrasp
