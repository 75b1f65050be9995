#include "pcgrasp/plane_fit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pcgrasp/error.hpp"
#include "pcgrasp/rng.hpp"

namespace pcgrasp {

void ProsacParams::validate() const {
  if (m0 != 0 && m0 < 3) throw ConfigError("prosac.m0 must be >= 3 (or 0 for automatic)");
  if (!(delta > 0.0)) throw ConfigError("prosac.delta_mm must be > 0");
  if (!(min_support_fraction > 0.0 && min_support_fraction <= 1.0))
    throw ConfigError("prosac.min_support_fraction must lie in (0, 1]");
  if (max_iterations < 1) throw ConfigError("prosac.max_iterations must be >= 1");
}

std::size_t ProsacParams::initial_range(std::size_t n) const {
  return std::min(n, m0 == 0 ? std::max<std::size_t>(3, n / 2) : m0);
}

std::optional<PlaneModel> try_plane_from_three_points(const Point3& pa, const Point3& pb,
                                                      const Point3& pc) {
  const Vec3 l = cross(pb - pa, pc - pa);
  const double len = norm(l);
  if (!(len > 1e-9)) return std::nullopt;
  const Vec3 n = (1.0 / len) * l;
  PlaneModel plane;
  plane.a = n.x;
  plane.b = n.y;
  plane.c = n.z;
  plane.d = -(n.x * pa.x + n.y * pa.y + n.z * pa.z);
  return plane;
}

PlaneModel plane_from_three_points(const Point3& pa, const Point3& pb, const Point3& pc) {
  auto plane = try_plane_from_three_points(pa, pb, pc);
  if (!plane) throw GeometryError("plane_from_three_points: collinear triple");
  return *plane;
}

namespace {

inline double normal_length(const PlaneModel& plane) {
  return std::sqrt(plane.a * plane.a + plane.b * plane.b + plane.c * plane.c);
}

inline double distance_with_length(const Point3& p, const PlaneModel& plane, double length) {
  return std::abs(plane.a * p.x + plane.b * p.y + plane.c * p.z + plane.d) / length;
}

// Every inlier decision goes through the same expression as
// point_plane_distance, so supports and recounts agree exactly.
struct InlierTest {
  const PlaneModel& plane;
  double length;
  double delta;

  InlierTest(const PlaneModel& p, double d) : plane(p), length(normal_length(p)), delta(d) {}
  bool operator()(const Point3& p) const { return distance_with_length(p, plane, length) <= delta; }
};

}  // namespace

double point_plane_distance(const Point3& p, const PlaneModel& plane) {
  return distance_with_length(p, plane, normal_length(plane));
}

namespace {

std::size_t count_support_serial(std::span<const Point3> points, const PlaneModel& plane,
                                 double delta) {
  const InlierTest inlier(plane, delta);
  std::size_t n = 0;
  for (const auto& p : points) n += inlier(p) ? 1 : 0;
  return n;
}

std::size_t count_support_parallel(std::span<const Point3> points, const PlaneModel& plane,
                                   double delta) {
  const std::int64_t size = static_cast<std::int64_t>(points.size());
  const Point3* data = points.data();
  const InlierTest inlier(plane, delta);
  std::int64_t n = 0;
#pragma omp parallel for reduction(+ : n) schedule(static)
  for (std::int64_t i = 0; i < size; ++i) n += inlier(data[i]) ? 1 : 0;
  return static_cast<std::size_t>(n);
}

constexpr std::size_t kBlock = 4096;

// Coordinates split into separate arrays for the support loops.
struct Columns {
  std::vector<double> x, y, z;

  explicit Columns(std::span<const Point3> points)
      : x(points.size()), y(points.size()), z(points.size()) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      x[i] = points[i].x;
      y[i] = points[i].y;
      z[i] = points[i].z;
    }
  }
  std::size_t size() const { return x.size(); }
};

// Decides |v| / length <= delta exactly as InlierTest does. Values of |v|
// clear of delta * length by a relative 1e-9 cannot round across the
// threshold, so they are settled by multiplication; a block holding any
// value inside that band is recounted with the division.
std::size_t count_block(const Columns& cols, std::size_t begin, std::size_t end,
                        const InlierTest& test) {
  const double a = test.plane.a, b = test.plane.b, c = test.plane.c, d = test.plane.d;
  const double length = test.length, delta = test.delta;
  const double lo = delta * length * (1.0 - 1e-9);
  const double hi = delta * length * (1.0 + 1e-9);
  const double* __restrict xs = cols.x.data();
  const double* __restrict ys = cols.y.data();
  const double* __restrict zs = cols.z.data();
  double n = 0.0;
  double unsure = 0.0;
#pragma omp simd reduction(+ : n, unsure)
  for (std::size_t i = begin; i < end; ++i) {
    const double m = std::abs(a * xs[i] + b * ys[i] + c * zs[i] + d);
    n += m <= lo ? 1.0 : 0.0;
    unsure += ((m > lo) & (m < hi)) ? 1.0 : 0.0;
  }
  if (unsure == 0.0) return static_cast<std::size_t>(n);
  std::size_t exact = 0;
  for (std::size_t i = begin; i < end; ++i)
    exact += std::abs(a * xs[i] + b * ys[i] + c * zs[i] + d) / length <= delta ? 1 : 0;
  return exact;
}

std::optional<std::size_t> count_above_serial(const Columns& cols, const InlierTest& test,
                                              std::size_t floor) {
  const std::size_t size = cols.size();
  std::size_t n = 0;
  for (std::size_t begin = 0; begin < size; begin += kBlock) {
    const std::size_t end = std::min(size, begin + kBlock);
    n += count_block(cols, begin, end, test);
    if (n + (size - end) <= floor) return std::nullopt;
  }
  return n;
}

std::optional<std::size_t> count_above_parallel(const Columns& cols, const InlierTest& test,
                                                std::size_t floor) {
  const std::size_t size = cols.size();
  const std::int64_t blocks = static_cast<std::int64_t>((size + kBlock - 1) / kBlock);
  std::size_t counted = 0;
  std::size_t seen = 0;
  bool hopeless = false;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t b = 0; b < blocks; ++b) {
    bool skip;
#pragma omp atomic read
    skip = hopeless;
    if (skip) continue;
    const std::size_t begin = static_cast<std::size_t>(b) * kBlock;
    const std::size_t end = std::min(size, begin + kBlock);
    const std::size_t n = count_block(cols, begin, end, test);
#pragma omp critical(pcgrasp_support)
    {
      counted += n;
      seen += end - begin;
      if (counted + (size - seen) <= floor) hopeless = true;
    }
  }
  if (hopeless) return std::nullopt;
  return counted;
}

std::optional<std::size_t> count_above(const Columns& cols, const PlaneModel& plane, double delta,
                                       std::size_t floor, Execution exec) {
  const InlierTest test(plane, delta);
  return exec == Execution::serial ? count_above_serial(cols, test, floor)
                                   : count_above_parallel(cols, test, floor);
}

}  // namespace

std::size_t count_support(std::span<const Point3> points, const PlaneModel& plane, double delta,
                          Execution exec) {
  return exec == Execution::serial ? count_support_serial(points, plane, delta)
                                   : count_support_parallel(points, plane, delta);
}

std::optional<std::size_t> count_support_above(std::span<const Point3> points, const PlaneModel& plane,
                                               double delta, std::size_t floor, Execution exec) {
  return count_above(Columns(points), plane, delta, floor, exec);
}

PlaneFit fit_plane_prosac(const OrderedCloud& ordered, const ProsacParams& params, Execution exec) {
  params.validate();
  const std::size_t n_points = ordered.size();
  if (n_points < 3)
    throw ConfigError("fit_plane: need at least 3 points, got " + std::to_string(n_points));
  const std::size_t m0 = params.initial_range(n_points);

  const std::span<const Point3> points(ordered.cloud.points);
  const Columns cols(points);
  const double target = params.min_support_fraction * static_cast<double>(n_points);

  Rng rng(params.seed);
  PlaneFit fit;
  bool have_model = false;

  for (std::size_t n = 0; n < params.max_iterations; ++n) {
    fit.iterations = n + 1;
    const std::size_t range = sampling_range(n_points, m0, n);
    const std::size_t ra = rng.below(range);
    std::size_t rb = rng.below(range - 1);
    if (rb >= ra) ++rb;
    std::size_t rc = rng.below(range - 2);
    // Map rc onto the range with ra and rb removed.
    const std::size_t lo = std::min(ra, rb);
    const std::size_t hi = std::max(ra, rb);
    if (rc >= lo) ++rc;
    if (rc >= hi) ++rc;

    const auto candidate =
        try_plane_from_three_points(ordered.ranked(ra), ordered.ranked(rb), ordered.ranked(rc));
    if (!candidate) continue;

    PlaneModel plane = *candidate;
    if (!have_model) {
      plane.support = count_above(cols, plane, params.delta, 0, exec).value_or(0);
      fit.plane = plane;
      have_model = true;
    } else if (auto s = count_above(cols, plane, params.delta, fit.plane.support, exec)) {
      plane.support = *s;
      fit.plane = plane;
    }
    if (static_cast<double>(fit.plane.support) >= target) {
      fit.reached_support = true;
      break;
    }
  }

  if (!have_model || fit.plane.support < 3)
    throw GeometryError("fit_plane: no plane with support >= 3 after " +
                        std::to_string(fit.iterations) + " iterations");
  fit.inliers = plane_inliers(points, fit.plane, params.delta);
  return fit;
}

PlaneFit fit_plane_uniform(const OrderedCloud& ordered, ProsacParams params, Execution exec) {
  params.m0 = std::max<std::size_t>(3, ordered.size());
  return fit_plane_prosac(ordered, params, exec);
}

std::vector<std::size_t> plane_inliers(std::span<const Point3> points, const PlaneModel& plane,
                                       double delta) {
  const InlierTest inlier(plane, delta);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (inlier(points[i])) out.push_back(i);
  return out;
}

PointCloud remove_plane(const PointCloud& cloud, const PlaneModel& plane, double delta) {
  const InlierTest inlier(plane, delta);
  PointCloud out;
  if (cloud.densities) out.densities.emplace();
  if (cloud.confidences) out.confidences.emplace();
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    if (inlier(cloud.points[i])) continue;
    out.points.push_back(cloud.points[i]);
    if (cloud.densities) out.densities->push_back((*cloud.densities)[i]);
    if (cloud.confidences) out.confidences->push_back((*cloud.confidences)[i]);
  }
  return out;
}

}  // namespace pcgrasp
