#include "pcgrasp/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <string>

#include "pcgrasp/error.hpp"
#include "pcgrasp/rng.hpp"

namespace pcgrasp {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kParallelEps = 1e-12;

// Smallest root of a t^2 + b t + c = 0 that is > 0.
std::optional<double> smallest_positive_root(double a, double b, double c) {
  if (a <= 0.0) return std::nullopt;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  // Numerically stable pair.
  const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
  double t0 = q / a;
  double t1 = q != 0.0 ? c / q : t0;
  if (t0 > t1) std::swap(t0, t1);
  if (t0 > 0.0) return t0;
  if (t1 > 0.0) return t1;
  return std::nullopt;
}

std::optional<double> hit_sphere(const Sphere& s, const Point3& o, const Vec3& d) {
  const Vec3 oc = o - s.center;
  return smallest_positive_root(dot(d, d), 2.0 * dot(d, oc), dot(oc, oc) - s.radius * s.radius);
}

std::optional<double> hit_cylinder(const Cylinder& cyl, const Point3& o, const Vec3& d) {
  const Vec3 w = normalized(cyl.axis);
  const Vec3 rel = o - cyl.base;
  const double o_par = dot(rel, w);
  const double d_par = dot(d, w);
  const Vec3 o_perp = rel - o_par * w;
  const Vec3 d_perp = d - d_par * w;
  const double r2 = cyl.radius * cyl.radius;

  double best = kInf;
  // Side wall: both roots, keep those within the height.
  const double a = dot(d_perp, d_perp);
  if (a > kParallelEps) {
    const double b = 2.0 * dot(o_perp, d_perp);
    const double c = dot(o_perp, o_perp) - r2;
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (double t : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
        if (t <= 0.0 || t >= best) continue;
        const double s = o_par + t * d_par;
        if (s >= 0.0 && s <= cyl.height) best = t;
      }
    }
  }
  // End caps.
  if (std::abs(d_par) > kParallelEps) {
    for (double level : {0.0, cyl.height}) {
      const double t = (level - o_par) / d_par;
      if (t <= 0.0 || t >= best) continue;
      const Vec3 radial = o_perp + t * d_perp;
      if (dot(radial, radial) <= r2) best = t;
    }
  }
  if (best == kInf) return std::nullopt;
  return best;
}

std::optional<double> hit_box(const Box& box, const Point3& o, const Vec3& d) {
  const Mat3 rt = box.orientation.transposed();
  const Vec3 ol = rt * (o - box.center);
  const Vec3 dl = rt * d;
  const double oo[3] = {ol.x, ol.y, ol.z};
  const double dd[3] = {dl.x, dl.y, dl.z};
  const double hh[3] = {box.half_extents.x, box.half_extents.y, box.half_extents.z};
  double tmin = -kInf;
  double tmax = kInf;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(dd[i]) < kParallelEps) {
      if (std::abs(oo[i]) > hh[i]) return std::nullopt;
      continue;
    }
    double t1 = (-hh[i] - oo[i]) / dd[i];
    double t2 = (hh[i] - oo[i]) / dd[i];
    if (t1 > t2) std::swap(t1, t2);
    tmin = std::max(tmin, t1);
    tmax = std::min(tmax, t2);
  }
  if (tmax < tmin || tmax <= 0.0) return std::nullopt;
  return tmin > 0.0 ? tmin : tmax;
}

json point_json(const Point3& p) { return json::array({p.x, p.y, p.z}); }

Point3 point_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("scene: expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

std::pair<Vec3, Vec3> TablePlane::axes() const {
  const Vec3 n = normalized(normal);
  const Vec3 helper = std::abs(n.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  const Vec3 u = normalized(helper - dot(helper, n) * n);
  return {u, cross(n, u)};
}

std::string_view to_string(GripType grip) {
  switch (grip) {
    case GripType::pinch: return "pinch";
    case GripType::spherical: return "spherical";
    case GripType::cylindrical: return "cylindrical";
  }
  return "spherical";
}

GripType parse_grip_type(std::string_view name) {
  if (name == "pinch") return GripType::pinch;
  if (name == "spherical") return GripType::spherical;
  if (name == "cylindrical") return GripType::cylindrical;
  throw SchemaError("unknown grip type '" + std::string(name) + "'");
}

void SceneSpec::validate() const {
  if (!(noise_sigma >= 0.0)) throw ConfigError("scene: noise_sigma must be >= 0");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
    throw ConfigError("scene: dropout_rate must lie in [0, 1)");
  if (!(norm(table.normal) > 0.0)) throw ConfigError("scene: table normal must be non-zero");
  std::vector<int> ids;
  for (const auto& obj : objects) {
    if (obj.id < 2 || obj.id > 255) throw ConfigError("scene: object ids must lie in 2..255");
    if (std::find(ids.begin(), ids.end(), obj.id) != ids.end())
      throw ConfigError("scene: duplicate object id " + std::to_string(obj.id));
    ids.push_back(obj.id);
    const bool sized = std::visit(
        [](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Sphere>) return s.radius > 0.0;
          else if constexpr (std::is_same_v<T, Cylinder>)
            return s.radius > 0.0 && s.height > 0.0 && norm(s.axis) > 0.0;
          else
            return s.half_extents.x > 0.0 && s.half_extents.y > 0.0 && s.half_extents.z > 0.0;
        },
        obj.shape);
    if (!sized) throw ConfigError("scene: object " + std::to_string(obj.id) + " has a non-positive size");
    if (lowest_height(obj.shape, table) < -1e-6)
      throw ConfigError("scene: object " + std::to_string(obj.id) + " extends below the table");
  }
}

const SceneObject* SceneSpec::find(int id) const {
  for (const auto& obj : objects)
    if (obj.id == id) return &obj;
  return nullptr;
}

void CameraPose::validate() const {
  if (std::abs(rotation.determinant() - 1.0) > 1e-9)
    throw ConfigError("camera pose: rotation determinant must be +1");
  const Mat3 should_be_identity = rotation.transposed() * rotation;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (std::abs(should_be_identity(i, j) - (i == j ? 1.0 : 0.0)) > 1e-9)
        throw ConfigError("camera pose: rotation is not orthonormal");
}

Point3 CameraPose::to_camera(const Point3& p) const { return rotation.transposed() * (p - position); }

Point3 CameraPose::to_scene(const Point3& p) const { return rotation * p + position; }

CameraPose look_at(const Point3& position, const Point3& target, Vec3 up) {
  const Vec3 z = normalized(target - position);
  Vec3 x = cross(z, up);
  if (norm(x) < 1e-9) x = cross(z, std::abs(z.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0});
  x = normalized(x);
  const Vec3 y = cross(z, x);
  return {position, Mat3::from_columns(x, y, z)};
}

std::optional<double> intersect(const Primitive& shape, const Point3& o, const Vec3& d) {
  return std::visit(
      [&](const auto& s) -> std::optional<double> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sphere>) return hit_sphere(s, o, d);
        else if constexpr (std::is_same_v<T, Cylinder>) return hit_cylinder(s, o, d);
        else return hit_box(s, o, d);
      },
      shape);
}

std::optional<double> intersect(const TablePlane& table, const Point3& o, const Vec3& d) {
  const Vec3 n = normalized(table.normal);
  const double denom = dot(n, d);
  if (std::abs(denom) < kParallelEps) return std::nullopt;
  const double t = dot(n, table.origin - o) / denom;
  if (!(t > 0.0)) return std::nullopt;
  const Vec3 q = o + t * d - table.origin;
  const auto [u, v] = table.axes();
  if (table.half_x > 0.0 && std::abs(dot(q, u)) > table.half_x) return std::nullopt;
  if (table.half_y > 0.0 && std::abs(dot(q, v)) > table.half_y) return std::nullopt;
  return t;
}

bool contains(const Primitive& shape, const Point3& p) {
  return std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          return squared_distance(p, s.center) < s.radius * s.radius;
        } else if constexpr (std::is_same_v<T, Cylinder>) {
          const Vec3 w = normalized(s.axis);
          const Vec3 rel = p - s.base;
          const double along = dot(rel, w);
          const Vec3 radial = rel - along * w;
          return along > 0.0 && along < s.height && dot(radial, radial) < s.radius * s.radius;
        } else {
          const Vec3 l = s.orientation.transposed() * (p - s.center);
          return std::abs(l.x) < s.half_extents.x && std::abs(l.y) < s.half_extents.y &&
                 std::abs(l.z) < s.half_extents.z;
        }
      },
      shape);
}

double lowest_height(const Primitive& shape, const TablePlane& table) {
  const Vec3 n = normalized(table.normal);
  return std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          return table.height_of(s.center) - s.radius;
        } else if constexpr (std::is_same_v<T, Cylinder>) {
          const Vec3 w = normalized(s.axis);
          const double cos_t = dot(n, w);
          const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
          const double h0 = table.height_of(s.base);
          const double h1 = table.height_of(s.base + s.height * w);
          return std::min(h0, h1) - s.radius * sin_t;
        } else {
          double reach = 0.0;
          const double h[3] = {s.half_extents.x, s.half_extents.y, s.half_extents.z};
          for (std::size_t i = 0; i < 3; ++i) reach += h[i] * std::abs(dot(n, s.orientation.column(i)));
          return table.height_of(s.center) - reach;
        }
      },
      shape);
}

double footprint_radius(const Primitive& shape) {
  return std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          return s.radius;
        } else if constexpr (std::is_same_v<T, Cylinder>) {
          const bool upright = std::abs(normalized(s.axis).z) > 1.0 - 1e-9;
          return upright ? s.radius : s.radius + s.height;
        } else {
          const bool upright = std::abs(s.orientation(2, 2)) > 1.0 - 1e-9;
          return upright ? std::hypot(s.half_extents.x, s.half_extents.y) : norm(s.half_extents);
        }
      },
      shape);
}

Point3 reference_point(const Primitive& shape) {
  return std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sphere>) return s.center;
        else if constexpr (std::is_same_v<T, Cylinder>) return s.base + (0.5 * s.height) * normalized(s.axis);
        else return s.center;
      },
      shape);
}

RenderedFrame render_depth(const SceneSpec& scene, const CameraPose& pose,
                           const CameraIntrinsics& intr, const RenderOptions& options) {
  scene.validate();
  pose.validate();
  intr.validate();
  for (const auto& obj : scene.objects)
    if (contains(obj.shape, pose.position))
      throw GeometryError("render_depth: camera is inside object " + std::to_string(obj.id));

  RenderedFrame out;
  const std::size_t count = static_cast<std::size_t>(intr.width) * intr.height;
  out.frame.width = intr.width;
  out.frame.height = intr.height;
  out.frame.timestamp = options.timestamp;
  out.frame.data.assign(count, 0);
  out.depth_mm.assign(count, 0.0);
  out.labels.assign(count, kBackground);

  const double sigma = options.clean ? 0.0 : scene.noise_sigma;
  const double dropout = options.clean ? 0.0 : scene.dropout_rate;
  const double max_depth = 65535.0 * intr.depth_scale;

  const std::uint64_t frame_seed = substream_seed(scene.seed, options.timestamp);
  const auto render_row = [&](int v) {
    Rng rng(substream_seed(frame_seed, static_cast<std::uint64_t>(v)));
    const double yn = (v - intr.cy) / intr.fy;
    for (int u = 0; u < intr.width; ++u) {
      const Vec3 d = pose.rotation * Vec3{(u - intr.cx) / intr.fx, yn, 1.0};
      double best = kInf;
      std::uint8_t label = kBackground;
      if (auto t = intersect(scene.table, pose.position, d); t && *t < best) {
        best = *t;
        label = kPlaneLabel;
      }
      for (const auto& obj : scene.objects) {
        if (auto t = intersect(obj.shape, pose.position, d); t && *t < best) {
          best = *t;
          label = static_cast<std::uint8_t>(obj.id);
        }
      }
      // Draws are unconditional so a clean and a noisy render share streams.
      const double noise = rng.normal();
      const bool dropped = rng.uniform() < dropout;
      const std::size_t i = static_cast<std::size_t>(v) * intr.width + u;
      out.labels[i] = label;
      if (label == kBackground || dropped) continue;
      const double z = best + sigma * noise;
      if (!(z > 0.0) || z > max_depth) continue;
      out.depth_mm[i] = z;
      out.frame.data[i] = static_cast<std::uint16_t>(
          std::min(65535.0, std::floor(z / intr.depth_scale + 0.5)));
    }
  };

  if (options.exec == Execution::serial) {
    for (int v = 0; v < intr.height; ++v) render_row(v);
  } else {
#pragma omp parallel for schedule(static)
    for (int v = 0; v < intr.height; ++v) render_row(v);
  }
  return out;
}

std::vector<double> approach_ranges(double start_range, double end_range, int frames) {
  if (!(start_range > end_range) || !(end_range > 0.0))
    throw ConfigError("approach: need start_range > end_range > 0");
  if (frames < 2) throw ConfigError("approach: need at least 2 frames");
  std::vector<double> ranges(static_cast<std::size_t>(frames));
  for (int i = 0; i < frames; ++i)
    ranges[i] = start_range + (end_range - start_range) * i / (frames - 1);
  return ranges;
}

std::vector<CameraPose> approach_trajectory(const ApproachSpec& spec) {
  const auto ranges = approach_ranges(spec.start_range, spec.end_range, spec.frames);
  const TablePlane table;
  const auto [eu, ev] = table.axes();
  const Vec3 dir = (std::cos(spec.elevation) * std::cos(spec.azimuth)) * eu +
                   (std::cos(spec.elevation) * std::sin(spec.azimuth)) * ev +
                   std::sin(spec.elevation) * table.normal;
  std::vector<CameraPose> poses;
  poses.reserve(ranges.size());
  for (double r : ranges) poses.push_back(look_at(spec.target + r * dir, spec.target, table.normal));
  return poses;
}

std::vector<CameraPose> approach_trajectory(double start_range, double end_range, int frames) {
  ApproachSpec spec;
  spec.start_range = start_range;
  spec.end_range = end_range;
  spec.frames = frames;
  return approach_trajectory(spec);
}

std::vector<int> keyframe_indices(int frame_count, int every, int first) {
  if (every < 1) throw ConfigError("keyframes: every must be >= 1");
  std::vector<int> out;
  for (int i = 0; i < std::min(first, frame_count); i += every) out.push_back(i);
  return out;
}

namespace {

Primitive make_shape(ShapeKind kind, Rng& rng, std::optional<double> size) {
  switch (kind) {
    case ShapeKind::sphere: {
      const double r = size.value_or(rng.uniform(15.0, 60.0));
      return Sphere{{0, 0, r}, r};
    }
    case ShapeKind::cylinder: {
      const double r = size.value_or(rng.uniform(15.0, 45.0));
      const double h = rng.uniform(40.0, 120.0);
      return Cylinder{{0, 0, 0}, {0, 0, 1}, r, h};
    }
    case ShapeKind::box: {
      const double hx = size.value_or(rng.uniform(15.0, 60.0));
      const double hy = size.value_or(rng.uniform(15.0, 60.0));
      const double hz = size.value_or(rng.uniform(15.0, 60.0));
      const double yaw = rng.uniform(0.0, std::numbers::pi);
      return Box{{0, 0, hz}, {hx, hy, hz}, rotation_about({0, 0, 1}, yaw)};
    }
  }
  return Sphere{{0, 0, 30}, 30};
}

GripType grip_of(const Primitive& shape) {
  if (std::holds_alternative<Sphere>(shape)) return GripType::spherical;
  if (std::holds_alternative<Cylinder>(shape)) return GripType::cylindrical;
  return GripType::pinch;
}

Primitive translated(Primitive shape, double x, double y) {
  std::visit(
      [&](auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Cylinder>) {
          s.base.x += x;
          s.base.y += y;
        } else {
          s.center.x += x;
          s.center.y += y;
        }
      },
      shape);
  return shape;
}

double angle_gap(double a, double b) {
  double d = std::fmod(std::abs(a - b), 2.0 * std::numbers::pi);
  return d > std::numbers::pi ? 2.0 * std::numbers::pi - d : d;
}

}  // namespace

SceneSpec generate_scene(std::uint64_t seed, const SceneTemplate& tmpl) {
  Rng rng(substream_seed(seed, 0x5CE9E));
  SceneSpec scene;
  scene.seed = seed;
  scene.noise_sigma = tmpl.noise_sigma;
  scene.dropout_rate = tmpl.dropout_rate;

  std::vector<std::pair<Primitive, GripType>> shapes;
  switch (tmpl.kind) {
    case SceneTemplate::Kind::single_object: {
      const ShapeKind kind = tmpl.shape.value_or(static_cast<ShapeKind>(rng.below(3)));
      auto shape = make_shape(kind, rng, tmpl.size);
      shapes.emplace_back(shape, grip_of(shape));
      break;
    }
    case SceneTemplate::Kind::cluttered: {
      if (tmpl.objects < 1) throw ConfigError("cluttered scene needs at least 1 object");
      for (int i = 0; i < tmpl.objects; ++i) {
        auto shape = make_shape(static_cast<ShapeKind>(rng.below(3)), rng, std::nullopt);
        shapes.emplace_back(shape, grip_of(shape));
      }
      break;
    }
    case SceneTemplate::Kind::grip_taxonomy: {
      const double hx = rng.uniform(15.0, 25.0);
      const double hy = rng.uniform(15.0, 25.0);
      const double hz = rng.uniform(15.0, 20.0);
      const double yaw = rng.uniform(0.0, std::numbers::pi);
      shapes.emplace_back(Box{{0, 0, hz}, {hx, hy, hz}, rotation_about({0, 0, 1}, yaw)},
                          GripType::pinch);
      const double rs = rng.uniform(30.0, 50.0);
      shapes.emplace_back(Sphere{{0, 0, rs}, rs}, GripType::spherical);
      shapes.emplace_back(Cylinder{{0, 0, 0}, {0, 0, 1}, rng.uniform(25.0, 40.0),
                                   rng.uniform(80.0, 120.0)},
                          GripType::cylindrical);
      break;
    }
  }

  constexpr double kGap = 15.0;
  constexpr double kMaxRadius = 380.0;
  constexpr int kRetries = 500;
  std::vector<std::pair<Point3, double>> placed;  // footprint center, radius
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const double fr = footprint_radius(shapes[i].first);
    double x = 0.0, y = 0.0;
    if (i > 0) {
      bool ok = false;
      for (int attempt = 0; attempt < kRetries && !ok; ++attempt) {
        const double lo = placed[0].second + fr + kGap;
        const double dist = rng.uniform(lo, std::max(lo + 1.0, kMaxRadius));
        const double ang = rng.uniform(0.0, 2.0 * std::numbers::pi);
        if (tmpl.clear_azimuth && angle_gap(ang, *tmpl.clear_azimuth) < tmpl.clear_half_width)
          continue;
        x = dist * std::cos(ang);
        y = dist * std::sin(ang);
        ok = true;
        for (const auto& [c, r] : placed)
          if (std::hypot(x - c.x, y - c.y) < r + fr + kGap) ok = false;
      }
      if (!ok)
        throw GeometryError("generate_scene: could not place object " + std::to_string(i + 1) +
                            " after " + std::to_string(kRetries) + " attempts");
    }
    placed.push_back({{x, y, 0.0}, fr});
    scene.objects.push_back({static_cast<int>(i) + 2, translated(shapes[i].first, x, y),
                             shapes[i].second});
  }
  scene.validate();
  return scene;
}

json scene_to_json(const SceneSpec& scene) {
  json objects = json::array();
  for (const auto& obj : scene.objects) {
    json j{{"id", obj.id}, {"grip", std::string(to_string(obj.grip))}};
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Sphere>) {
            j["type"] = "sphere";
            j["center"] = point_json(s.center);
            j["radius"] = s.radius;
          } else if constexpr (std::is_same_v<T, Cylinder>) {
            j["type"] = "cylinder";
            j["base"] = point_json(s.base);
            j["axis"] = point_json(s.axis);
            j["radius"] = s.radius;
            j["height"] = s.height;
          } else {
            j["type"] = "box";
            j["center"] = point_json(s.center);
            j["half_extents"] = point_json(s.half_extents);
            j["orientation"] = s.orientation.m;
          }
        },
        obj.shape);
    objects.push_back(j);
  }
  return {{"table",
           {{"origin", point_json(scene.table.origin)},
            {"normal", point_json(scene.table.normal)},
            {"half_x", scene.table.half_x},
            {"half_y", scene.table.half_y}}},
          {"objects", objects},
          {"noise_sigma", scene.noise_sigma},
          {"dropout_rate", scene.dropout_rate},
          {"seed", scene.seed}};
}

SceneSpec scene_from_json(const json& j) {
  SceneSpec scene;
  try {
    if (j.contains("table")) {
      const auto& t = j.at("table");
      scene.table.origin = point_from(t.at("origin"));
      scene.table.normal = point_from(t.at("normal"));
      scene.table.half_x = t.value("half_x", scene.table.half_x);
      scene.table.half_y = t.value("half_y", scene.table.half_y);
    }
    for (const auto& o : j.at("objects")) {
      SceneObject obj;
      obj.id = o.at("id").get<int>();
      const auto type = o.at("type").get<std::string>();
      if (type == "sphere") {
        obj.shape = Sphere{point_from(o.at("center")), o.at("radius").get<double>()};
      } else if (type == "cylinder") {
        obj.shape = Cylinder{point_from(o.at("base")), point_from(o.at("axis")),
                             o.at("radius").get<double>(), o.at("height").get<double>()};
      } else if (type == "box") {
        Box b{point_from(o.at("center")), point_from(o.at("half_extents")), Mat3::identity()};
        if (o.contains("orientation")) b.orientation.m = o.at("orientation").get<std::array<double, 9>>();
        obj.shape = b;
      } else {
        throw ConfigError("scene: unknown object type '" + type + "'");
      }
      obj.grip = o.contains("grip") ? parse_grip_type(o.at("grip").get<std::string>())
                                    : grip_of(obj.shape);
      scene.objects.push_back(obj);
    }
    scene.noise_sigma = j.value("noise_sigma", 0.0);
    scene.dropout_rate = j.value("dropout_rate", 0.0);
    scene.seed = j.value("seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  }
  scene.validate();
  return scene;
}

SceneSpec load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": unreadable file");
  try {
    return scene_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void save_scene(const std::filesystem::path& path, const SceneSpec& scene) {
  std::ofstream out(path);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << scene_to_json(scene).dump(2) << '\n';
}

std::map<int, VisibleObject> visible_objects(const RenderedFrame& render,
                                             const CameraIntrinsics& intr, int stride) {
  std::map<int, Point3> sums;
  std::map<int, VisibleObject> out;
  for (int v = 0; v < intr.height; v += stride) {
    for (int u = 0; u < intr.width; u += stride) {
      const std::size_t i = static_cast<std::size_t>(v) * intr.width + u;
      const int label = render.labels[i];
      const double z = render.depth_mm[i];
      if (label < 2 || !(z > 0.0)) continue;
      sums[label] = sums[label] + Point3{(u - intr.cx) * z / intr.fx, (v - intr.cy) * z / intr.fy, z};
      ++out[label].pixels;
    }
  }
  for (auto& [id, vis] : out) vis.centroid = (1.0 / static_cast<double>(vis.pixels)) * sums[id];
  return out;
}

std::vector<ApproachFrame> simulate_approach(const SceneSpec& scene, ApproachSpec spec,
                                             const CameraIntrinsics& intr, int keyframe_every,
                                             int keyframe_first, Execution exec,
                                             bool keyframes_only) {
  if (scene.objects.empty()) throw ConfigError("simulate_approach: scene has no objects");
  spec.target = reference_point(scene.objects.front().shape);
  const auto poses = approach_trajectory(spec);
  const auto ranges = approach_ranges(spec.start_range, spec.end_range, spec.frames);
  const auto keys = keyframe_indices(spec.frames, keyframe_every, keyframe_first);

  std::vector<ApproachFrame> out;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const bool key = std::find(keys.begin(), keys.end(), static_cast<int>(i)) != keys.end();
    if (keyframes_only && !key) continue;
    ApproachFrame& f = out.emplace_back();
    f.pose = poses[i];
    f.range = ranges[i];
    f.keyframe = key;
    RenderOptions opts;
    opts.exec = exec;
    opts.timestamp = i;
    f.render = render_depth(scene, f.pose, intr, opts);
    opts.clean = true;
    f.truth = visible_objects(render_depth(scene, f.pose, intr, opts), intr, 1);
  }
  return out;
}

PlaneModel table_in_camera(const TablePlane& table, const CameraPose& pose) {
  const Vec3 n = pose.rotation.transposed() * normalized(table.normal);
  const Point3 o = pose.to_camera(table.origin);
  PlaneModel plane;
  plane.a = n.x;
  plane.b = n.y;
  plane.c = n.z;
  plane.d = -dot(n, o);
  return plane;
}

}  // namespace pcgrasp
