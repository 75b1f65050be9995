#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pcgrasp/depth_io.hpp"
#include "pcgrasp/execution.hpp"
#include "pcgrasp/geometry.hpp"
#include "pcgrasp/plane_fit.hpp"

namespace pcgrasp {

/// Rectangular table top. Half extents <= 0 make that direction unbounded.
struct TablePlane {
  Point3 origin{0, 0, 0};
  Vec3 normal{0, 0, 1};
  double half_x = 700.0;
  double half_y = 700.0;

  /// Orthonormal in-plane axes (u, v) with u x v = normal.
  std::pair<Vec3, Vec3> axes() const;
  double height_of(const Point3& p) const { return dot(normalized(normal), p - origin); }
};

struct Sphere {
  Point3 center;
  double radius = 0.0;
};

/// Finite solid cylinder from `base` along unit `axis` for `height`.
struct Cylinder {
  Point3 base;
  Vec3 axis{0, 0, 1};
  double radius = 0.0;
  double height = 0.0;
};

/// Oriented box; `orientation` maps box-local axes to the scene frame.
struct Box {
  Point3 center;
  Vec3 half_extents;
  Mat3 orientation;
};

using Primitive = std::variant<Sphere, Cylinder, Box>;

enum class GripType { pinch, spherical, cylindrical };

std::string_view to_string(GripType grip);
GripType parse_grip_type(std::string_view name);

struct SceneObject {
  int id = 2;  ///< label-image value, 2..255
  Primitive shape;
  GripType grip = GripType::spherical;
};

struct SceneSpec {
  TablePlane table;
  std::vector<SceneObject> objects;
  double noise_sigma = 0.0;   ///< depth noise std-dev along the ray, mm
  double dropout_rate = 0.0;  ///< fraction of pixels zeroed
  std::uint64_t seed = 0;

  /// Throws ConfigError on a violated invariant (sizes, ids, objects below
  /// the table, dropout range).
  void validate() const;
  const SceneObject* find(int id) const;
};

/// Camera placement: `rotation` maps camera-frame vectors (x right, y down,
/// z forward) to the scene frame.
struct CameraPose {
  Point3 position;
  Mat3 rotation;

  void validate() const;
  Point3 to_camera(const Point3& scene_point) const;
  Point3 to_scene(const Point3& camera_point) const;
};

/// Camera at `position` looking at `target`, image "down" toward -up.
CameraPose look_at(const Point3& position, const Point3& target, Vec3 up = {0, 0, 1});

/// Nearest intersection parameter t > 0 of o + t d with the primitive.
std::optional<double> intersect(const Primitive& shape, const Point3& o, const Vec3& d);
std::optional<double> intersect(const TablePlane& table, const Point3& o, const Vec3& d);

/// True when p lies strictly inside the primitive.
bool contains(const Primitive& shape, const Point3& p);

/// Lowest point of the primitive along the table normal, as a height.
double lowest_height(const Primitive& shape, const TablePlane& table);

/// Radius of a circle around the primitive's base point (sphere/box center,
/// cylinder base) that bounds its projection onto a z-up table.
double footprint_radius(const Primitive& shape);

Point3 reference_point(const Primitive& shape);

enum Label : std::uint8_t { kBackground = 0, kPlaneLabel = 1 };

struct RenderedFrame {
  DepthFrame frame;               ///< quantized raw depth
  std::vector<double> depth_mm;   ///< unquantized depth (0 = no reading)
  std::vector<std::uint8_t> labels;
};

struct RenderOptions {
  bool clean = false;  ///< skip noise and dropout (ground-truth render)
  Execution exec = Execution::parallel;
  std::uint64_t timestamp = 0;
};

/// Ray-casts the scene through the pinhole model. Depth is the camera-frame
/// Z of the nearest hit; noise is Gaussian in Z (i.e. along the ray). Each
/// row draws from its own seeded substream, so serial and parallel renders
/// are bit-identical. Throws GeometryError when the camera is inside an
/// object.
RenderedFrame render_depth(const SceneSpec& scene, const CameraPose& pose,
                           const CameraIntrinsics& intr, const RenderOptions& options = {});

struct ApproachSpec {
  Point3 target{0, 0, 0};
  double azimuth = 0.0;    ///< radians, in the table plane
  double elevation = 0.9;  ///< radians above the table
  double start_range = 800.0;
  double end_range = 300.0;
  int frames = 100;
};

/// Camera poses linearly interpolated in range toward the target, each
/// looking at it. Throws ConfigError unless start > end > 0 and frames >= 2.
std::vector<CameraPose> approach_trajectory(const ApproachSpec& spec);
std::vector<CameraPose> approach_trajectory(double start_range, double end_range, int frames);

/// Ranges used by approach_trajectory.
std::vector<double> approach_ranges(double start_range, double end_range, int frames);

/// Indices 0, every, 2*every, ... below min(first, frame_count).
std::vector<int> keyframe_indices(int frame_count, int every = 20, int first = 100);

enum class ShapeKind { sphere, cylinder, box };

struct SceneTemplate {
  enum class Kind { single_object, cluttered, grip_taxonomy } kind = Kind::single_object;
  int objects = 1;                  ///< object count for cluttered
  std::optional<ShapeKind> shape;   ///< single_object: forced shape
  std::optional<double> size;       ///< single_object: radius or half size, mm
  /// When set, objects after the first stay out of the wedge of this
  /// azimuth (radians) +/- clear_half_width around the first object.
  std::optional<double> clear_azimuth;
  double clear_half_width = 1.2;
  double noise_sigma = 2.0;
  double dropout_rate = 0.0;
};

/// Deterministic scene from a seed. The first object sits at the table
/// origin; others are placed without footprint overlap. Sizes span 30-120 mm.
/// Throws GeometryError if placement fails after bounded retries.
SceneSpec generate_scene(std::uint64_t seed, const SceneTemplate& tmpl);

nlohmann::json scene_to_json(const SceneSpec& scene);
SceneSpec scene_from_json(const nlohmann::json& j);
SceneSpec load_scene(const std::filesystem::path& path);
void save_scene(const std::filesystem::path& path, const SceneSpec& scene);

struct VisibleObject {
  Point3 centroid;  ///< camera frame, mm
  std::size_t pixels = 0;
};

/// Mean camera-frame position of each object's visible pixels in an
/// unquantized render, keyed by object id.
std::map<int, VisibleObject> visible_objects(const RenderedFrame& render,
                                             const CameraIntrinsics& intr, int stride = 1);

struct ApproachFrame {
  CameraPose pose;
  double range = 0.0;
  RenderedFrame render;                   ///< noisy render, timestamp = frame index
  std::map<int, VisibleObject> truth;     ///< from a clean render, full resolution
  bool keyframe = false;
};

/// Renders an approach toward the scene's first object and records
/// per-frame ground truth. With keyframes_only, only keyframes are rendered
/// and returned.
std::vector<ApproachFrame> simulate_approach(const SceneSpec& scene, ApproachSpec spec,
                                             const CameraIntrinsics& intr, int keyframe_every = 20,
                                             int keyframe_first = 100,
                                             Execution exec = Execution::parallel,
                                             bool keyframes_only = false);

/// Table plane expressed in the camera frame (unit normal).
PlaneModel table_in_camera(const TablePlane& table, const CameraPose& pose);

}  // namespace pcgrasp
