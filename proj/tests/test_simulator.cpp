#include <doctest.h>

#include <cmath>
#include <numbers>
#include <variant>

#include "pcgrasp/error.hpp"
#include "pcgrasp/simulator.hpp"
#include "test_util.hpp"

using namespace pcgrasp;

namespace {

SceneSpec empty_table() {
  SceneSpec s;
  s.table.half_x = s.table.half_y = 0.0;  // unbounded
  return s;
}

CameraPose overhead(double height) { return look_at({0, 0, height}, {0, 0, 0}, {0, 1, 0}); }

}  // namespace

TEST_CASE("overhead view of the table") {
  const CameraIntrinsics intr;
  const RenderedFrame r = render_depth(empty_table(), overhead(500.0), intr);
  CHECK(r.frame.at(320, 240) == 500);
  CHECK(r.depth_mm[240 * 640 + 320] == doctest::Approx(500.0).epsilon(1e-12));
  // Depth is camera Z; the range along each ray is 500 / cos(view angle).
  for (int v = 0; v < 480; v += 37)
    for (int u = 0; u < 640; u += 41) {
      const double z = r.depth_mm[static_cast<std::size_t>(v) * 640 + u];
      CHECK(z == doctest::Approx(500.0).epsilon(1e-9));
      const Vec3 ray{(u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0};
      const double range = z * norm(ray);
      const double cos_angle = 1.0 / norm(ray);
      CHECK(range == doctest::Approx(500.0 / cos_angle).epsilon(1e-9));
      CHECK(r.labels[static_cast<std::size_t>(v) * 640 + u] == kPlaneLabel);
    }
}

TEST_CASE("sphere on the optical axis") {
  SceneSpec s = empty_table();
  s.objects.push_back({2, Sphere{{0, 0, 100}, 30.0}, GripType::spherical});
  const RenderedFrame r = render_depth(s, overhead(500.0), CameraIntrinsics{});
  CHECK(r.depth_mm[240 * 640 + 320] == doctest::Approx(370.0).epsilon(1e-12));
  CHECK(r.frame.at(320, 240) == 370);
  CHECK(r.labels[240 * 640 + 320] == 2);
}

TEST_CASE("render and backprojection agree below 1e-3 mm") {
  SceneTemplate tmpl;
  tmpl.kind = SceneTemplate::Kind::cluttered;
  tmpl.objects = 3;
  const SceneSpec scene = generate_scene(5, tmpl);
  const CameraIntrinsics intr;
  const CameraPose pose = approach_trajectory(600.0, 300.0, 2).front();
  RenderOptions clean;
  clean.clean = true;
  const RenderedFrame r = render_depth(scene, pose, intr, clean);
  const PointCloud c = backproject_mm(r.depth_mm, intr, 3);
  REQUIRE(c.size() > 1000);
  double worst = 0.0;
  for (const Point3& p : c.points) {
    const Point3 q = pose.to_scene(p);
    double best = 1e9;
    for (const auto& obj : scene.objects) {
      const Vec3 d = normalized(q - pose.position);
      if (auto t = intersect(obj.shape, pose.position, d)) best = std::min(best, norm(pose.position + *t * d - q));
    }
    if (auto t = intersect(scene.table, pose.position, normalized(q - pose.position)))
      best = std::min(best, norm(pose.position + *t * normalized(q - pose.position) - q));
    worst = std::max(worst, best);
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("noisy renders are seeded and execution independent") {
  SceneTemplate tmpl;
  tmpl.kind = SceneTemplate::Kind::cluttered;
  tmpl.objects = 2;
  tmpl.dropout_rate = 0.05;
  const SceneSpec scene = generate_scene(9, tmpl);
  const CameraPose pose = approach_trajectory(700.0, 300.0, 2).front();
  RenderOptions a;
  a.timestamp = 3;
  RenderOptions b = a;
  b.exec = Execution::serial;
  const RenderedFrame ra = render_depth(scene, pose, CameraIntrinsics{}, a);
  CHECK(ra.frame.data == render_depth(scene, pose, CameraIntrinsics{}, a).frame.data);
  CHECK(ra.frame.data == render_depth(scene, pose, CameraIntrinsics{}, b).frame.data);
  a.timestamp = 4;
  CHECK(ra.frame.data != render_depth(scene, pose, CameraIntrinsics{}, a).frame.data);
}

TEST_CASE("camera inside an object is rejected") {
  SceneSpec s = empty_table();
  s.objects.push_back({2, Sphere{{0, 0, 100}, 60.0}, GripType::spherical});
  CHECK_THROWS_AS(render_depth(s, overhead(120.0), CameraIntrinsics{}), GeometryError);
}

TEST_CASE("approach trajectory") {
  const auto ranges = approach_ranges(800, 300, 6);
  CHECK(ranges == std::vector<double>{800, 700, 600, 500, 400, 300});
  CHECK(approach_ranges(800, 300, 2) == std::vector<double>{800, 300});
  CHECK(keyframe_indices(100, 20, 100) == std::vector<int>{0, 20, 40, 60, 80});
  CHECK(keyframe_indices(30, 20, 100) == std::vector<int>{0, 20});
  CHECK_THROWS_AS(approach_trajectory(300, 800, 5), ConfigError);
  CHECK_THROWS_AS(approach_trajectory(800, 300, 1), ConfigError);

  const auto poses = approach_trajectory(800, 300, 6);
  for (std::size_t i = 0; i < poses.size(); ++i) {
    CHECK(norm(poses[i].position) == doctest::Approx(ranges[i]).epsilon(1e-12));
    // The target projects to the image center.
    const Point3 t = poses[i].to_camera({0, 0, 0});
    CHECK(std::abs(t.x) < 1e-9);
    CHECK(std::abs(t.y) < 1e-9);
    CHECK(t.z == doctest::Approx(ranges[i]).epsilon(1e-12));
  }
}

TEST_CASE("single object scenes rest on the table") {
  SceneTemplate tmpl;
  tmpl.shape = ShapeKind::sphere;
  tmpl.size = 35.0;
  const SceneSpec s = generate_scene(3, tmpl);
  REQUIRE(s.objects.size() == 1);
  const auto& sphere = std::get<Sphere>(s.objects[0].shape);
  CHECK(sphere.radius == 35.0);
  CHECK(lowest_height(s.objects[0].shape, s.table) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("cluttered scenes do not overlap and are deterministic") {
  SceneTemplate tmpl;
  tmpl.kind = SceneTemplate::Kind::cluttered;
  tmpl.objects = 3;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const SceneSpec s = generate_scene(seed, tmpl);
    REQUIRE(s.objects.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(lowest_height(s.objects[i].shape, s.table) >= -1e-9);
      for (std::size_t j = i + 1; j < 3; ++j) {
        const Point3 a = reference_point(s.objects[i].shape), b = reference_point(s.objects[j].shape);
        const double planar = std::hypot(a.x - b.x, a.y - b.y);
        CHECK(planar > footprint_radius(s.objects[i].shape) + footprint_radius(s.objects[j].shape));
      }
    }
    CHECK(scene_to_json(s) == scene_to_json(generate_scene(seed, tmpl)));
  }
}

TEST_CASE("grip taxonomy template covers the three grips") {
  SceneTemplate tmpl;
  tmpl.kind = SceneTemplate::Kind::grip_taxonomy;
  const SceneSpec s = generate_scene(1, tmpl);
  REQUIRE(s.objects.size() == 3);
  CHECK(s.objects[0].grip != s.objects[1].grip);
  CHECK(s.objects[1].grip != s.objects[2].grip);
  CHECK(s.objects[0].grip != s.objects[2].grip);
}

TEST_CASE("scene json round trip") {
  TempDir dir;
  SceneTemplate tmpl;
  tmpl.kind = SceneTemplate::Kind::cluttered;
  tmpl.objects = 4;
  const SceneSpec s = generate_scene(12, tmpl);
  save_scene(dir / "scene.json", s);
  CHECK(scene_to_json(load_scene(dir / "scene.json")) == scene_to_json(s));

  nlohmann::json bad = scene_to_json(s);
  bad["objects"][0]["id"] = 1;
  CHECK_THROWS_AS(scene_from_json(bad), ConfigError);
}

TEST_CASE("approach ground truth follows the first object") {
  SceneTemplate tmpl;
  tmpl.kind = SceneTemplate::Kind::cluttered;
  tmpl.objects = 2;
  tmpl.clear_azimuth = 0.0;
  const SceneSpec s = generate_scene(4, tmpl);
  ApproachSpec spec;
  spec.frames = 20;
  const auto frames = simulate_approach(s, spec, CameraIntrinsics{}, 5, 20);
  REQUIRE(frames.size() == 20);
  int keyframes = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    keyframes += frames[i].keyframe;
    CHECK(frames[i].render.frame.timestamp == i);
    REQUIRE(frames[i].truth.count(s.objects[0].id) == 1);
    const Point3 c = frames[i].truth.at(s.objects[0].id).centroid;
    // The visible centroid sits in front of the object reference point, near the axis.
    CHECK(std::hypot(c.x, c.y) < 60.0);
  }
  CHECK(keyframes == 4);
  const auto only = simulate_approach(s, spec, CameraIntrinsics{}, 5, 20, Execution::parallel, true);
  REQUIRE(only.size() == 4);
  CHECK(only[1].render.frame.data == frames[5].render.frame.data);
}
