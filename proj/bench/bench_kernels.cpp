// Serial reference vs OpenMP kernels on a 640x480 tabletop frame.

#include <benchmark/benchmark.h>

#include "pcgrasp/density.hpp"
#include "pcgrasp/pipeline.hpp"
#include "pcgrasp/plane_fit.hpp"
#include "pcgrasp/simulator.hpp"

namespace {

using namespace pcgrasp;

struct Fixture {
  SceneSpec scene;
  CameraPose pose;
  CameraIntrinsics intr;
  RenderedFrame render;
  PointCloud cloud;
  PlaneModel plane;

  Fixture() {
    SceneTemplate tmpl;
    tmpl.kind = SceneTemplate::Kind::cluttered;
    tmpl.objects = 4;
    scene = generate_scene(7, tmpl);
    pose = approach_trajectory(600.0, 300.0, 2).front();
    render = render_depth(scene, pose, intr);
    cloud = backproject(render.frame, intr, 2);
    plane = table_in_camera(scene.table, pose);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

Execution exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void BM_Density(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(neighborhood_density(f.cloud, DensityParams{}, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.cloud.points.size()));
}

void BM_Support(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(count_support(f.cloud.points, f.plane, 8.0, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.cloud.points.size()));
}

void BM_Render(benchmark::State& state) {
  const auto& f = fixture();
  RenderOptions opts;
  opts.exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(render_depth(f.scene, f.pose, f.intr, opts));
}

void BM_Frame(benchmark::State& state) {
  const auto& f = fixture();
  const PipelineConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(analyze_frame(f.render.frame, cfg, exec_of(state)));
}

}  // namespace

// Arg 0 = serial reference, 1 = OpenMP.
BENCHMARK(BM_Density)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Support)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Render)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Frame)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
