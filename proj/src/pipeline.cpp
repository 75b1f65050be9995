#include "pcgrasp/pipeline.hpp"

#include <algorithm>

#include "pcgrasp/density.hpp"
#include "pcgrasp/error.hpp"
#include "pcgrasp/rng.hpp"

namespace pcgrasp {

using nlohmann::json;

FrameAnalysis analyze_frame(const DepthFrame& frame, const PipelineConfig& cfg, Execution exec,
                            bool keep_cloud) {
  FrameAnalysis out;
  PointCloud cloud = backproject(frame, cfg.intrinsics, cfg.stride);
  out.n_points = cloud.size();
  if (cloud.empty()) {
    out.graph.frame_timestamp = frame.timestamp;
    if (keep_cloud) out.cloud = std::move(cloud);
    return out;
  }

  OrderedCloud ordered = order_by_confidence(std::move(cloud), cfg.density, exec);

  if (ordered.size() >= 3) {
    ProsacParams params = cfg.prosac;
    params.seed = substream_seed(cfg.prosac.seed, frame.timestamp);
    if (params.m0 != 0) params.m0 = std::min(params.m0, ordered.size());
    try {
      const PlaneFit fit = fit_plane_prosac(ordered, params, exec);
      out.plane = fit.plane;
      out.plane_iterations = fit.iterations;
    } catch (const GeometryError&) {
      out.plane.reset();
    }
  }

  out.objects = out.plane ? remove_plane(ordered.cloud, *out.plane, cfg.prosac.delta) : ordered.cloud;
  out.clusters = dbscan(out.objects, cfg.cluster, exec);
  out.graph = select_target(cluster_centroids_pca(out.objects, out.clusters, frame.timestamp),
                            cfg.policy);
  out.distance = target_distance(out.graph);
  if (keep_cloud) out.cloud = std::move(ordered.cloud);
  return out;
}

json FrameRecord::to_json() const {
  json j{{"t", timestamp},
         {"frame", frame},
         {"n_points", n_points},
         {"plane_support", plane_support},
         {"plane_iterations", plane_iterations},
         {"clusters", clusters},
         {"target", nullptr},
         {"distance_mm", nullptr},
         {"phase", std::string(to_string(phase))},
         {"command", command},
         {"dwell_elapsed_s", dwell_elapsed}};
  if (target) j["target"] = {target->x, target->y, target->z};
  if (distance) j["distance_mm"] = *distance;
  return j;
}

FrameRecord FrameRecord::from_json(const json& j) {
  FrameRecord r;
  try {
    r.timestamp = j.at("t").get<std::uint64_t>();
    r.frame = j.value("frame", std::string{});
    r.n_points = j.value("n_points", std::size_t{0});
    r.plane_support = j.value("plane_support", std::size_t{0});
    r.plane_iterations = j.value("plane_iterations", std::size_t{0});
    r.clusters = j.value("clusters", 0);
    if (j.contains("target") && !j.at("target").is_null()) {
      const auto& t = j.at("target");
      if (!t.is_array() || t.size() != 3) throw SchemaError("record: target must be [x, y, z]");
      r.target = Point3{t[0].get<double>(), t[1].get<double>(), t[2].get<double>()};
    }
    if (j.contains("distance_mm") && !j.at("distance_mm").is_null())
      r.distance = j.at("distance_mm").get<double>();
    r.command = j.value("command", 90);
    r.dwell_elapsed = j.value("dwell_elapsed_s", 0.0);
    const auto phase = j.value("phase", std::string("idle"));
    for (Phase p : {Phase::idle, Phase::dwelling, Phase::closing, Phase::holding, Phase::releasing})
      if (to_string(p) == phase) r.phase = p;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("record: ") + e.what());
  }
  return r;
}

Pipeline::Pipeline(PipelineConfig cfg, Execution exec)
    : cfg_(std::move(cfg)), exec_(exec), state_(ControllerState::initial(cfg_.control, cfg_.motor_enabled)) {
  cfg_.validate();
}

FrameRecord Pipeline::process(const DepthFrame& frame, std::string name) {
  const FrameAnalysis a = analyze_frame(frame, cfg_, exec_);
  const ControlStep step = step_vision(state_, a.distance, cfg_.control);
  state_ = step.state;

  FrameRecord r;
  r.timestamp = frame.timestamp;
  r.frame = std::move(name);
  r.n_points = a.n_points;
  r.plane_support = a.plane ? a.plane->support : 0;
  r.plane_iterations = a.plane_iterations;
  r.clusters = a.clusters.k;
  if (const ObjectNode* t = a.graph.target()) r.target = t->centroid;
  r.distance = a.distance;
  r.phase = state_.phase;
  r.command = step.command;
  r.dwell_elapsed = state_.dwell_elapsed;
  return r;
}

void Pipeline::release() { state_ = pcgrasp::release(state_, cfg_.control).state; }

json run_header(const PipelineConfig& cfg) {
  return {{"type", "header"}, {"seed", cfg.seed}, {"config", config_to_json(cfg)}};
}

}  // namespace pcgrasp
