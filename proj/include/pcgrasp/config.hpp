#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include <json.hpp>

#include "pcgrasp/clustering.hpp"
#include "pcgrasp/control.hpp"
#include "pcgrasp/density.hpp"
#include "pcgrasp/depth_io.hpp"
#include "pcgrasp/plane_fit.hpp"
#include "pcgrasp/scene_graph.hpp"

namespace pcgrasp {

/// Every tunable of the frame pipeline. JSON layout:
///
///   {
///     "intrinsics": "camera.json" | {fx, fy, cx, cy, width, height, depth_scale},
///     "stride": 2, "seed": 1, "target_policy": "origin_norm", "motor_enabled": true,
///     "density": {"epsilon_mm": 10},
///     "prosac":  {"m0": 0, "delta_mm": 8, "min_support_fraction": 1.0,
///                 "max_iterations": 500, "seed": <defaults to seed>},
///     "cluster": {"epsilon_mm": 15, "mu": 12},
///     "control": {"tau_grasp_mm": 400, "v_close": 110, "dwell_s": 3.0,
///                 "frame_period_s": 0.1}
///   }
///
/// Every key is optional; unknown keys are rejected.
struct PipelineConfig {
  CameraIntrinsics intrinsics;
  int stride = 2;
  std::uint64_t seed = 1;
  TargetPolicy policy = TargetPolicy::origin_norm;
  bool motor_enabled = true;
  DensityParams density;
  ProsacParams prosac;
  ClusterParams cluster;
  ControlConfig control;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

/// Relative intrinsics paths resolve against `base_dir`.
PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const PipelineConfig& cfg);

}  // namespace pcgrasp
