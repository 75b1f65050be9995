#include "pcgrasp/config.hpp"

#include <fstream>
#include <set>
#include <string>

#include "pcgrasp/error.hpp"

namespace pcgrasp {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw ConfigError("unknown config key '" + where + key + "'");
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + where + key + "' has the wrong type");
  }
}

CameraIntrinsics intrinsics_from(const json& j) {
  reject_unknown(j, {"fx", "fy", "cx", "cy", "width", "height", "depth_scale"}, "intrinsics.");
  CameraIntrinsics intr;
  read(j, "fx", intr.fx, "intrinsics.");
  read(j, "fy", intr.fy, "intrinsics.");
  read(j, "cx", intr.cx, "intrinsics.");
  read(j, "cy", intr.cy, "intrinsics.");
  read(j, "width", intr.width, "intrinsics.");
  read(j, "height", intr.height, "intrinsics.");
  read(j, "depth_scale", intr.depth_scale, "intrinsics.");
  return intr;
}

}  // namespace

void PipelineConfig::validate() const {
  intrinsics.validate();
  if (stride < 1) throw ConfigError("stride must be >= 1");
  density.validate();
  prosac.validate();
  cluster.validate();
  control.validate();
}

PipelineConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  reject_unknown(j,
                 {"intrinsics", "stride", "seed", "target_policy", "motor_enabled", "density",
                  "prosac", "cluster", "control"},
                 "");
  PipelineConfig cfg;
  if (j.contains("intrinsics")) {
    const auto& intr = j.at("intrinsics");
    if (intr.is_string()) {
      std::filesystem::path p = intr.get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      cfg.intrinsics = load_intrinsics(p);
    } else {
      cfg.intrinsics = intrinsics_from(intr);
    }
  }
  read(j, "stride", cfg.stride, "");
  read(j, "seed", cfg.seed, "");
  read(j, "motor_enabled", cfg.motor_enabled, "");
  if (j.contains("target_policy")) {
    std::string name;
    read(j, "target_policy", name, "");
    cfg.policy = parse_target_policy(name);
  }
  cfg.prosac.seed = cfg.seed;

  if (j.contains("density")) {
    const auto& d = j.at("density");
    reject_unknown(d, {"epsilon_mm"}, "density.");
    read(d, "epsilon_mm", cfg.density.epsilon, "density.");
  }
  if (j.contains("prosac")) {
    const auto& p = j.at("prosac");
    reject_unknown(p, {"m0", "delta_mm", "min_support_fraction", "max_iterations", "seed"}, "prosac.");
    read(p, "m0", cfg.prosac.m0, "prosac.");
    read(p, "delta_mm", cfg.prosac.delta, "prosac.");
    read(p, "min_support_fraction", cfg.prosac.min_support_fraction, "prosac.");
    read(p, "max_iterations", cfg.prosac.max_iterations, "prosac.");
    read(p, "seed", cfg.prosac.seed, "prosac.");
  }
  if (j.contains("cluster")) {
    const auto& c = j.at("cluster");
    reject_unknown(c, {"epsilon_mm", "mu"}, "cluster.");
    read(c, "epsilon_mm", cfg.cluster.epsilon, "cluster.");
    read(c, "mu", cfg.cluster.mu, "cluster.");
  }
  if (j.contains("control")) {
    const auto& c = j.at("control");
    reject_unknown(c, {"tau_grasp_mm", "v_close", "dwell_s", "frame_period_s"}, "control.");
    read(c, "tau_grasp_mm", cfg.control.tau_grasp, "control.");
    read(c, "v_close", cfg.control.v_close, "control.");
    read(c, "dwell_s", cfg.control.dwell, "control.");
    read(c, "frame_period_s", cfg.control.frame_period, "control.");
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": unreadable config file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

json config_to_json(const PipelineConfig& cfg) {
  const auto& i = cfg.intrinsics;
  return {{"intrinsics",
           {{"fx", i.fx}, {"fy", i.fy}, {"cx", i.cx}, {"cy", i.cy}, {"width", i.width},
            {"height", i.height}, {"depth_scale", i.depth_scale}}},
          {"stride", cfg.stride},
          {"seed", cfg.seed},
          {"target_policy", std::string(to_string(cfg.policy))},
          {"motor_enabled", cfg.motor_enabled},
          {"density", {{"epsilon_mm", cfg.density.epsilon}}},
          {"prosac",
           {{"m0", cfg.prosac.m0},
            {"delta_mm", cfg.prosac.delta},
            {"min_support_fraction", cfg.prosac.min_support_fraction},
            {"max_iterations", cfg.prosac.max_iterations},
            {"seed", cfg.prosac.seed}}},
          {"cluster", {{"epsilon_mm", cfg.cluster.epsilon}, {"mu", cfg.cluster.mu}}},
          {"control",
           {{"tau_grasp_mm", cfg.control.tau_grasp},
            {"v_close", cfg.control.v_close},
            {"dwell_s", cfg.control.dwell},
            {"frame_period_s", cfg.control.frame_period}}}};
}

}  // namespace pcgrasp
