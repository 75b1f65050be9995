#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "pcgrasp/clustering.hpp"
#include "pcgrasp/config.hpp"
#include "pcgrasp/control.hpp"
#include "pcgrasp/depth_io.hpp"
#include "pcgrasp/execution.hpp"
#include "pcgrasp/plane_fit.hpp"
#include "pcgrasp/scene_graph.hpp"

namespace pcgrasp {

/// Everything the perception stages produce for one frame.
struct FrameAnalysis {
  std::size_t n_points = 0;
  std::optional<PlaneModel> plane;
  std::size_t plane_iterations = 0;
  PointCloud objects;  ///< off-plane points
  ClusterAssignment clusters;
  SceneGraph graph;
  std::optional<double> distance;
  PointCloud cloud;  ///< full cloud, only filled when requested
};

/// Backprojection through target selection. Frames too sparse for a plane
/// (fewer than 3 points, or no plane with support >= 3) skip plane removal
/// and cluster the whole cloud. PROSAC draws from a substream of the
/// configured seed keyed by the frame timestamp.
FrameAnalysis analyze_frame(const DepthFrame& frame, const PipelineConfig& cfg,
                            Execution exec = Execution::parallel, bool keep_cloud = false);

/// One line of the run record stream.
struct FrameRecord {
  std::uint64_t timestamp = 0;
  std::string frame;
  std::size_t n_points = 0;
  std::size_t plane_support = 0;
  std::size_t plane_iterations = 0;
  int clusters = 0;
  std::optional<Point3> target;
  std::optional<double> distance;
  Phase phase = Phase::idle;
  int command = 90;
  double dwell_elapsed = 0.0;

  nlohmann::json to_json() const;
  static FrameRecord from_json(const nlohmann::json& j);
};

/// Stateful frame loop: analysis plus the vision-mode controller.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig cfg, Execution exec = Execution::parallel);

  FrameRecord process(const DepthFrame& frame, std::string name = {});

  const PipelineConfig& config() const { return cfg_; }
  const ControllerState& controller() const { return state_; }
  void release();

 private:
  PipelineConfig cfg_;
  Execution exec_;
  ControllerState state_;
};

/// Header line of a run record stream.
nlohmann::json run_header(const PipelineConfig& cfg);

}  // namespace pcgrasp
