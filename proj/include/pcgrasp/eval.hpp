#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "pcgrasp/depth_io.hpp"
#include "pcgrasp/simulator.hpp"

namespace pcgrasp {

/// Outcome of one evaluated keyframe.
struct FrameResult {
  std::size_t frame_index = 0;
  bool target_found = false;
  std::optional<Point3> target_centroid;
  std::optional<Point3> truth_centroid;
  std::optional<double> centroid_error;  ///< present iff both centroids are
  bool identity_correct = true;          ///< selected cluster matches the intended object
  double processing_ms = 0.0;

  static FrameResult make(std::size_t index, std::optional<Point3> target,
                          std::optional<Point3> truth, bool identity_correct = true,
                          double processing_ms = 0.0);
  bool success(double threshold_mm) const;
};

inline constexpr double kDefaultSuccessThresholdMm = 20.0;

/// Scores a selected target against simulator ground truth: the identity is
/// correct when the visible object nearest the selection is `intended_id`,
/// and the error is measured to that object's visible centroid.
FrameResult judge_target(std::size_t index, std::optional<Point3> selected,
                         const std::map<int, VisibleObject>& visible, int intended_id,
                         double processing_ms = 0.0);

/// Successful frames over all frames. Throws ConfigError on an empty list.
double rsr(std::span<const FrameResult> results, double threshold_mm = kDefaultSuccessThresholdMm);

using Ratio = boost::rational<std::int64_t>;

/// Decimal string of an exact ratio rounded half away from zero.
std::string format_fixed(const Ratio& value, int decimals = 2);

struct TrialRecord {
  std::string object_id;
  double grasp = 0.0;     ///< 0, 0.5 or 1
  double maintain = 0.0;  ///< 0, 0.5 or 1
  std::string participant;  ///< optional
};

struct GripScores {
  GripType grip = GripType::pinch;
  std::size_t trials = 0;
  Ratio grasp_pct;
  Ratio maintain_pct;
  Ratio gas_pct;  ///< (grasp + maintain) / 2
};

/// Grasping Ability Score summary. `overall_gas_pct` is the mean of the per
/// grip GAS; the alternative aggregations average per trial, per object and
/// per participant (absent when no trial names a participant).
struct GasReport {
  std::vector<GripScores> per_grip;
  Ratio overall_gas_pct;
  Ratio by_trial_pct;
  Ratio by_object_pct;
  std::optional<Ratio> by_participant_pct;
};

/// Throws SchemaError for an object missing from grip_map, a score outside
/// {0, 0.5, 1}, or an empty ledger.
GasReport gas(std::span<const TrialRecord> trials, const std::map<std::string, GripType>& grip_map);

/// CSV with header object_id,grasp_score,maintain_score[,participant_id].
std::vector<TrialRecord> load_trials_csv(const std::filesystem::path& path);
/// JSON object mapping object id to "pinch" | "spherical" | "cylindrical".
std::map<std::string, GripType> load_grip_map(const std::filesystem::path& path);

void write_gas_csv(std::ostream& out, const GasReport& report);
void write_gas_markdown(std::ostream& out, const GasReport& report);

struct FpsStats {
  double median_fps = 0.0;
  double mean_fps = 0.0;
  double std_fps = 0.0;  ///< sample standard deviation
  std::vector<double> frame_ms;
};

/// Times `process` on each frame after the first `warmup` frames (which run
/// untimed). Needs at least 10 timed frames; throws ConfigError otherwise.
FpsStats benchmark(const std::function<void(const DepthFrame&)>& process,
                   std::span<const DepthFrame> frames, std::size_t warmup);

FpsStats fps_statistics(std::span<const double> frame_ms);

/// Throughput reported for the reference geometric pipeline at 640x480.
inline constexpr double kReferenceFps = 10.72;
inline constexpr double kReferenceFpsStd = 0.58;
inline constexpr double kMinimumFps = 10.0;

void write_throughput_markdown(std::ostream& out, const FpsStats& stats, bool single_thread);
void write_rsr_report(std::ostream& csv, std::ostream& md, std::span<const FrameResult> results,
                      double threshold_mm);

}  // namespace pcgrasp
