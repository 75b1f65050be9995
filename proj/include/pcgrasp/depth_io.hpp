#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "pcgrasp/geometry.hpp"

namespace pcgrasp {

/// Pinhole intrinsics plus the depth unit of the sensor.
struct CameraIntrinsics {
  double fx = 615.0;
  double fy = 615.0;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;
  double depth_scale = 1.0;  ///< millimeters per raw depth unit

  /// Throws ConfigError when any invariant is violated.
  void validate() const;
};

/// Row-major depth samples. A raw value of 0 means "no reading".
struct DepthFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> data;
  std::uint64_t timestamp = 0;

  std::uint16_t at(int u, int v) const { return data[static_cast<std::size_t>(v) * width + u]; }
};

/// Points with optional per-point density and confidence.
struct PointCloud {
  std::vector<Point3> points;
  std::optional<std::vector<std::uint32_t>> densities;
  std::optional<std::vector<double>> confidences;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  /// Throws ConfigError when a parallel list has the wrong length or a
  /// confidence lies outside [0, 1].
  void validate() const;
};

enum class DepthFormat { pgm16, raw16le, csv };

/// Parses "pgm16" / "pgm", "raw16le" / "raw", "csv".
DepthFormat parse_depth_format(std::string_view name);

/// Guesses the format from the extension (.pgm, .raw, .csv).
std::optional<DepthFormat> depth_format_from_extension(const std::filesystem::path& path);

/// Reads a depth frame; samples are preserved bit-exactly. raw16le frames
/// take their dimensions from a sidecar `<path>.json` holding width/height.
DepthFrame load_depth_frame(const std::filesystem::path& path, DepthFormat format,
                            std::uint64_t timestamp = 0);

/// Binary P5 with maxval 65535 (big-endian samples).
void save_pgm16(const std::filesystem::path& path, const DepthFrame& frame);

/// Binary P5 with maxval 255, one byte per sample.
void save_pgm8(const std::filesystem::path& path, int width, int height,
               std::span<const std::uint8_t> data);

void save_raw16le(const std::filesystem::path& path, const DepthFrame& frame);

/// Intrinsics from a JSON object with keys fx, fy, cx, cy, width, height,
/// depth_scale (depth_scale optional, default 1.0). Validated on load.
CameraIntrinsics load_intrinsics(const std::filesystem::path& path);
void save_intrinsics(const std::filesystem::path& path, const CameraIntrinsics& intr);

/// Pinhole backprojection of every `stride`-th pixel in each direction.
/// Zero-depth pixels are skipped; output is in row-major pixel order.
PointCloud backproject(const DepthFrame& frame, const CameraIntrinsics& intr, int stride = 2);

/// Same mapping over an unquantized depth image in millimeters (values <= 0
/// are skipped). Used with simulator ground truth.
PointCloud backproject_mm(std::span<const double> depth_mm, const CameraIntrinsics& intr,
                          int stride = 1);

/// Real-valued pixel coordinates of a camera-frame point. Throws
/// GeometryError when p.z <= 0.
std::pair<double, double> project(const Point3& p, const CameraIntrinsics& intr);

}  // namespace pcgrasp
