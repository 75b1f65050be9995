#include "pcgrasp/depth_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include <json.hpp>

#include "pcgrasp/error.hpp"

namespace pcgrasp {

namespace {

using nlohmann::json;

[[noreturn]] void fail_io(const std::filesystem::path& path, const std::string& reason) {
  throw IoError(path.string() + ": " + reason);
}

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_io(path, "unreadable file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Reads one whitespace-delimited ASCII integer of a PNM header, skipping
// '#' comments.
bool read_header_int(const std::vector<unsigned char>& bytes, std::size_t& pos, long& out) {
  for (;;) {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  if (pos >= bytes.size() || !std::isdigit(bytes[pos])) return false;
  long v = 0;
  while (pos < bytes.size() && std::isdigit(bytes[pos])) {
    v = v * 10 + (bytes[pos] - '0');
    if (v > 1'000'000'000) return false;
    ++pos;
  }
  out = v;
  return true;
}

DepthFrame load_pgm(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') fail_io(path, "malformed header");
  std::size_t pos = 2;
  long width = 0, height = 0, maxval = 0;
  if (!read_header_int(bytes, pos, width) || !read_header_int(bytes, pos, height) ||
      !read_header_int(bytes, pos, maxval))
    fail_io(path, "malformed header");
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535)
    fail_io(path, "malformed header");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) fail_io(path, "malformed header");
  ++pos;  // single whitespace before the raster

  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const std::size_t sample_bytes = maxval > 255 ? 2 : 1;
  if (bytes.size() - pos != count * sample_bytes)
    fail_io(path, "dimension mismatch: header declares " + std::to_string(width) + "x" +
                      std::to_string(height) + " but raster holds " +
                      std::to_string(bytes.size() - pos) + " bytes");

  DepthFrame frame;
  frame.width = static_cast<int>(width);
  frame.height = static_cast<int>(height);
  frame.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (sample_bytes == 2)
      frame.data[i] = static_cast<std::uint16_t>((bytes[pos + 2 * i] << 8) | bytes[pos + 2 * i + 1]);
    else
      frame.data[i] = bytes[pos + i];
  }
  return frame;
}

DepthFrame load_raw(const std::filesystem::path& path) {
  auto sidecar = path;
  sidecar += ".json";
  std::ifstream meta(sidecar);
  if (!meta) fail_io(path, "missing sidecar " + sidecar.filename().string());
  long width = 0, height = 0;
  try {
    const json j = json::parse(meta);
    width = j.at("width").get<long>();
    height = j.at("height").get<long>();
  } catch (const json::exception& e) {
    fail_io(sidecar, std::string("malformed header: ") + e.what());
  }
  if (width <= 0 || height <= 0) fail_io(sidecar, "malformed header: non-positive dimensions");

  const auto bytes = read_bytes(path);
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() != 2 * count)
    fail_io(path, "dimension mismatch: expected " + std::to_string(2 * count) + " bytes, got " +
                      std::to_string(bytes.size()));
  DepthFrame frame;
  frame.width = static_cast<int>(width);
  frame.height = static_cast<int>(height);
  frame.data.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    frame.data[i] = static_cast<std::uint16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8));
  return frame;
}

DepthFrame load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail_io(path, "unreadable file");
  DepthFrame frame;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ++row;
    std::stringstream ss(line);
    std::string cell;
    int cols = 0;
    while (std::getline(ss, cell, ',')) {
      const auto first = cell.find_first_not_of(" \t");
      const auto last = cell.find_last_not_of(" \t");
      if (first == std::string::npos) fail_io(path, "empty cell in row " + std::to_string(row));
      cell = cell.substr(first, last - first + 1);
      std::size_t used = 0;
      unsigned long v = 0;
      try {
        v = std::stoul(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cell.size() || v > 65535 || cell[0] == '-')
        fail_io(path, "invalid sample '" + cell + "' in row " + std::to_string(row));
      frame.data.push_back(static_cast<std::uint16_t>(v));
      ++cols;
    }
    if (row == 1) {
      frame.width = cols;
    } else if (cols != frame.width) {
      fail_io(path, "dimension mismatch: row " + std::to_string(row) + " has " +
                        std::to_string(cols) + " columns, expected " +
                        std::to_string(frame.width));
    }
  }
  if (row == 0) fail_io(path, "malformed header: empty file");
  frame.height = row;
  return frame;
}

}  // namespace

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw ConfigError("intrinsics: fx and fy must be positive");
  if (width <= 0 || height <= 0) throw ConfigError("intrinsics: width and height must be positive");
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
    throw ConfigError("intrinsics: principal point must lie inside the image");
  if (!(depth_scale > 0.0)) throw ConfigError("intrinsics: depth_scale must be positive");
}

void PointCloud::validate() const {
  if (densities && densities->size() != points.size())
    throw ConfigError("point cloud: density list length differs from point count");
  if (confidences) {
    if (confidences->size() != points.size())
      throw ConfigError("point cloud: confidence list length differs from point count");
    for (double w : *confidences)
      if (!(w >= 0.0 && w <= 1.0)) throw ConfigError("point cloud: confidence outside [0, 1]");
  }
}

DepthFormat parse_depth_format(std::string_view name) {
  if (name == "pgm16" || name == "pgm") return DepthFormat::pgm16;
  if (name == "raw16le" || name == "raw") return DepthFormat::raw16le;
  if (name == "csv") return DepthFormat::csv;
  throw ConfigError("unknown depth format '" + std::string(name) + "'");
}

std::optional<DepthFormat> depth_format_from_extension(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".pgm") return DepthFormat::pgm16;
  if (ext == ".raw") return DepthFormat::raw16le;
  if (ext == ".csv") return DepthFormat::csv;
  return std::nullopt;
}

DepthFrame load_depth_frame(const std::filesystem::path& path, DepthFormat format,
                            std::uint64_t timestamp) {
  DepthFrame frame;
  switch (format) {
    case DepthFormat::pgm16: frame = load_pgm(path); break;
    case DepthFormat::raw16le: frame = load_raw(path); break;
    case DepthFormat::csv: frame = load_csv(path); break;
  }
  frame.timestamp = timestamp;
  return frame;
}

void save_pgm16(const std::filesystem::path& path, const DepthFrame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail_io(path, "cannot open for writing");
  out << "P5\n" << frame.width << ' ' << frame.height << "\n65535\n";
  std::vector<char> raster(frame.data.size() * 2);
  for (std::size_t i = 0; i < frame.data.size(); ++i) {
    raster[2 * i] = static_cast<char>(frame.data[i] >> 8);
    raster[2 * i + 1] = static_cast<char>(frame.data[i] & 0xFF);
  }
  out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
  if (!out) fail_io(path, "write failed");
}

void save_pgm8(const std::filesystem::path& path, int width, int height,
               std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail_io(path, "cannot open for writing");
  out << "P5\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) fail_io(path, "write failed");
}

void save_raw16le(const std::filesystem::path& path, const DepthFrame& frame) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail_io(path, "cannot open for writing");
    for (std::uint16_t s : frame.data) {
      const char b[2] = {static_cast<char>(s & 0xFF), static_cast<char>(s >> 8)};
      out.write(b, 2);
    }
  }
  auto sidecar = path;
  sidecar += ".json";
  std::ofstream meta(sidecar);
  meta << json{{"width", frame.width}, {"height", frame.height}}.dump() << '\n';
}

CameraIntrinsics load_intrinsics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail_io(path, "unreadable file");
  CameraIntrinsics intr;
  try {
    const json j = json::parse(in);
    intr.fx = j.at("fx").get<double>();
    intr.fy = j.at("fy").get<double>();
    intr.cx = j.at("cx").get<double>();
    intr.cy = j.at("cy").get<double>();
    intr.width = j.at("width").get<int>();
    intr.height = j.at("height").get<int>();
    intr.depth_scale = j.value("depth_scale", 1.0);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  intr.validate();
  return intr;
}

void save_intrinsics(const std::filesystem::path& path, const CameraIntrinsics& intr) {
  std::ofstream out(path);
  if (!out) fail_io(path, "cannot open for writing");
  const json j{{"fx", intr.fx},       {"fy", intr.fy},         {"cx", intr.cx},
               {"cy", intr.cy},       {"width", intr.width},   {"height", intr.height},
               {"depth_scale", intr.depth_scale}};
  out << j.dump(2) << '\n';
}

PointCloud backproject(const DepthFrame& frame, const CameraIntrinsics& intr, int stride) {
  if (frame.width != intr.width || frame.height != intr.height)
    throw IoError("backproject: dimension mismatch (frame " + std::to_string(frame.width) + "x" +
                  std::to_string(frame.height) + ", intrinsics " + std::to_string(intr.width) +
                  "x" + std::to_string(intr.height) + ")");
  if (stride < 1) throw ConfigError("backproject: stride must be >= 1");
  PointCloud cloud;
  const std::size_t cols = (frame.width + stride - 1) / stride;
  const std::size_t rows = (frame.height + stride - 1) / stride;
  cloud.points.reserve(cols * rows);
  for (int v = 0; v < frame.height; v += stride) {
    const std::uint16_t* row = frame.data.data() + static_cast<std::size_t>(v) * frame.width;
    for (int u = 0; u < frame.width; u += stride) {
      const std::uint16_t raw = row[u];
      if (raw == 0) continue;
      const double z = raw * intr.depth_scale;
      cloud.points.push_back({(u - intr.cx) * z / intr.fx, (v - intr.cy) * z / intr.fy, z});
    }
  }
  return cloud;
}

PointCloud backproject_mm(std::span<const double> depth_mm, const CameraIntrinsics& intr,
                          int stride) {
  if (depth_mm.size() != static_cast<std::size_t>(intr.width) * intr.height)
    throw IoError("backproject: dimension mismatch");
  if (stride < 1) throw ConfigError("backproject: stride must be >= 1");
  PointCloud cloud;
  for (int v = 0; v < intr.height; v += stride) {
    for (int u = 0; u < intr.width; u += stride) {
      const double z = depth_mm[static_cast<std::size_t>(v) * intr.width + u];
      if (!(z > 0.0)) continue;
      cloud.points.push_back({(u - intr.cx) * z / intr.fx, (v - intr.cy) * z / intr.fy, z});
    }
  }
  return cloud;
}

std::pair<double, double> project(const Point3& p, const CameraIntrinsics& intr) {
  if (!(p.z > 0.0)) throw GeometryError("project: point is not in front of the camera");
  return {p.x * intr.fx / p.z + intr.cx, p.y * intr.fy / p.z + intr.cy};
}

}  // namespace pcgrasp
