#include "pcgrasp/export.hpp"

#include <array>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "pcgrasp/error.hpp"

namespace pcgrasp {

namespace {

constexpr std::array<std::array<int, 3>, 8> kPalette{{{230, 25, 75},
                                                      {60, 180, 75},
                                                      {0, 130, 200},
                                                      {245, 130, 48},
                                                      {145, 30, 180},
                                                      {70, 240, 240},
                                                      {240, 50, 230},
                                                      {210, 245, 60}}};

}  // namespace

void write_ply(std::ostream& out, const PointCloud& cloud, std::span<const int> labels) {
  if (!labels.empty() && labels.size() != cloud.size())
    throw ConfigError("write_ply: label count differs from point count");
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
      << "\nproperty float x\nproperty float y\nproperty float z\n"
         "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  if (!labels.empty()) out << "property int label\n";
  out << "end_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3& p = cloud.points[i];
    std::array<int, 3> rgb{255, 255, 255};
    if (!labels.empty())
      rgb = labels[i] < 0 ? std::array<int, 3>{128, 128, 128} : kPalette[labels[i] % kPalette.size()];
    out << p.x << ' ' << p.y << ' ' << p.z << ' ' << rgb[0] << ' ' << rgb[1] << ' ' << rgb[2];
    if (!labels.empty()) out << ' ' << labels[i];
    out << '\n';
  }
}

void write_ply(const std::filesystem::path& path, const PointCloud& cloud, std::span<const int> labels) {
  std::ofstream out(path);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  write_ply(out, cloud, labels);
}

void write_scene_graph(std::ostream& out, const SceneGraph& graph) {
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const ObjectNode& n = graph.nodes[i];
    nlohmann::json j{{"label", n.label},
                     {"centroid", {n.centroid.x, n.centroid.y, n.centroid.z}},
                     {"extents", n.extents},
                     {"point_count", n.point_count},
                     {"target", graph.target_index == i}};
    out << j.dump() << '\n';
  }
}

}  // namespace pcgrasp
