#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>

#include "pcgrasp/depth_io.hpp"
#include "pcgrasp/scene_graph.hpp"

namespace pcgrasp {

/// ASCII PLY with per-vertex color. With labels, each cluster gets a fixed
/// palette color and noise (-1) is gray; without, every vertex is white.
void write_ply(std::ostream& out, const PointCloud& cloud, std::span<const int> labels = {});
void write_ply(const std::filesystem::path& path, const PointCloud& cloud,
               std::span<const int> labels = {});

/// One JSON object per node: label, centroid, extents, point_count, target.
void write_scene_graph(std::ostream& out, const SceneGraph& graph);

}  // namespace pcgrasp
