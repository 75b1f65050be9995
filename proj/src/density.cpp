#include "pcgrasp/density.hpp"

#include <algorithm>
#include <numeric>

#include "pcgrasp/error.hpp"
#include "pcgrasp/spatial_grid.hpp"

namespace pcgrasp {

void DensityParams::validate() const {
  if (!(epsilon > 0.0)) throw ConfigError("density.epsilon_mm must be > 0");
}

std::vector<std::uint32_t> neighborhood_density(const PointCloud& cloud, const DensityParams& params,
                                                Execution exec) {
  params.validate();
  if (cloud.empty()) throw ConfigError("neighborhood_density: empty cloud");
  const SpatialGrid grid(cloud.points, params.epsilon);
  return grid.count_within(params.epsilon, exec);
}

namespace {

template <class T>
std::vector<double> normalize(std::span<const T> rho) {
  std::vector<double> w(rho.size(), 1.0);
  if (rho.empty()) return w;
  const auto [lo_it, hi_it] = std::minmax_element(rho.begin(), rho.end());
  const double lo = static_cast<double>(*lo_it);
  const double hi = static_cast<double>(*hi_it);
  if (hi == lo) return w;
  const double span = hi - lo;
  for (std::size_t i = 0; i < rho.size(); ++i) w[i] = (static_cast<double>(rho[i]) - lo) / span;
  return w;
}

}  // namespace

std::vector<double> confidence_weights(std::span<const std::uint32_t> densities) {
  return normalize(densities);
}

std::vector<double> confidence_weights(std::span<const double> densities) {
  return normalize(densities);
}

OrderedCloud sort_by_confidence(PointCloud cloud, std::span<const double> weights) {
  if (weights.size() != cloud.size())
    throw ConfigError("sort_by_confidence: weight count differs from point count");
  OrderedCloud out;
  out.order.resize(cloud.size());
  std::iota(out.order.begin(), out.order.end(), std::size_t{0});
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](std::size_t a, std::size_t b) { return weights[a] > weights[b]; });
  cloud.confidences.emplace(weights.begin(), weights.end());
  out.cloud = std::move(cloud);
  return out;
}

OrderedCloud order_by_confidence(PointCloud cloud, const DensityParams& params, Execution exec) {
  auto rho = neighborhood_density(cloud, params, exec);
  auto w = confidence_weights(std::span<const std::uint32_t>(rho));
  if (exec == Execution::serial) {
    cloud.densities = std::move(rho);
    return sort_by_confidence(std::move(cloud), w);
  }

  // Weights rise strictly with density, so a stable counting sort on the
  // integer densities gives the same order as the comparison sort.
  const std::uint32_t hi = *std::max_element(rho.begin(), rho.end());
  std::vector<std::size_t> start(static_cast<std::size_t>(hi) + 2, 0);
  for (std::uint32_t r : rho) ++start[hi - r + 1];
  for (std::size_t b = 1; b < start.size(); ++b) start[b] += start[b - 1];
  OrderedCloud out;
  out.order.resize(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) out.order[start[hi - rho[i]]++] = i;
  cloud.densities = std::move(rho);
  cloud.confidences = std::move(w);
  out.cloud = std::move(cloud);
  return out;
}

PointCloud apply_order(const PointCloud& cloud, std::span<const std::size_t> order) {
  PointCloud out;
  out.points.reserve(order.size());
  for (std::size_t i : order) out.points.push_back(cloud.points.at(i));
  if (cloud.densities) {
    out.densities.emplace();
    for (std::size_t i : order) out.densities->push_back((*cloud.densities)[i]);
  }
  if (cloud.confidences) {
    out.confidences.emplace();
    for (std::size_t i : order) out.confidences->push_back((*cloud.confidences)[i]);
  }
  return out;
}

}  // namespace pcgrasp
