// Copyright 2026 The didgeom Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "didgeom/depth_labels.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "didgeom/error.hpp"
#include "didgeom/geometry.hpp"

namespace didgeom {

std::optional<double> SparseDepthMap::at(int u, int v) const {
  const auto it = entries.find(std::int64_t(v) * width + u);
  if (it == entries.end()) return std::nullopt;
  return it->second;
}

namespace labels {

SparseDepthMap build_sparse_depth(const PointCloud& camera_cloud, const CameraCalib& calib, int width, int height) {
  SparseDepthMap map;
  map.width = width;
  map.height = height;
  for (const auto& pt : camera_cloud.points) {
    if (!(pt.z > 0.0)) continue;
    const auto proj = geom::project_point(calib, {pt.x, pt.y, pt.z});
    if (!(proj.u >= 0.0 && proj.u < width && proj.v >= 0.0 && proj.v < height)) continue;
    const auto u = static_cast<std::int64_t>(std::floor(proj.u));
    const auto v = static_cast<std::int64_t>(std::floor(proj.v));
    const std::int64_t key = v * width + u;
    auto [it, inserted] = map.entries.emplace(key, proj.depth);
    if (!inserted && proj.depth < it->second) it->second = proj.depth;
  }
  return map;
}

namespace {

constexpr int kBucket = 8;

struct Observation {
  int u;
  int v;
  double depth;
};

}  // namespace

DenseDepthMap complete_depth(const SparseDepthMap& sparse, double max_radius) {
  DenseDepthMap dense(sparse.width, sparse.height);
  if (sparse.entries.empty() || sparse.width <= 0 || sparse.height <= 0) return dense;

  const int bw = (sparse.width + kBucket - 1) / kBucket;
  const int bh = (sparse.height + kBucket - 1) / kBucket;
  std::vector<std::vector<Observation>> buckets(std::size_t(bw) * bh);
  for (const auto& [key, depth] : sparse.entries) {
    const int u = static_cast<int>(key % sparse.width);
    const int v = static_cast<int>(key / sparse.width);
    buckets[std::size_t(v / kBucket) * bw + u / kBucket].push_back({u, v, depth});
  }

  // buckets that can see an observation within max_radius
  const double r_max2 = max_radius * max_radius;
  const int reach = static_cast<int>(std::ceil(max_radius / kBucket)) + 1;
  std::vector<std::uint8_t> reachable(buckets.size(), 0);
  for (int by = 0; by < bh; ++by) {
    for (int bx = 0; bx < bw; ++bx) {
      if (buckets[std::size_t(by) * bw + bx].empty()) continue;
      for (int y = std::max(0, by - reach); y <= std::min(bh - 1, by + reach); ++y) {
        for (int x = std::max(0, bx - reach); x <= std::min(bw - 1, bx + reach); ++x) {
          reachable[std::size_t(y) * bw + x] = 1;
        }
      }
    }
  }

  for (int v = 0; v < sparse.height; ++v) {
    const int by = v / kBucket;
    for (int u = 0; u < sparse.width; ++u) {
      const int bx = u / kBucket;
      if (!reachable[std::size_t(by) * bw + bx]) continue;

      std::int64_t best_d2 = std::numeric_limits<std::int64_t>::max();
      double best_depth = 0.0;
      for (int ring = 0;; ++ring) {
        if (ring > 0) {
          // every pixel of a bucket `ring` steps away is at least this far
          const double lower = double(ring - 1) * kBucket + 1.0;
          if (lower > max_radius) break;
          if (best_d2 != std::numeric_limits<std::int64_t>::max() && lower * lower > double(best_d2)) break;
        }
        if (by - ring < 0 && by + ring >= bh && bx - ring < 0 && bx + ring >= bw) break;
        for (int y = by - ring; y <= by + ring; ++y) {
          if (y < 0 || y >= bh) continue;
          const bool edge_row = (y == by - ring || y == by + ring);
          for (int x = bx - ring; x <= bx + ring; x += (edge_row || ring == 0) ? 1 : 2 * ring) {
            if (x < 0 || x >= bw) continue;
            for (const auto& obs : buckets[std::size_t(y) * bw + x]) {
              const std::int64_t du = obs.u - u;
              const std::int64_t dv = obs.v - v;
              const std::int64_t d2 = du * du + dv * dv;
              if (d2 < best_d2 || (d2 == best_d2 && obs.depth < best_depth)) {
                best_d2 = d2;
                best_depth = obs.depth;
              }
            }
          }
        }
      }
      if (best_d2 != std::numeric_limits<std::int64_t>::max() && double(best_d2) <= r_max2) {
        const auto idx = dense.index(u, v);
        dense.depth[idx] = best_depth;
        dense.valid[idx] = 1;
      }
    }
  }
  return dense;
}

VisualGrid grid_visual_depth(const DenseDepthMap& dense, const Box2D& box, int m, int n) {
  if (m < 1 || n < 1) throw Error(ErrorCode::InvalidValue, fmt::format("grid {}x{} must be at least 1x1", m, n));
  const double u0 = std::max(box.u_min, 0.0);
  const double v0 = std::max(box.v_min, 0.0);
  const double u1 = std::min(box.u_max, double(dense.width));
  const double v1 = std::min(box.v_max, double(dense.height));
  if (!(u1 > u0) || !(v1 > v0)) {
    throw Error(ErrorCode::EmptyBox, fmt::format("box [{}, {}, {}, {}] has no area inside the image", box.u_min,
                                                 box.v_min, box.u_max, box.v_max));
  }
  const double cell_w = (u1 - u0) / n;
  const double cell_h = (v1 - v0) / m;

  std::vector<double> sum(std::size_t(m) * n, 0.0);
  std::vector<int> count(std::size_t(m) * n, 0);
  const int px_begin = std::max(0, static_cast<int>(std::ceil(u0 - 0.5)));
  const int py_begin = std::max(0, static_cast<int>(std::ceil(v0 - 0.5)));
  for (int py = py_begin; py < dense.height && py + 0.5 < v1; ++py) {
    const int row = std::clamp(static_cast<int>(std::floor((py + 0.5 - v0) / cell_h)), 0, m - 1);
    for (int px = px_begin; px < dense.width && px + 0.5 < u1; ++px) {
      if (!dense.is_valid(px, py)) continue;
      const int col = std::clamp(static_cast<int>(std::floor((px + 0.5 - u0) / cell_w)), 0, n - 1);
      const auto c = std::size_t(row) * n + col;
      sum[c] += dense.at(px, py);
      ++count[c];
    }
  }

  VisualGrid out{std::vector<double>(sum.size(), 0.0), std::vector<std::uint8_t>(sum.size(), 0)};
  for (std::size_t c = 0; c < sum.size(); ++c) {
    if (count[c] > 0) {
      out.visual[c] = sum[c] / count[c];
      out.valid[c] = 1;
    }
  }
  return out;
}

std::vector<double> attribute_depth_labels(std::span<const double> visual, std::span<const std::uint8_t> valid,
                                           double instance_depth) {
  if (!(instance_depth > 0.0)) {
    throw Error(ErrorCode::NonPositiveInstanceDepth, fmt::format("instance depth {} must be positive", instance_depth));
  }
  if (visual.size() != valid.size()) throw Error(ErrorCode::InvalidValue, "visual/valid size mismatch");
  std::vector<double> attribute(visual.size(), 0.0);
  for (std::size_t i = 0; i < visual.size(); ++i) {
    if (valid[i]) attribute[i] = instance_depth - visual[i];
  }
  return attribute;
}

DepthGrid object_depth_grid(const DenseDepthMap& dense, const ObjectLabel& label, int m, int n) {
  auto vis = grid_visual_depth(dense, label.box, m, n);
  DepthGrid grid(m, n);
  const double instance_depth = box_from_label(label).center().z;
  grid.attribute = attribute_depth_labels(vis.visual, vis.valid, instance_depth);
  grid.visual = std::move(vis.visual);
  grid.valid = std::move(vis.valid);
  return grid;
}

PointCloud to_camera_frame(const PointCloud& cloud, const CameraCalib& calib) {
  if (!calib.has_extrinsics()) return cloud;
  PointCloud out;
  out.points.reserve(cloud.points.size());
  for (const auto& p : cloud.points) {
    const auto c = calib.velodyne_to_camera({p.x, p.y, p.z});
    out.points.push_back({c.x, c.y, c.z, p.reflectance});
  }
  return out;
}

FrameLabels generate_frame_labels(const PointCloud& camera_cloud, const CameraCalib& calib, int width, int height,
                                  std::span<const ObjectLabel> objects, const LabelOptions& options) {
  const auto sparse = build_sparse_depth(camera_cloud, calib, width, height);
  const auto dense = complete_depth(sparse, options.max_radius);
  FrameLabels out;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (objects[i].is_dont_care()) continue;
    try {
      out.grids.push_back(object_depth_grid(dense, objects[i], options.m, options.n));
      out.object_indices.push_back(i);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyBox && e.code() != ErrorCode::NonPositiveInstanceDepth) throw;
      out.skipped.push_back(fmt::format("object {}: {}", i, e.what()));
    }
  }
  return out;
}

}  // namespace labels
}  // namespace didgeom
