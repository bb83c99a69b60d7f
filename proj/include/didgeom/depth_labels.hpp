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

#pragma once

// Visual / attribute depth label grids from projected point clouds.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "didgeom/kitti_io.hpp"
#include "didgeom/types.hpp"

namespace didgeom {

// Projected LiDAR depths keyed by pixel index (v * width + u).
struct SparseDepthMap {
  int width = 0;
  int height = 0;
  std::map<std::int64_t, double> entries;

  std::optional<double> at(int u, int v) const;
};

struct DenseDepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> depth;
  std::vector<std::uint8_t> valid;

  DenseDepthMap() = default;
  DenseDepthMap(int w, int h) : width(w), height(h), depth(std::size_t(w) * h, 0.0), valid(std::size_t(w) * h, 0) {}

  std::size_t index(int u, int v) const { return std::size_t(v) * width + u; }
  bool is_valid(int u, int v) const { return valid[index(u, v)] != 0; }
  double at(int u, int v) const { return depth[index(u, v)]; }
};

// m rows (image v) by n columns (image u), row-major.
struct DepthGrid {
  int m = 7;
  int n = 7;
  std::vector<double> visual;
  std::vector<double> attribute;
  std::vector<std::uint8_t> valid;

  DepthGrid() = default;
  DepthGrid(int rows, int cols)
      : m(rows), n(cols), visual(std::size_t(rows) * cols, 0.0), attribute(std::size_t(rows) * cols, 0.0),
        valid(std::size_t(rows) * cols, 0) {}

  std::size_t size() const { return visual.size(); }
  std::size_t index(int row, int col) const { return std::size_t(row) * n + col; }

  friend bool operator==(const DepthGrid&, const DepthGrid&) = default;
};

namespace labels {

inline constexpr int kDefaultGrid = 7;
inline constexpr double kDefaultMaxRadius = 50.0;

// Points with z > 0 landing inside the image; the nearest depth wins a pixel.
SparseDepthMap build_sparse_depth(const PointCloud& camera_cloud, const CameraCalib& calib, int width, int height);

// Nearest-observation fill: each pixel takes the depth of the closest observed
// pixel (Euclidean, ties to the smaller depth). Pixels further than
// `max_radius` from every observation stay invalid.
DenseDepthMap complete_depth(const SparseDepthMap& sparse, double max_radius = kDefaultMaxRadius);

struct VisualGrid {
  std::vector<double> visual;
  std::vector<std::uint8_t> valid;
};

// Mean valid depth of the pixels whose centres fall in each of the m x n
// half-open cells of `box` (clipped to the image). Throws EmptyBox.
VisualGrid grid_visual_depth(const DenseDepthMap& dense, const Box2D& box, int m, int n);

// instance_depth - visual on valid cells, 0 elsewhere. Throws NonPositiveInstanceDepth.
std::vector<double> attribute_depth_labels(std::span<const double> visual, std::span<const std::uint8_t> valid,
                                           double instance_depth);

// Grid for one ground-truth object; instance depth is the volumetric centre z.
DepthGrid object_depth_grid(const DenseDepthMap& dense, const ObjectLabel& label, int m, int n);

// Velodyne clouds are moved into the rectified camera frame when the
// calibration carries extrinsics; otherwise the cloud is returned as-is.
PointCloud to_camera_frame(const PointCloud& cloud, const CameraCalib& calib);

struct FrameLabels {
  std::vector<std::size_t> object_indices;  // index into the label file
  std::vector<DepthGrid> grids;
  std::vector<std::string> skipped;  // one message per object without a grid
};

struct LabelOptions {
  int m = kDefaultGrid;
  int n = kDefaultGrid;
  double max_radius = kDefaultMaxRadius;
};

// Grids for every non-DontCare object. Objects whose box misses the image are
// reported in `skipped`.
FrameLabels generate_frame_labels(const PointCloud& camera_cloud, const CameraCalib& calib, int width, int height,
                                  std::span<const ObjectLabel> objects, const LabelOptions& options = {});

}  // namespace labels
}  // namespace didgeom
