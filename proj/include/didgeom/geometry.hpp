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

// Projection, box geometry, orientation coding and rotated IoU.

#include <array>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "didgeom/kitti_io.hpp"
#include "didgeom/types.hpp"

namespace didgeom {

// 3D box with KITTI semantics: `location` is the bottom-face centre, yaw
// `ry` rotates about the camera y axis and ry = 0 puts the length axis along
// camera x.
struct ObjectBox3D {
  std::string category = "Car";
  Point3D location;
  Dimensions dims;
  double ry = 0.0;
  Box2D box;
  std::optional<double> score;

  // Volumetric centre: y shifted up by h/2.
  Point3D center() const { return {location.x, location.y - dims.h / 2.0, location.z}; }

  friend bool operator==(const ObjectBox3D&, const ObjectBox3D&) = default;
};

ObjectBox3D box_from_label(const ObjectLabel& label);

struct MultiBinAngle {
  int bin_index = 0;
  double residual = 0.0;
  int k = 12;
};

// Footprint on the ground plane, counter-clockwise in (x, z).
struct BevPoint {
  double x = 0.0;
  double z = 0.0;
};
using BevPolygon = std::array<BevPoint, 4>;

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

namespace geom {

inline constexpr double kPi = std::numbers::pi;
inline constexpr int kDefaultBins = 12;

// Wraps into [-pi, pi); +pi maps to -pi.
double wrap_angle(double theta);

// Throws BehindCamera for z <= 0.
Projection project_point(const CameraCalib& calib, const Point3D& p);

// Inverse of project_point at the given depth. Throws NonPositiveDepth.
Point3D backproject(const CameraCalib& calib, double u, double v, double depth);

// Bin centres at 2*pi*i/k; ties go to the lower bin index. Throws InvalidBinCount.
MultiBinAngle encode_orientation(double theta, int k = kDefaultBins);
double decode_orientation(const MultiBinAngle& m);

// Observation angle alpha = wrap(ry - atan2(x, z)). Throws NonPositiveDepth.
double alpha_from_ry(double ry, double x, double z);
double ry_from_alpha(double alpha, double x, double z);

// KITTI corner order: 0-3 bottom face, 4-7 top face. Throws DegenerateBox.
std::array<Point3D, 8> corners_3d(const ObjectBox3D& box);
BevPolygon bev_polygon(const ObjectBox3D& box);

// Image-space bounds of the projected corners (unclipped). Every corner must
// be in front of the camera.
Box2D project_box(const CameraCalib& calib, const ObjectBox3D& box);

// Signed area (positive for counter-clockwise).
double polygon_area(std::span<const BevPoint> poly);

// Sutherland-Hodgman clip of `subject` against a convex CCW `clip` polygon.
std::vector<BevPoint> clip_convex(std::span<const BevPoint> subject, std::span<const BevPoint> clip);

double iou_bev(const ObjectBox3D& a, const ObjectBox3D& b);
double iou_3d(const ObjectBox3D& a, const ObjectBox3D& b);

// Recovers a box from a 3D-centre projection, instance depth (volumetric
// centre z), dimensions and observation angle.
ObjectBox3D recover_box(const CameraCalib& calib, const Pixel& center_projection, double instance_depth,
                        const Dimensions& dims, double alpha);

}  // namespace geom
}  // namespace didgeom
