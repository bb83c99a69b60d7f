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

#include "didgeom/geometry.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "didgeom/error.hpp"

namespace didgeom {

ObjectBox3D box_from_label(const ObjectLabel& label) {
  ObjectBox3D box;
  box.category = label.category;
  box.location = label.location;
  box.dims = label.dims;
  box.ry = label.ry;
  box.box = label.box;
  box.score = label.score;
  return box;
}

namespace geom {
namespace {

constexpr double kTwoPi = 2.0 * kPi;

// Points closer than this to a clip edge count as inside.
constexpr double kClipEpsilon = 1e-12;

void require_valid_dims(const Dimensions& d) {
  if (!(d.h > 0.0) || !(d.w > 0.0) || !(d.l > 0.0) || !std::isfinite(d.h) || !std::isfinite(d.w) ||
      !std::isfinite(d.l)) {
    throw Error(ErrorCode::DegenerateBox, fmt::format("dimensions ({}, {}, {}) must be positive", d.h, d.w, d.l));
  }
}

double cross(const BevPoint& o, const BevPoint& a, const BevPoint& b) {
  return (a.x - o.x) * (b.z - o.z) - (a.z - o.z) * (b.x - o.x);
}

// Signed distance of p from the directed line a->b; positive on the left.
double side(const BevPoint& a, const BevPoint& b, const BevPoint& p) {
  const double len = std::hypot(b.x - a.x, b.z - a.z);
  return cross(a, b, p) / len;
}

double footprint_overlap(const ObjectBox3D& a, const ObjectBox3D& b) {
  const BevPolygon pa = bev_polygon(a);
  const BevPolygon pb = bev_polygon(b);
  const double area_a = polygon_area(pa);
  const double area_b = polygon_area(pb);

  // bounding-circle reject keeps far-apart pairs at exactly zero
  const double ra = 0.5 * std::hypot(a.dims.l, a.dims.w);
  const double rb = 0.5 * std::hypot(b.dims.l, b.dims.w);
  if (std::hypot(a.location.x - b.location.x, a.location.z - b.location.z) > ra + rb) return 0.0;

  const auto inter = clip_convex(pa, pb);
  const double area = inter.size() < 3 ? 0.0 : std::abs(polygon_area(inter));
  return std::clamp(area, 0.0, std::min(area_a, area_b));
}

}  // namespace

double wrap_angle(double theta) {
  if (theta >= -kPi && theta < kPi) return theta;
  double r = std::fmod(theta + kPi, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  r -= kPi;
  if (r >= kPi) r -= kTwoPi;
  if (r < -kPi) r = -kPi;
  return r;
}

Projection project_point(const CameraCalib& calib, const Point3D& p) {
  if (!(p.z > 0.0)) {
    throw Error(ErrorCode::BehindCamera, fmt::format("point at z={} is not in front of the camera", p.z));
  }
  return {(calib.fu() * p.x + calib.cu() * p.z + calib.tx()) / p.z,
          (calib.fv() * p.y + calib.cv() * p.z + calib.ty()) / p.z, p.z};
}

Point3D backproject(const CameraCalib& calib, double u, double v, double depth) {
  if (!(depth > 0.0)) {
    throw Error(ErrorCode::NonPositiveDepth, fmt::format("depth {} must be positive", depth));
  }
  return {(u * depth - calib.cu() * depth - calib.tx()) / calib.fu(),
          (v * depth - calib.cv() * depth - calib.ty()) / calib.fv(), depth};
}

MultiBinAngle encode_orientation(double theta, int k) {
  if (k < 2) throw Error(ErrorCode::InvalidBinCount, fmt::format("bin count {} < 2", k));
  const double step = kTwoPi / k;
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  const double x = t / step;
  int bin = static_cast<int>(std::floor(x));
  const double frac = x - bin;
  if (frac > 0.5 || (frac == 0.5 && bin == k - 1)) ++bin;
  bin %= k;
  return {bin, wrap_angle(theta - bin * step), k};
}

double decode_orientation(const MultiBinAngle& m) {
  if (m.k < 2) throw Error(ErrorCode::InvalidBinCount, fmt::format("bin count {} < 2", m.k));
  return wrap_angle(m.bin_index * (kTwoPi / m.k) + m.residual);
}

double alpha_from_ry(double ry, double x, double z) {
  if (!(z > 0.0)) throw Error(ErrorCode::NonPositiveDepth, fmt::format("z={} must be positive", z));
  return wrap_angle(ry - std::atan2(x, z));
}

double ry_from_alpha(double alpha, double x, double z) {
  if (!(z > 0.0)) throw Error(ErrorCode::NonPositiveDepth, fmt::format("z={} must be positive", z));
  return wrap_angle(alpha + std::atan2(x, z));
}

std::array<Point3D, 8> corners_3d(const ObjectBox3D& box) {
  require_valid_dims(box.dims);
  const double l2 = box.dims.l / 2.0;
  const double w2 = box.dims.w / 2.0;
  const double h = box.dims.h;
  static constexpr std::array<double, 8> xs{1, 1, -1, -1, 1, 1, -1, -1};
  static constexpr std::array<double, 8> ys{0, 0, 0, 0, -1, -1, -1, -1};
  static constexpr std::array<double, 8> zs{1, -1, -1, 1, 1, -1, -1, 1};
  const double c = std::cos(box.ry);
  const double s = std::sin(box.ry);

  std::array<Point3D, 8> out{};
  for (std::size_t i = 0; i < 8; ++i) {
    const double lx = xs[i] * l2;
    const double lz = zs[i] * w2;
    out[i] = {box.location.x + c * lx + s * lz, box.location.y + ys[i] * h, box.location.z - s * lx + c * lz};
  }
  return out;
}

BevPolygon bev_polygon(const ObjectBox3D& box) {
  const auto c = corners_3d(box);
  BevPolygon poly{{{c[0].x, c[0].z}, {c[1].x, c[1].z}, {c[2].x, c[2].z}, {c[3].x, c[3].z}}};
  if (polygon_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
  return poly;
}

Box2D project_box(const CameraCalib& calib, const ObjectBox3D& box) {
  Box2D out{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& corner : corners_3d(box)) {
    const auto p = project_point(calib, corner);
    out.u_min = std::min(out.u_min, p.u);
    out.v_min = std::min(out.v_min, p.v);
    out.u_max = std::max(out.u_max, p.u);
    out.v_max = std::max(out.v_max, p.v);
  }
  return out;
}

double polygon_area(std::span<const BevPoint> poly) {
  double acc = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    acc += p.x * q.z - q.x * p.z;
  }
  return 0.5 * acc;
}

std::vector<BevPoint> clip_convex(std::span<const BevPoint> subject, std::span<const BevPoint> clip) {
  std::vector<BevPoint> output(subject.begin(), subject.end());
  for (std::size_t e = 0; e < clip.size() && !output.empty(); ++e) {
    const BevPoint a = clip[e];
    const BevPoint b = clip[(e + 1) % clip.size()];
    std::vector<BevPoint> input;
    input.swap(output);
    for (std::size_t i = 0; i < input.size(); ++i) {
      const BevPoint p = input[i];
      const BevPoint q = input[(i + 1) % input.size()];
      const double dp = side(a, b, p);
      const double dq = side(a, b, q);
      const bool p_in = dp >= -kClipEpsilon;
      const bool q_in = dq >= -kClipEpsilon;
      if (p_in) output.push_back(p);
      if (p_in != q_in) {
        const double t = dp / (dp - dq);
        output.push_back({p.x + t * (q.x - p.x), p.z + t * (q.z - p.z)});
      }
    }
  }
  return output;
}

double iou_bev(const ObjectBox3D& a, const ObjectBox3D& b) {
  require_valid_dims(a.dims);
  require_valid_dims(b.dims);
  const double inter = footprint_overlap(a, b);
  const double area_a = a.dims.l * a.dims.w;
  const double area_b = b.dims.l * b.dims.w;
  const double uni = area_a + area_b - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

double iou_3d(const ObjectBox3D& a, const ObjectBox3D& b) {
  require_valid_dims(a.dims);
  require_valid_dims(b.dims);
  const double a_top = a.location.y - a.dims.h;
  const double b_top = b.location.y - b.dims.h;
  const double overlap_h = std::max(0.0, std::min(a.location.y, b.location.y) - std::max(a_top, b_top));
  if (overlap_h <= 0.0) return 0.0;
  const double inter = footprint_overlap(a, b) * overlap_h;
  const double vol_a = a.dims.l * a.dims.w * a.dims.h;
  const double vol_b = b.dims.l * b.dims.w * b.dims.h;
  const double uni = vol_a + vol_b - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

ObjectBox3D recover_box(const CameraCalib& calib, const Pixel& center_projection, double instance_depth,
                        const Dimensions& dims, double alpha) {
  require_valid_dims(dims);
  const Point3D c = backproject(calib, center_projection.u, center_projection.v, instance_depth);
  ObjectBox3D box;
  box.dims = dims;
  box.location = {c.x, c.y + dims.h / 2.0, c.z};
  box.ry = ry_from_alpha(alpha, c.x, c.z);
  return box;
}

}  // namespace geom
}  // namespace didgeom
