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

#include "didgeom/augmentation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "didgeom/error.hpp"
#include "didgeom/geometry.hpp"
#include "didgeom/random.hpp"

namespace didgeom {

AffineTransform2D::AffineTransform2D(const Matrix& a) : a_(a) {
  s_x_ = std::hypot(a_[0][0], a_[1][0]);
  s_y_ = std::hypot(a_[0][1], a_[1][1]);
  const double det = a_[0][0] * a_[1][1] - a_[0][1] * a_[1][0];
  if (!(s_x_ > 0.0) || !(s_y_ > 0.0) || det == 0.0 || !std::isfinite(det)) {
    throw Error(ErrorCode::InvalidTransform, "affine transform must be invertible");
  }
  flip_ = det < 0.0;
}

AffineTransform2D AffineTransform2D::scale(double s_x, double s_y) {
  return AffineTransform2D(Matrix{{{s_x, 0.0, 0.0}, {0.0, s_y, 0.0}}});
}

AffineTransform2D AffineTransform2D::translation(double du, double dv) {
  return AffineTransform2D(Matrix{{{1.0, 0.0, du}, {0.0, 1.0, dv}}});
}

AffineTransform2D AffineTransform2D::horizontal_flip(double width) {
  return AffineTransform2D(Matrix{{{-1.0, 0.0, width}, {0.0, 1.0, 0.0}}});
}

bool AffineTransform2D::is_uniform(double tol) const {
  return std::abs(s_x_ - s_y_) <= tol * std::max(s_x_, s_y_);
}

Pixel AffineTransform2D::apply(const Pixel& p) const {
  return {a_[0][0] * p.u + a_[0][1] * p.v + a_[0][2], a_[1][0] * p.u + a_[1][1] * p.v + a_[1][2]};
}

AffineTransform2D AffineTransform2D::after(const AffineTransform2D& first) const {
  const Matrix& b = first.a_;
  Matrix out{};
  for (int r = 0; r < 2; ++r) {
    out[r][0] = a_[r][0] * b[0][0] + a_[r][1] * b[1][0];
    out[r][1] = a_[r][0] * b[0][1] + a_[r][1] * b[1][1];
    out[r][2] = a_[r][0] * b[0][2] + a_[r][1] * b[1][2] + a_[r][2];
  }
  return AffineTransform2D(out);
}

namespace aug {

AffineTransform2D make_crop_scale(std::uint64_t seed, int width, int height, double scale_lo, double scale_hi,
                                  double shift_range) {
  if (!(scale_lo > 0.0) || !(scale_lo <= scale_hi) || !(shift_range >= 0.0) || width <= 0 || height <= 0) {
    throw Error(ErrorCode::BadRange,
                fmt::format("need 0 < lo <= hi and shift >= 0 (lo={}, hi={}, shift={})", scale_lo, scale_hi,
                            shift_range));
  }
  Rng rng(seed);
  const double s = rng.uniform(scale_lo, scale_hi);
  const double dx = rng.uniform(-shift_range, shift_range) * width;
  const double dy = rng.uniform(-shift_range, shift_range) * height;
  // crop centre (W/2 + dx, H/2 + dy) lands on the target centre
  const double cx = width / 2.0 + dx;
  const double cy = height / 2.0 + dy;
  return AffineTransform2D(
      AffineTransform2D::Matrix{{{s, 0.0, width / 2.0 - s * cx}, {0.0, s, height / 2.0 - s * cy}}});
}

Pixel transform_point(const AffineTransform2D& t, double u, double v) { return t.apply({u, v}); }

double transform_visual_depth(double d_vis, const AffineTransform2D& t) {
  if (!(d_vis > 0.0)) throw Error(ErrorCode::NonPositiveDepth, fmt::format("visual depth {} must be positive", d_vis));
  return d_vis / t.s_y();
}

Box2D transform_box(const AffineTransform2D& t, const Box2D& box) {
  const std::array<Pixel, 4> corners{
      t.apply({box.u_min, box.v_min}), t.apply({box.u_max, box.v_min}), t.apply({box.u_max, box.v_max}),
      t.apply({box.u_min, box.v_max})};
  Box2D out{corners[0].u, corners[0].v, corners[0].u, corners[0].v};
  for (const auto& c : corners) {
    out.u_min = std::min(out.u_min, c.u);
    out.v_min = std::min(out.v_min, c.v);
    out.u_max = std::max(out.u_max, c.u);
    out.v_max = std::max(out.v_max, c.v);
  }
  return out;
}

double visible_fraction(const Box2D& box, int width, int height) {
  const double area = box.area();
  if (!(area > 0.0)) return 0.0;
  const double w = std::max(0.0, std::min(box.u_max, double(width)) - std::max(box.u_min, 0.0));
  const double h = std::max(0.0, std::min(box.v_max, double(height)) - std::max(box.v_min, 0.0));
  return w * h / area;
}

AnnotatedObject transform_object(const AnnotatedObject& obj, const AffineTransform2D& t, int width, int height,
                                 double min_visible) {
  if (t.flips()) throw Error(ErrorCode::InvalidTransform, "mirroring transforms go through horizontal_flip");
  const Box2D box = transform_box(t, obj.label.box);
  const double visible = visible_fraction(box, width, height);
  if (visible < min_visible) {
    throw Error(ErrorCode::ObjectCulled,
                fmt::format("object {} keeps {:.3f} of its box, below {}", obj.object_index, visible, min_visible));
  }
  AnnotatedObject out = obj;
  out.label.box = box;
  out.center_projection = t.apply(obj.center_projection);
  for (std::size_t i = 0; i < out.grid.size(); ++i) {
    if (out.grid.valid[i]) out.grid.visual[i] = transform_visual_depth(obj.grid.visual[i], t);
  }
  return out;
}

AnnotatedFrame transform_frame(const AnnotatedFrame& frame, const AffineTransform2D& t, double min_visible) {
  AnnotatedFrame out = frame;
  out.objects.clear();
  out.transform = t.after(frame.transform);
  if (!t.is_uniform()) {
    out.warnings.push_back(fmt::format("anisotropic transform (s_x={}, s_y={}): visual depth follows s_y", t.s_x(),
                                       t.s_y()));
  }
  for (const auto& obj : frame.objects) {
    try {
      out.objects.push_back(transform_object(obj, t, frame.width, frame.height, min_visible));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ObjectCulled) throw;
      out.warnings.push_back(e.what());
    }
  }
  return out;
}

namespace {

DepthGrid mirror_columns(const DepthGrid& g) {
  DepthGrid out = g;
  for (int r = 0; r < g.m; ++r) {
    for (int c = 0; c < g.n; ++c) {
      const auto src = g.index(r, c);
      const auto dst = g.index(r, g.n - 1 - c);
      out.visual[dst] = g.visual[src];
      out.attribute[dst] = g.attribute[src];
      out.valid[dst] = g.valid[src];
    }
  }
  return out;
}

}  // namespace

AnnotatedFrame horizontal_flip(const AnnotatedFrame& frame) {
  const double w = frame.width;
  const auto flip = AffineTransform2D::horizontal_flip(w);
  AnnotatedFrame out = frame;
  out.transform = flip.after(frame.transform);
  for (auto& obj : out.objects) {
    ObjectLabel& l = obj.label;
    l.box = {w - obj.label.box.u_max, l.box.v_min, w - obj.label.box.u_min, l.box.v_max};
    obj.center_projection.u = w - obj.center_projection.u;

    const Point3D center = box_from_label(l).center();
    const auto proj = geom::project_point(frame.calib, center);
    const Point3D mirrored = geom::backproject(frame.calib, w - proj.u, proj.v, center.z);
    l.location.x = mirrored.x;
    l.ry = geom::wrap_angle(geom::kPi - l.ry);
    l.alpha = geom::alpha_from_ry(l.ry, l.location.x, l.location.z);
    obj.grid = mirror_columns(obj.grid);
  }
  return out;
}

}  // namespace aug
}  // namespace didgeom
