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

// Annotation-level affine augmentation. Visual depth follows the image
// y-scale (d = f * h3d / h2d); attribute depth, dimensions and the
// observation angle are left untouched.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "didgeom/depth_labels.hpp"
#include "didgeom/kitti_io.hpp"
#include "didgeom/types.hpp"

namespace didgeom {

// Pixel map [u'; v'] = A [u; v; 1] with A a 2x3 matrix.
class AffineTransform2D {
 public:
  using Matrix = std::array<std::array<double, 3>, 2>;

  AffineTransform2D() : AffineTransform2D(identity_matrix()) {}
  // Throws InvalidTransform when either column of the linear part is null
  // or the linear part is singular.
  explicit AffineTransform2D(const Matrix& a);

  static AffineTransform2D identity() { return {}; }
  static AffineTransform2D scale(double s_x, double s_y);
  static AffineTransform2D translation(double du, double dv);
  // u' = width - u
  static AffineTransform2D horizontal_flip(double width);

  const Matrix& matrix() const { return a_; }
  double s_x() const { return s_x_; }
  double s_y() const { return s_y_; }
  bool flips() const { return flip_; }
  bool is_uniform(double tol = 1e-12) const;

  Pixel apply(const Pixel& p) const;

  // (*this) after `first`.
  AffineTransform2D after(const AffineTransform2D& first) const;

  friend bool operator==(const AffineTransform2D& a, const AffineTransform2D& b) { return a.a_ == b.a_; }

 private:
  static Matrix identity_matrix() { return {{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}}}; }

  Matrix a_;
  double s_x_;
  double s_y_;
  bool flip_;
};

// One annotated object as seen by an augmentation step.
struct AnnotatedObject {
  std::size_t object_index = 0;
  ObjectLabel label;
  Pixel center_projection;  // projection of the volumetric centre
  DepthGrid grid;

  friend bool operator==(const AnnotatedObject&, const AnnotatedObject&) = default;
};

struct AnnotatedFrame {
  std::string frame_id;
  int width = 0;
  int height = 0;
  CameraCalib calib{Matrix34{{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}}}};
  AffineTransform2D transform;  // accumulated image transform
  std::vector<AnnotatedObject> objects;
  std::vector<std::string> warnings;

  friend bool operator==(const AnnotatedFrame&, const AnnotatedFrame&) = default;
};

namespace aug {

inline constexpr double kDefaultScaleLo = 0.6;
inline constexpr double kDefaultScaleHi = 1.4;
inline constexpr double kDefaultShift = 0.1;
inline constexpr double kDefaultMinVisible = 0.3;

// Uniform scale s in [lo, hi] about the image centre followed by a centre
// shift of up to +-shift_range of the image extent. Deterministic in `seed`.
// Throws BadRange.
AffineTransform2D make_crop_scale(std::uint64_t seed, int width, int height, double scale_lo, double scale_hi,
                                  double shift_range);

Pixel transform_point(const AffineTransform2D& t, double u, double v);

// d / s_y. Throws NonPositiveDepth.
double transform_visual_depth(double d_vis, const AffineTransform2D& t);

// Bounds of the four mapped corners.
Box2D transform_box(const AffineTransform2D& t, const Box2D& box);

// Fraction of `box` area inside [0, width) x [0, height).
double visible_fraction(const Box2D& box, int width, int height);

// Maps the 2D box and centre projection, divides valid visual cells by s_y
// and leaves everything else bit-identical. The box is not clipped so that
// transforms compose. Throws ObjectCulled below `min_visible` and
// InvalidTransform for mirroring transforms (use horizontal_flip).
AnnotatedObject transform_object(const AnnotatedObject& obj, const AffineTransform2D& t, int width, int height,
                                 double min_visible = kDefaultMinVisible);

// Applies `t` to every object, dropping culled ones (with a warning) and
// recording a warning for anisotropic transforms.
AnnotatedFrame transform_frame(const AnnotatedFrame& frame, const AffineTransform2D& t,
                               double min_visible = kDefaultMinVisible);

// Mirror about the vertical image axis: u' = W - u, ry' = wrap(pi - ry), the
// location is re-derived from the mirrored projection at unchanged depth and
// alpha recomputed from it. Grid columns are reversed; depths are unchanged.
AnnotatedFrame horizontal_flip(const AnnotatedFrame& frame);

}  // namespace aug
}  // namespace didgeom
