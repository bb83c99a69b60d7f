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

#include <array>

namespace didgeom {

// Camera frame: x right, y down, z forward (metres).
struct Point3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3D&, const Point3D&) = default;
};

// Axis-aligned image box in pixels.
struct Box2D {
  double u_min = 0.0;
  double v_min = 0.0;
  double u_max = 0.0;
  double v_max = 0.0;

  double width() const { return u_max - u_min; }
  double height() const { return v_max - v_min; }
  double area() const { return width() * height(); }

  friend bool operator==(const Box2D&, const Box2D&) = default;
};

// Object extent in metres, KITTI order (h, w, l).
struct Dimensions {
  double h = 0.0;
  double w = 0.0;
  double l = 0.0;

  friend bool operator==(const Dimensions&, const Dimensions&) = default;
};

struct Pixel {
  double u = 0.0;
  double v = 0.0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
};

using Matrix34 = std::array<std::array<double, 4>, 3>;
using Matrix33 = std::array<std::array<double, 3>, 3>;

}  // namespace didgeom
