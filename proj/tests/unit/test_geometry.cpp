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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "didgeom/error.hpp"
#include "didgeom/geometry.hpp"
#include "didgeom/random.hpp"
#include "oracles.hpp"

using namespace didgeom;
using geom::kPi;

namespace {

CameraCalib simple_calib() { return CameraCalib(Matrix34{{{1000, 0, 500, 0}, {0, 1000, 200, 0}, {0, 0, 1, 0}}}); }

ObjectBox3D make_box(double x, double y, double z, double h, double w, double l, double ry) {
  ObjectBox3D b;
  b.location = {x, y, z};
  b.dims = {h, w, l};
  b.ry = ry;
  return b;
}

std::set<std::pair<double, double>> vertex_set(const BevPolygon& p) {
  std::set<std::pair<double, double>> out;
  for (const auto& v : p) out.insert({std::round(v.x * 1e9) / 1e9, std::round(v.z * 1e9) / 1e9});
  return out;
}

}  // namespace

TEST_CASE("project_point") {
  const auto c = simple_calib();
  const auto p = geom::project_point(c, {0, 0, 10});
  CHECK(p.u == 500.0);
  CHECK(p.v == 200.0);
  CHECK(p.depth == 10.0);
  CHECK(geom::project_point(c, {1, 0, 10}).u == 600.0);
  CHECK_THROWS_AS(geom::project_point(c, {0, 0, -1}), Error);
  CHECK_THROWS_AS(geom::project_point(c, {0, 0, 0}), Error);
}

TEST_CASE("backproject inverts project_point") {
  const auto c = simple_calib();
  const auto q = geom::backproject(c, 500, 200, 7);
  CHECK(q == Point3D{0, 0, 7});
  try {
    geom::backproject(c, 1, 1, 0);
    FAIL("expected NonPositiveDepth");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveDepth);
  }

  const CameraCalib kitti(Matrix34{{{721.5377, 0, 609.5593, 44.85728}, {0, 721.5377, 172.854, 0.2163791}, {0, 0, 1, 0}}});
  Rng rng(11);
  for (int i = 0; i < 10000; ++i) {
    const Point3D p{rng.uniform(-30, 30), rng.uniform(-3, 3), rng.uniform(0.5, 90)};
    const auto pr = geom::project_point(kitti, p);
    const auto back = geom::backproject(kitti, pr.u, pr.v, pr.depth);
    const double scale = std::max({std::abs(p.x), std::abs(p.y), std::abs(p.z)});
    CHECK(std::abs(back.x - p.x) <= 1e-9 * scale);
    CHECK(std::abs(back.y - p.y) <= 1e-9 * scale);
    CHECK(back.z == p.z);
  }
}

TEST_CASE("wrap_angle range") {
  CHECK(geom::wrap_angle(kPi) == -kPi);
  CHECK(geom::wrap_angle(-kPi) == -kPi);
  CHECK(geom::wrap_angle(0.0) == 0.0);
  CHECK(std::abs(geom::wrap_angle(3 * kPi / 2) + kPi / 2) < 1e-12);
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    const double w = geom::wrap_angle(rng.uniform(-50, 50));
    CHECK(w >= -kPi);
    CHECK(w < kPi);
  }
}

TEST_CASE("multi-bin orientation codec") {
  const auto zero = geom::encode_orientation(0.0, 12);
  CHECK(zero.bin_index == 0);
  CHECK(zero.residual == 0.0);
  CHECK(geom::decode_orientation(zero) == 0.0);

  CHECK_THROWS_AS(geom::encode_orientation(0.3, 1), Error);
  CHECK_THROWS_AS(geom::decode_orientation({0, 0.0, 1}), Error);

  for (int k = 2; k <= 24; ++k) {
    const double step = 2 * kPi / k;
    // exactly between bins 0 and 1: lower index wins
    CHECK(geom::encode_orientation(step / 2, k).bin_index == 0);
    Rng rng(100 + k);
    double worst_roundtrip = 0.0, worst_residual = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const double theta = rng.uniform(-kPi, kPi);
      const auto m = geom::encode_orientation(theta, k);
      REQUIRE(m.bin_index >= 0);
      REQUIRE(m.bin_index < k);
      worst_residual = std::max(worst_residual, std::abs(m.residual) - kPi / k);
      double diff = std::abs(geom::decode_orientation(m) - geom::wrap_angle(theta));
      diff = std::min(diff, 2 * kPi - diff);
      worst_roundtrip = std::max(worst_roundtrip, diff);
    }
    CHECK(worst_roundtrip <= 1e-12);
    CHECK(worst_residual <= 1e-12);
  }
}

TEST_CASE("alpha / ry conversion") {
  CHECK(geom::alpha_from_ry(0.7, 0.0, 12.0) == 0.7);
  CHECK(std::abs(geom::alpha_from_ry(0.0, 5.0, 5.0) + kPi / 4) < 1e-15);
  CHECK_THROWS_AS(geom::alpha_from_ry(0.0, 1.0, 0.0), Error);
  Rng rng(9);
  for (int i = 0; i < 10000; ++i) {
    const double ry = rng.uniform(-kPi, kPi), x = rng.uniform(-20, 20), z = rng.uniform(1, 60);
    double diff = std::abs(geom::ry_from_alpha(geom::alpha_from_ry(ry, x, z), x, z) - ry);
    diff = std::min(diff, 2 * kPi - diff);
    CHECK(diff <= 1e-12);
  }
}

TEST_CASE("box corners and BEV footprint") {
  const auto b = make_box(0, 1, 10, 2, 2, 4, 0.0);
  const auto bev = geom::bev_polygon(b);
  CHECK(vertex_set(bev) == std::set<std::pair<double, double>>{{-2, 9}, {-2, 11}, {2, 9}, {2, 11}});
  CHECK(geom::polygon_area(bev) > 0.0);

  const auto corners = geom::corners_3d(b);
  double y_min = 1e9, y_max = -1e9;
  for (const auto& c : corners) {
    y_min = std::min(y_min, c.y);
    y_max = std::max(y_max, c.y);
  }
  CHECK(y_min == -1.0);
  CHECK(y_max == 1.0);

  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    auto r = make_box(rng.uniform(-10, 10), 1.5, rng.uniform(5, 40), 1.5, rng.uniform(1, 2), rng.uniform(3, 5),
                      rng.uniform(-kPi, kPi));
    auto flipped = r;
    flipped.ry = r.ry + kPi;
    CHECK(vertex_set(geom::bev_polygon(r)) == vertex_set(geom::bev_polygon(flipped)));
  }
  auto square = make_box(3, 1, 20, 1.5, 2, 2, 0.0);
  auto turned = square;
  turned.ry = kPi / 2;
  CHECK(vertex_set(geom::bev_polygon(square)) == vertex_set(geom::bev_polygon(turned)));

  CHECK_THROWS_AS(geom::corners_3d(make_box(0, 1, 10, 0, 1, 1, 0)), Error);
}

TEST_CASE("IoU analytic cases") {
  const auto a = make_box(0, 1, 10, 1.5, 1.6, 3.9, 0.3);
  CHECK(std::abs(geom::iou_bev(a, a) - 1.0) < 1e-12);
  CHECK(std::abs(geom::iou_3d(a, a) - 1.0) < 1e-12);

  auto far = a;
  far.location.x += 100;
  CHECK(geom::iou_bev(a, far) == 0.0);
  CHECK(geom::iou_3d(a, far) == 0.0);

  const auto u = make_box(0, 1, 10, 1, 1, 1, 0.0);
  const auto v = make_box(0.5, 1, 10, 1, 1, 1, 0.0);
  CHECK(std::abs(geom::iou_bev(u, v) - 1.0 / 3.0) < 1e-12);
  CHECK(std::abs(geom::iou_3d(u, v) - 1.0 / 3.0) < 1e-12);

  // same footprint, half the height overlapping: 0.5 / 1.5
  auto lifted = u;
  lifted.location.y -= 0.5;
  CHECK(std::abs(geom::iou_3d(u, lifted) - 1.0 / 3.0) < 1e-12);
  CHECK(std::abs(geom::iou_bev(u, lifted) - 1.0) < 1e-12);
}

TEST_CASE("IoU properties on random pairs") {
  Rng rng(21);
  for (int i = 0; i < 2000; ++i) {
    const auto a = make_box(rng.uniform(-2, 2), 1.6, rng.uniform(18, 22), 1.5, rng.uniform(1, 2), rng.uniform(2, 5),
                            rng.uniform(-kPi, kPi));
    const auto b = make_box(rng.uniform(-2, 2), 1.6, rng.uniform(18, 22), 1.5, rng.uniform(1, 2), rng.uniform(2, 5),
                            rng.uniform(-kPi, kPi));
    const double ab = geom::iou_bev(a, b), ba = geom::iou_bev(b, a);
    CHECK(std::abs(ab - ba) < 1e-12);
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
    // equal vertical extents: 3D IoU reduces to BEV IoU
    CHECK(std::abs(geom::iou_3d(a, b) - ab) < 1e-12);

    const auto pa = geom::bev_polygon(a), pb = geom::bev_polygon(b);
    const auto clipped = geom::clip_convex(pa, pb);
    const double inter = clipped.size() >= 3 ? std::abs(geom::polygon_area(clipped)) : 0.0;
    CHECK(inter <= std::min(geom::polygon_area(pa), geom::polygon_area(pb)) + 1e-12);
  }
}

TEST_CASE("BEV IoU agrees with Monte-Carlo area estimate") {
  Rng rng(77);
  for (int i = 0; i < 10; ++i) {
    const auto a = make_box(rng.uniform(-1, 1), 1.6, rng.uniform(19, 21), 1.5, rng.uniform(1, 2),
                            rng.uniform(2, 5), rng.uniform(-kPi, kPi));
    const auto b = make_box(rng.uniform(-1, 1), 1.6, rng.uniform(19, 21), 1.5, rng.uniform(1, 2),
                            rng.uniform(2, 5), rng.uniform(-kPi, kPi));
    const oracle::Footprint fa{a.location.x, a.location.z, a.dims.l, a.dims.w, a.ry};
    const oracle::Footprint fb{b.location.x, b.location.z, b.dims.l, b.dims.w, b.ry};
    CHECK(std::abs(geom::iou_bev(a, b) - oracle::monte_carlo_iou(fa, fb, 200000, 1000 + i)) < 1e-2);
  }
}

TEST_CASE("recover_box inverts centre projection") {
  const CameraCalib c(Matrix34{{{721.5377, 0, 609.5593, 44.85728}, {0, 721.5377, 172.854, 0.2163791}, {0, 0, 1, 0}}});
  auto truth = make_box(-4.2, 1.7, 23.0, 1.5, 1.7, 4.1, 0.6);
  const auto centre = truth.center();
  const auto p = geom::project_point(c, centre);
  const double alpha = geom::alpha_from_ry(truth.ry, centre.x, centre.z);
  const auto r = geom::recover_box(c, {p.u, p.v}, p.depth, truth.dims, alpha);
  CHECK(std::abs(r.location.x - truth.location.x) < 1e-9);
  CHECK(std::abs(r.location.y - truth.location.y) < 1e-9);
  CHECK(r.location.z == truth.location.z);
  CHECK(std::abs(r.ry - truth.ry) < 1e-12);
}

TEST_CASE("project_box encloses the projected corners") {
  const auto c = simple_calib();
  const auto b = make_box(0, 1, 10, 2, 2, 4, 0.0);
  const auto box = geom::project_box(c, b);
  // nearest face at z = 9 spans x in [-2, 2], y in [-1, 1]
  CHECK(std::abs(box.u_min - (500 - 2000.0 / 9)) < 1e-9);
  CHECK(std::abs(box.u_max - (500 + 2000.0 / 9)) < 1e-9);
  CHECK(std::abs(box.v_min - (200 - 1000.0 / 9)) < 1e-9);
  CHECK(std::abs(box.v_max - (200 + 1000.0 / 9)) < 1e-9);
}
