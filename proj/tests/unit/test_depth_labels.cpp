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
#include <limits>

#include "didgeom/depth_labels.hpp"
#include "didgeom/error.hpp"
#include "didgeom/geometry.hpp"
#include "didgeom/random.hpp"
#include "didgeom/synth_oracle.hpp"

using namespace didgeom;

namespace {

CameraCalib simple_calib() { return CameraCalib(Matrix34{{{1000, 0, 500, 0}, {0, 1000, 200, 0}, {0, 0, 1, 0}}}); }

DenseDepthMap filled(int w, int h, auto&& depth_at) {
  DenseDepthMap d(w, h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      d.depth[d.index(u, v)] = depth_at(u, v);
      d.valid[d.index(u, v)] = 1;
    }
  }
  return d;
}

// Reference fill: scan every observation for every pixel.
DenseDepthMap brute_force_completion(const SparseDepthMap& s, double r_max) {
  DenseDepthMap d(s.width, s.height);
  for (int v = 0; v < s.height; ++v) {
    for (int u = 0; u < s.width; ++u) {
      double best = std::numeric_limits<double>::infinity(), best_depth = 0;
      for (const auto& [key, depth] : s.entries) {
        const double du = double(key % s.width) - u, dv = double(key / s.width) - v;
        const double dist = std::sqrt(du * du + dv * dv);
        if (dist < best || (dist == best && depth < best_depth)) {
          best = dist;
          best_depth = depth;
        }
      }
      if (best <= r_max) {
        d.depth[d.index(u, v)] = best_depth;
        d.valid[d.index(u, v)] = 1;
      }
    }
  }
  return d;
}

// Reference cell averaging: find each pixel's cell by scanning the cell edges.
labels::VisualGrid enumerate_cells(const DenseDepthMap& d, const Box2D& b, int m, int n) {
  std::vector<double> sum(std::size_t(m) * n, 0.0);
  std::vector<int> count(sum.size(), 0);
  const double cw = b.width() / n, ch = b.height() / m;
  for (int v = 0; v < d.height; ++v) {
    for (int u = 0; u < d.width; ++u) {
      const double cu = u + 0.5, cv = v + 0.5;
      if (!d.is_valid(u, v)) continue;
      for (int r = 0; r < m; ++r) {
        for (int c = 0; c < n; ++c) {
          if (cu >= b.u_min + c * cw && cu < b.u_min + (c + 1) * cw && cv >= b.v_min + r * ch &&
              cv < b.v_min + (r + 1) * ch) {
            sum[std::size_t(r) * n + c] += d.at(u, v);
            ++count[std::size_t(r) * n + c];
          }
        }
      }
    }
  }
  labels::VisualGrid out{std::vector<double>(sum.size(), 0.0), std::vector<std::uint8_t>(sum.size(), 0)};
  for (std::size_t i = 0; i < sum.size(); ++i) {
    if (count[i]) {
      out.visual[i] = sum[i] / count[i];
      out.valid[i] = 1;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("build_sparse_depth projection and collisions") {
  const auto c = simple_calib();
  PointCloud one{{{0, 0, 10, 0}}};
  const auto s = labels::build_sparse_depth(one, c, 1000, 400);
  REQUIRE(s.entries.size() == 1);
  CHECK(s.at(500, 200) == 10.0);

  PointCloud two{{{0, 0, 10, 0}, {0, 0, 8, 0}}};
  CHECK(labels::build_sparse_depth(two, c, 1000, 400).at(500, 200) == 8.0);
  PointCloud two_rev{{{0, 0, 8, 0}, {0, 0, 10, 0}}};
  CHECK(labels::build_sparse_depth(two_rev, c, 1000, 400).at(500, 200) == 8.0);

  PointCloud behind{{{0, 0, -1, 0}, {0, 0, 0, 0}}};
  CHECK(labels::build_sparse_depth(behind, c, 1000, 400).entries.empty());
  PointCloud outside{{{100, 0, 10, 0}}};
  CHECK(labels::build_sparse_depth(outside, c, 1000, 400).entries.empty());
}

TEST_CASE("complete_depth fixed point, single source and ties") {
  SparseDepthMap dense_input{6, 4, {}};
  for (int v = 0; v < 4; ++v)
    for (int u = 0; u < 6; ++u) dense_input.entries[v * 6 + u] = 1.0 + u + 10 * v;
  const auto d = labels::complete_depth(dense_input, 50);
  for (int v = 0; v < 4; ++v) {
    for (int u = 0; u < 6; ++u) {
      CHECK(d.is_valid(u, v));
      CHECK(d.at(u, v) == 1.0 + u + 10 * v);
    }
  }

  SparseDepthMap single{200, 120, {{60 * 200 + 100, 12.5}}};
  const auto f = labels::complete_depth(single, 50);
  for (int v = 0; v < 120; ++v) {
    for (int u = 0; u < 200; ++u) {
      const double r = std::hypot(u - 100.0, v - 60.0);
      CHECK(f.is_valid(u, v) == (r <= 50.0));
      if (r <= 50.0) CHECK(f.at(u, v) == 12.5);
    }
  }

  SparseDepthMap tie{11, 1, {{0, 9.0}, {10, 4.0}}};
  CHECK(labels::complete_depth(tie, 50).at(5, 0) == 4.0);
  SparseDepthMap tie2{11, 1, {{0, 4.0}, {10, 9.0}}};
  CHECK(labels::complete_depth(tie2, 50).at(5, 0) == 4.0);

  CHECK(labels::complete_depth(SparseDepthMap{10, 10, {}}).valid == std::vector<std::uint8_t>(100, 0));
}

TEST_CASE("complete_depth matches exhaustive nearest search") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    SparseDepthMap s{int(40 + rng.next() % 60), int(20 + rng.next() % 40), {}};
    const int count = int(1 + rng.next() % 25);
    for (int i = 0; i < count; ++i) {
      const auto u = std::int64_t(rng.next() % s.width), v = std::int64_t(rng.next() % s.height);
      // coarse depths make equal-distance ties with distinct values likely
      s.entries[v * s.width + u] = double(1 + rng.next() % 5);
    }
    const double r = rng.uniform(3, 30);
    const auto got = labels::complete_depth(s, r);
    const auto want = brute_force_completion(s, r);
    CHECK(got.valid == want.valid);
    CHECK(got.depth == want.depth);
  }
}

TEST_CASE("grid_visual_depth constant field and empty cells") {
  const auto d = filled(100, 80, [](int, int) { return 15.0; });
  const auto g = labels::grid_visual_depth(d, {10, 10, 80, 66}, 7, 7);
  REQUIRE(g.visual.size() == 49);
  for (std::size_t i = 0; i < 49; ++i) {
    CHECK(g.valid[i] == 1);
    CHECK(g.visual[i] == 15.0);
  }

  auto holes = d;
  for (int v = 0; v < 80; ++v)
    for (int u = 0; u < 20; ++u) holes.valid[holes.index(u, v)] = 0;
  const auto h = labels::grid_visual_depth(holes, {10, 10, 80, 66}, 7, 7);
  for (int r = 0; r < 7; ++r) {
    CHECK(h.valid[std::size_t(r) * 7] == 0);  // column 0 spans u in [10, 20)
    CHECK(h.valid[std::size_t(r) * 7 + 1] == 1);
  }

  CHECK_THROWS_AS(labels::grid_visual_depth(d, {200, 10, 300, 20}, 7, 7), Error);
  CHECK_THROWS_AS(labels::grid_visual_depth(d, {10, 10, 20, 20}, 0, 7), Error);
}

TEST_CASE("grid_visual_depth on a depth ramp equals enumerated cell means") {
  const auto d = filled(160, 120, [](int, int v) { return double(v); });
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const double u0 = rng.uniform(0, 60), v0 = rng.uniform(5, 50);
    const Box2D box{u0, v0, u0 + rng.uniform(10, 90), v0 + rng.uniform(10, 60)};
    const int m = int(1 + rng.next() % 9), n = int(1 + rng.next() % 9);
    const auto got = labels::grid_visual_depth(d, box, m, n);
    const auto want = enumerate_cells(d, box, m, n);
    REQUIRE(got.valid == want.valid);
    for (std::size_t i = 0; i < got.visual.size(); ++i) {
      CHECK(std::abs(got.visual[i] - want.visual[i]) <= 1e-12 * std::max(1.0, want.visual[i]));
    }
  }
}

TEST_CASE("attribute depth labels") {
  const std::vector<double> vis{18.0, 20.0, 0.0};
  const std::vector<std::uint8_t> valid{1, 1, 0};
  const auto att = labels::attribute_depth_labels(vis, valid, 20.0);
  CHECK(att[0] == 2.0);
  CHECK(att[1] == 0.0);
  CHECK(att[2] == 0.0);
  try {
    labels::attribute_depth_labels(vis, valid, 0.0);
    FAIL("expected NonPositiveInstanceDepth");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveInstanceDepth);
  }
}

TEST_CASE("frame labels reconstruct the instance depth and skip DontCare") {
  SceneConfig cfg;
  cfg.seed = 12;
  cfg.num_objects = 4;
  auto scene = synth::generate_scene(cfg);
  ObjectLabel dc = kitti::parse_label_line("DontCare -1 -1 -10 10 10 50 50 -1 -1 -1 -1000 -1000 -1000 -10");
  scene.objects.push_back(dc);
  const auto fl = labels::generate_frame_labels(scene.cloud, scene.calib, scene.width, scene.height, scene.objects);
  CHECK(fl.grids.size() == 4);
  for (std::size_t k = 0; k < fl.grids.size(); ++k) {
    const auto& g = fl.grids[k];
    const double z = box_from_label(scene.objects[fl.object_indices[k]]).center().z;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!g.valid[i]) continue;
      CHECK(g.visual[i] > 0.0);
      CHECK(std::abs(g.visual[i] + g.attribute[i] - z) <= 1e-12 * z);
    }
  }
}

TEST_CASE("grids do not depend on point order") {
  SceneConfig cfg;
  cfg.seed = 5;
  cfg.num_objects = 3;
  const auto scene = synth::generate_scene(cfg);
  auto shuffled = scene.cloud;
  std::reverse(shuffled.points.begin(), shuffled.points.end());
  Rng rng(2);
  for (std::size_t i = shuffled.points.size(); i > 1; --i) std::swap(shuffled.points[i - 1], shuffled.points[rng.next() % i]);
  const auto a = labels::generate_frame_labels(scene.cloud, scene.calib, scene.width, scene.height, scene.objects);
  const auto b = labels::generate_frame_labels(shuffled, scene.calib, scene.width, scene.height, scene.objects);
  CHECK(a.grids == b.grids);
}

TEST_CASE("tail-on car: attribute depth is half the length") {
  SceneConfig cfg;
  cfg.seed = 3;
  cfg.num_objects = 1;
  cfg.depth = {12.0, 20.0};
  cfg.yaw = {-geom::kPi / 2, -geom::kPi / 2};  // length axis along the optical axis
  const auto scene = synth::generate_scene(cfg);
  const auto fl = labels::generate_frame_labels(scene.cloud, scene.calib, scene.width, scene.height, scene.objects);
  REQUIRE(fl.grids.size() == 1);
  const auto& label = scene.objects[0];
  const auto& g = fl.grids[0];

  // cells whose extent lies within the projected near face
  const auto box = box_from_label(label);
  const double z_face = box.center().z - label.dims.l / 2;
  const auto tl = geom::project_point(scene.calib, {box.location.x - label.dims.w / 2, box.location.y - label.dims.h, z_face});
  const auto br = geom::project_point(scene.calib, {box.location.x + label.dims.w / 2, box.location.y, z_face});
  const double cw = label.box.width() / g.n, ch = label.box.height() / g.m;
  double sum = 0.0;
  int count = 0;
  for (int r = 0; r < g.m; ++r) {
    for (int c = 0; c < g.n; ++c) {
      const double u0 = label.box.u_min + c * cw, v0 = label.box.v_min + r * ch;
      if (u0 < tl.u || u0 + cw > br.u || v0 < tl.v || v0 + ch > br.v) continue;
      if (!g.valid[g.index(r, c)]) continue;
      sum += g.attribute[g.index(r, c)];
      ++count;
    }
  }
  REQUIRE(count > 0);
  CHECK(std::abs(sum / count - label.dims.l / 2) < 1e-3);
}
