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

#include "didgeom/synth_oracle.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "didgeom/error.hpp"
#include "didgeom/geometry.hpp"
#include "didgeom/random.hpp"

namespace didgeom {

CameraCalib default_synth_calib() {
  return CameraCalib(Matrix34{{{721.5377, 0.0, 609.5593, 44.85728},
                               {0.0, 721.5377, 172.854, 0.2163791},
                               {0.0, 0.0, 1.0, 0.0}}});
}

void SceneConfig::validate() const {
  for (const auto* r : {&depth, &ground_y, &height, &width, &length, &yaw}) {
    if (r->empty()) throw Error(ErrorCode::InvalidValue, fmt::format("empty range [{}, {}]", r->lo, r->hi));
  }
  if (!(depth.lo > 0.0)) throw Error(ErrorCode::InvalidValue, "depth range must be positive");
  if (!(height.lo > 0.0) || !(width.lo > 0.0) || !(length.lo > 0.0)) {
    throw Error(ErrorCode::InvalidValue, "dimension ranges must be positive");
  }
  if (!(point_density > 0.0)) throw Error(ErrorCode::InvalidValue, "point density must be positive");
  if (num_objects < 0 || image_width <= 0 || image_height <= 0 || max_attempts <= 0) {
    throw Error(ErrorCode::InvalidValue, "object count, image size and attempts must be positive");
  }
  if (noise_vis < 0.0 || noise_att < 0.0) throw Error(ErrorCode::InvalidValue, "noise scales must be >= 0");
}

namespace synth {
namespace {

// Face corner cycles (KITTI corner numbering) with their local normals.
struct Face {
  std::array<int, 4> corners;
  double nx;
  double ny;
  double nz;
};

constexpr std::array<Face, 6> kFaces{{
    {{0, 1, 5, 4}, 1.0, 0.0, 0.0},
    {{3, 2, 6, 7}, -1.0, 0.0, 0.0},
    {{0, 3, 7, 4}, 0.0, 0.0, 1.0},
    {{1, 2, 6, 5}, 0.0, 0.0, -1.0},
    {{0, 1, 2, 3}, 0.0, 1.0, 0.0},
    {{4, 5, 6, 7}, 0.0, -1.0, 0.0},
}};

constexpr double kFacingEpsilon = 1e-9;

Point3D sub(const Point3D& a, const Point3D& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
double norm(const Point3D& a) { return std::sqrt(a.x * a.x + a.y * a.y + a.z * a.z); }

void sample_faces(const ObjectLabel& label, std::size_t owner, double density, Rng& rng, Scene& scene) {
  const ObjectBox3D box = box_from_label(label);
  const auto corners = geom::corners_3d(box);
  const double c = std::cos(box.ry);
  const double s = std::sin(box.ry);
  for (const auto& face : kFaces) {
    // local -> camera rotation about y
    const double nz = -s * face.nx + c * face.nz;
    if (!(nz < -kFacingEpsilon)) continue;
    const Point3D& a = corners[face.corners[0]];
    const Point3D e1 = sub(corners[face.corners[1]], a);
    const Point3D e2 = sub(corners[face.corners[3]], a);
    const double area = norm(e1) * norm(e2);
    const auto count = static_cast<std::size_t>(std::llround(density * area));
    for (std::size_t i = 0; i < count; ++i) {
      const double p = rng.uniform();
      const double q = rng.uniform();
      scene.cloud.points.push_back(
          {a.x + p * e1.x + q * e2.x, a.y + p * e1.y + q * e2.y, a.z + p * e1.z + q * e2.z, rng.uniform()});
      scene.point_owner.push_back(owner);
    }
  }
}

// Fraction of each object's in-image points hidden behind another object.
void assign_occlusion(Scene& scene) {
  std::unordered_map<std::int64_t, std::pair<double, std::size_t>> zbuf;
  std::vector<std::int64_t> pixel_of(scene.cloud.points.size(), -1);
  for (std::size_t i = 0; i < scene.cloud.points.size(); ++i) {
    const auto& p = scene.cloud.points[i];
    if (!(p.z > 0.0)) continue;
    const auto proj = geom::project_point(scene.calib, {p.x, p.y, p.z});
    if (!(proj.u >= 0.0 && proj.u < scene.width && proj.v >= 0.0 && proj.v < scene.height)) continue;
    const std::int64_t key = std::int64_t(std::floor(proj.v)) * scene.width + std::int64_t(std::floor(proj.u));
    pixel_of[i] = key;
    auto [it, inserted] = zbuf.emplace(key, std::make_pair(p.z, scene.point_owner[i]));
    if (!inserted && p.z < it->second.first) it->second = {p.z, scene.point_owner[i]};
  }
  std::vector<std::size_t> total(scene.objects.size(), 0);
  std::vector<std::size_t> hidden(scene.objects.size(), 0);
  for (std::size_t i = 0; i < pixel_of.size(); ++i) {
    if (pixel_of[i] < 0) continue;
    const std::size_t owner = scene.point_owner[i];
    ++total[owner];
    if (zbuf.at(pixel_of[i]).second != owner) ++hidden[owner];
  }
  for (std::size_t k = 0; k < scene.objects.size(); ++k) {
    const double frac = total[k] ? double(hidden[k]) / double(total[k]) : 0.0;
    scene.objects[k].occlusion = frac < 0.1 ? 0 : (frac < 0.4 ? 1 : 2);
  }
}

}  // namespace

Pixel center_projection(const CameraCalib& calib, const ObjectLabel& label) {
  const auto p = geom::project_point(calib, box_from_label(label).center());
  return {p.u, p.v};
}

Scene generate_scene(const SceneConfig& cfg) {
  cfg.validate();
  Scene scene;
  scene.calib = cfg.calib;
  scene.width = cfg.image_width;
  scene.height = cfg.image_height;
  Rng rng(mix_seed(cfg.seed));

  for (int k = 0; k < cfg.num_objects; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < cfg.max_attempts && !placed; ++attempt) {
      ObjectLabel label;
      label.category = cfg.category;
      label.dims = {rng.uniform(cfg.height.lo, cfg.height.hi), rng.uniform(cfg.width.lo, cfg.width.hi),
                    rng.uniform(cfg.length.lo, cfg.length.hi)};
      label.ry = geom::wrap_angle(rng.uniform(cfg.yaw.lo, cfg.yaw.hi));
      const double z = rng.uniform(cfg.depth.lo, cfg.depth.hi);
      const double u = rng.uniform(0.0, double(cfg.image_width));
      const double y_bottom = rng.uniform(cfg.ground_y.lo, cfg.ground_y.hi);
      const double y_center = y_bottom - label.dims.h / 2.0;
      const Point3D center = geom::backproject(cfg.calib, u, cfg.calib.cv(), z);
      label.location = {center.x, y_bottom, z};

      const auto proj = geom::project_point(cfg.calib, {center.x, y_center, z});
      if (!(proj.u >= 0.0 && proj.u < cfg.image_width && proj.v >= 0.0 && proj.v < cfg.image_height)) continue;

      const ObjectBox3D box = box_from_label(label);
      const auto corners = geom::corners_3d(box);
      if (std::any_of(corners.begin(), corners.end(), [](const Point3D& p) { return p.z < 0.5; })) continue;
      bool overlaps = false;
      for (const auto& other : scene.objects) {
        if (geom::iou_bev(box, box_from_label(other)) > 0.0) {
          overlaps = true;
          break;
        }
      }
      if (overlaps) continue;

      const Box2D full = geom::project_box(cfg.calib, box);
      const Box2D clipped{std::max(full.u_min, 0.0), std::max(full.v_min, 0.0),
                          std::min(full.u_max, double(cfg.image_width)),
                          std::min(full.v_max, double(cfg.image_height))};
      if (!(clipped.u_max > clipped.u_min) || !(clipped.v_max > clipped.v_min)) continue;
      label.box = clipped;
      label.truncation = std::clamp(1.0 - clipped.area() / full.area(), 0.0, 1.0);
      label.alpha = geom::alpha_from_ry(label.ry, label.location.x, label.location.z);
      scene.objects.push_back(label);
      placed = true;
    }
    if (!placed) {
      throw Error(ErrorCode::PlacementFailure,
                  fmt::format("object {} not placed after {} attempts", k, cfg.max_attempts));
    }
  }

  for (std::size_t k = 0; k < scene.objects.size(); ++k) {
    sample_faces(scene.objects[k], k, cfg.point_density, rng, scene);
  }
  assign_occlusion(scene);
  return scene;
}

std::vector<ObjectLabel> perfect_detections(const Scene& scene) {
  std::vector<ObjectLabel> out = scene.objects;
  for (auto& o : out) o.score = 1.0;
  return out;
}

labels::FrameLabels scene_labels(const Scene& scene, const labels::LabelOptions& options) {
  return labels::generate_frame_labels(scene.cloud, scene.calib, scene.width, scene.height, scene.objects, options);
}

std::vector<InstancePatch> noisy_patches(std::span<const DepthGrid> grids, NoiseScales noise, std::uint64_t seed) {
  if (noise.vis < 0.0 || noise.att < 0.0) throw Error(ErrorCode::InvalidValue, "noise scales must be >= 0");
  Rng rng(mix_seed(seed));
  const double u_vis = std::max(noise.vis, kMinUncertainty);
  const double u_att = std::max(noise.att, kMinUncertainty);
  std::vector<InstancePatch> out;
  out.reserve(grids.size());
  for (const auto& g : grids) {
    std::vector<DepthBelief> vis;
    std::vector<DepthBelief> att;
    vis.reserve(g.size());
    att.reserve(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double nv = rng.laplace(noise.vis);
      const double na = rng.laplace(noise.att);
      vis.emplace_back(g.visual[i] + nv, u_vis);
      att.emplace_back(g.attribute[i] + na, u_att);
    }
    out.emplace_back(g.m, g.n, std::move(vis), std::move(att), g.valid);
  }
  return out;
}

std::vector<InstancePatch> noisy_patches(const Scene& scene, NoiseScales noise, std::uint64_t seed,
                                         const labels::LabelOptions& options) {
  const auto frame = scene_labels(scene, options);
  return noisy_patches(frame.grids, noise, seed);
}

Scene rescale_camera(const Scene& scene, double s) {
  if (!(s > 0.0)) throw Error(ErrorCode::BadRange, fmt::format("scale {} must be positive", s));
  Scene out = scene;
  out.calib = scene.calib.scaled(s);
  out.width = static_cast<int>(std::ceil(scene.width * s));
  out.height = static_cast<int>(std::ceil(scene.height * s));
  for (auto& o : out.objects) {
    o.box = {o.box.u_min * s, o.box.v_min * s, o.box.u_max * s, o.box.v_max * s};
  }
  return out;
}

}  // namespace synth
}  // namespace didgeom
