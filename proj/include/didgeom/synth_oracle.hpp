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

// Deterministic synthetic scenes with exact ground truth, used to verify the
// label, fusion, augmentation and evaluation paths end to end.

#include <cstdint>
#include <string>
#include <vector>

#include "didgeom/depth_fusion.hpp"
#include "didgeom/depth_labels.hpp"
#include "didgeom/kitti_io.hpp"

namespace didgeom {

struct Range {
  double lo = 0.0;
  double hi = 0.0;

  bool empty() const { return !(lo <= hi); }
};

// KITTI-like left camera (no z translation).
CameraCalib default_synth_calib();

struct SceneConfig {
  std::uint64_t seed = 0;
  int num_objects = 5;
  Range depth{8.0, 45.0};      // volumetric-centre z, m
  Range ground_y{1.5, 1.8};    // bottom-face y, m
  std::string category = "Car";
  Range height{1.4, 1.7};
  Range width{1.5, 1.8};
  Range length{3.5, 4.5};
  Range yaw{-3.141592653589793, 3.141592653589793};
  int image_width = 1242;
  int image_height = 375;
  CameraCalib calib = default_synth_calib();
  double point_density = 400.0;  // points per m^2 of visible face
  double noise_vis = 0.1;        // Laplace scales for noisy_patches
  double noise_att = 0.1;
  int max_attempts = 2000;       // per object

  // Throws InvalidValue on empty ranges, non-positive density or sizes.
  void validate() const;
};

struct Scene {
  CameraCalib calib = default_synth_calib();
  int width = 0;
  int height = 0;
  std::vector<ObjectLabel> objects;
  PointCloud cloud;  // camera frame
  // Index of the object each cloud point was sampled from.
  std::vector<std::size_t> point_owner;
};

struct NoiseScales {
  double vis = 0.0;
  double att = 0.0;
};

namespace synth {

// Rejection-samples BEV-disjoint objects whose 3D-centre projection is in the
// image, then samples points on faces whose outward normal points towards
// the camera (negative z). Throws PlacementFailure.
Scene generate_scene(const SceneConfig& cfg);

// Ground truth copied with score 1.
std::vector<ObjectLabel> perfect_detections(const Scene& scene);

// Label grids for every object of the scene.
labels::FrameLabels scene_labels(const Scene& scene, const labels::LabelOptions& options = {});

// Per-cell visual/attribute depths perturbed by independent Laplace noise;
// uncertainties are set to the true scales (floored at kMinUncertainty).
std::vector<InstancePatch> noisy_patches(std::span<const DepthGrid> grids, NoiseScales noise, std::uint64_t seed);
std::vector<InstancePatch> noisy_patches(const Scene& scene, NoiseScales noise, std::uint64_t seed,
                                         const labels::LabelOptions& options = {});

// Same geometry seen by a camera whose image is rescaled by s about the pixel
// origin: P rows 0-1 times s, image size and 2D boxes times s.
Scene rescale_camera(const Scene& scene, double s);

// Projection of the volumetric centre.
Pixel center_projection(const CameraCalib& calib, const ObjectLabel& label);

}  // namespace synth
}  // namespace didgeom
