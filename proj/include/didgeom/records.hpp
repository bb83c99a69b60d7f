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

// JSON records exchanged between pipeline stages. Field order is fixed so
// that identical inputs serialise to identical bytes.

#include <json.hpp>

#include <string>
#include <vector>

#include "didgeom/augmentation.hpp"
#include "didgeom/depth_fusion.hpp"
#include "didgeom/depth_labels.hpp"

namespace didgeom::records {

using Json = nlohmann::ordered_json;

// {frame_id, object_index, m, n, visual[], attribute[], valid[]}; invalid
// cells carry null in visual/attribute.
Json grid_record(const std::string& frame_id, std::size_t object_index, const DepthGrid& grid);
DepthGrid grid_from_record(const Json& j);

// Frame bundle: image size, P2, accumulated transform, annotated objects
// (grid record fields + KITTI label line + centre projection) and warnings.
Json frame_bundle(const AnnotatedFrame& frame);
AnnotatedFrame frame_from_bundle(const Json& j);

// {m, n, d_vis[], u_vis[], d_att[], u_att[], valid[]}
Json patch_record(const InstancePatch& patch);
InstancePatch patch_from_record(const Json& j);

struct FusedObject {
  std::string frame_id;
  std::size_t object_index = 0;
  double d_ins = 0.0;
  fusion::UncertaintySummary u_summary;
  double p_ins = 0.0;
  double score = 0.0;
};

Json fused_record(const FusedObject& f);

// Per-object uncertainty entry: u_vis / u_att given per cell or as a scalar.
struct ObjectUncertainty {
  std::size_t object_index = 0;
  std::vector<double> u_vis;  // size 1 means broadcast
  std::vector<double> u_att;
  double p_2d = 1.0;
};

struct UncertaintyFile {
  std::string frame_id;
  std::vector<ObjectUncertainty> objects;
};

Json uncertainty_record(const UncertaintyFile& u);
UncertaintyFile uncertainty_from_record(const Json& j);

// Pretty-printed with two-space indent and a trailing LF.
std::string dump(const Json& j);

// Throws InvalidValue with the parser message on malformed JSON.
Json parse(const std::string& text);

}  // namespace didgeom::records
