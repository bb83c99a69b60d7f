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

#include "didgeom/records.hpp"

#include <fmt/format.h>

#include "didgeom/error.hpp"
#include "didgeom/kitti_io.hpp"

namespace didgeom::records {
namespace {

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::MissingKey, fmt::format("record lacks '{}'", key));
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidValue, fmt::format("field '{}': {}", key, e.what()));
  }
}

std::vector<double> nullable_array(const Json& j, const char* key, std::size_t expected) {
  if (!j.contains(key) || !j.at(key).is_array() || j.at(key).size() != expected) {
    throw Error(ErrorCode::WrongArity, fmt::format("'{}' must be an array of {} values", key, expected));
  }
  std::vector<double> out;
  out.reserve(expected);
  for (const auto& v : j.at(key)) out.push_back(v.is_null() ? 0.0 : v.get<double>());
  return out;
}

std::vector<std::uint8_t> flag_array(const Json& j, const char* key, std::size_t expected) {
  if (!j.contains(key) || !j.at(key).is_array() || j.at(key).size() != expected) {
    throw Error(ErrorCode::WrongArity, fmt::format("'{}' must be an array of {} flags", key, expected));
  }
  std::vector<std::uint8_t> out;
  out.reserve(expected);
  for (const auto& v : j.at(key)) out.push_back(v.is_boolean() ? v.get<bool>() : v.get<int>() != 0);
  return out;
}

std::vector<double> scalar_or_array(const Json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::MissingKey, fmt::format("record lacks '{}'", key));
  const auto& v = j.at(key);
  if (v.is_number()) return {v.get<double>()};
  return v.get<std::vector<double>>();
}

Json masked(const std::vector<double>& values, const std::vector<std::uint8_t>& valid) {
  Json arr = Json::array();
  for (std::size_t i = 0; i < values.size(); ++i) {
    arr.push_back(valid[i] ? Json(values[i]) : Json(nullptr));
  }
  return arr;
}

Json flags(const std::vector<std::uint8_t>& valid) {
  Json arr = Json::array();
  for (auto v : valid) arr.push_back(v != 0);
  return arr;
}

}  // namespace

Json grid_record(const std::string& frame_id, std::size_t object_index, const DepthGrid& grid) {
  Json j;
  j["frame_id"] = frame_id;
  j["object_index"] = object_index;
  j["m"] = grid.m;
  j["n"] = grid.n;
  j["visual"] = masked(grid.visual, grid.valid);
  j["attribute"] = masked(grid.attribute, grid.valid);
  j["valid"] = flags(grid.valid);
  return j;
}

DepthGrid grid_from_record(const Json& j) {
  const int m = field<int>(j, "m");
  const int n = field<int>(j, "n");
  if (m < 1 || n < 1) throw Error(ErrorCode::InvalidValue, fmt::format("grid {}x{} is empty", m, n));
  DepthGrid g(m, n);
  g.visual = nullable_array(j, "visual", g.size());
  g.attribute = nullable_array(j, "attribute", g.size());
  g.valid = flag_array(j, "valid", g.size());
  return g;
}

Json frame_bundle(const AnnotatedFrame& frame) {
  Json j;
  j["frame_id"] = frame.frame_id;
  j["image"] = {{"width", frame.width}, {"height", frame.height}};
  Json p2 = Json::array();
  for (const auto& row : frame.calib.projection()) {
    for (double v : row) p2.push_back(v);
  }
  j["calib"] = {{"P2", p2}};
  const auto& a = frame.transform.matrix();
  j["transform"] = {{"matrix", {a[0][0], a[0][1], a[0][2], a[1][0], a[1][1], a[1][2]}},
                    {"s_x", frame.transform.s_x()},
                    {"s_y", frame.transform.s_y()},
                    {"flip", frame.transform.flips()}};
  Json objects = Json::array();
  for (const auto& o : frame.objects) {
    Json rec = grid_record(frame.frame_id, o.object_index, o.grid);
    rec["label"] = kitti::serialize_label(o.label, kitti::Precision::Exact);
    rec["center_projection"] = {o.center_projection.u, o.center_projection.v};
    objects.push_back(std::move(rec));
  }
  j["objects"] = std::move(objects);
  j["warnings"] = frame.warnings;
  return j;
}

AnnotatedFrame frame_from_bundle(const Json& j) {
  AnnotatedFrame frame;
  frame.frame_id = field<std::string>(j, "frame_id");
  if (!j.contains("image")) throw Error(ErrorCode::MissingKey, "bundle lacks 'image'");
  frame.width = field<int>(j.at("image"), "width");
  frame.height = field<int>(j.at("image"), "height");

  if (!j.contains("calib")) throw Error(ErrorCode::MissingKey, "bundle lacks 'calib'");
  const auto p2 = field<std::vector<double>>(j.at("calib"), "P2");
  if (p2.size() != 12) throw Error(ErrorCode::WrongArity, "calib.P2 needs 12 values");
  Matrix34 p{};
  for (int i = 0; i < 12; ++i) p[i / 4][i % 4] = p2[i];
  frame.calib = CameraCalib(p);

  if (j.contains("transform")) {
    const auto m = field<std::vector<double>>(j.at("transform"), "matrix");
    if (m.size() != 6) throw Error(ErrorCode::WrongArity, "transform.matrix needs 6 values");
    frame.transform = AffineTransform2D(AffineTransform2D::Matrix{{{m[0], m[1], m[2]}, {m[3], m[4], m[5]}}});
  }
  if (j.contains("objects")) {
    for (const auto& rec : j.at("objects")) {
      AnnotatedObject o;
      o.object_index = field<std::size_t>(rec, "object_index");
      o.grid = grid_from_record(rec);
      o.label = kitti::parse_label_line(field<std::string>(rec, "label"));
      const auto c = field<std::vector<double>>(rec, "center_projection");
      if (c.size() != 2) throw Error(ErrorCode::WrongArity, "center_projection needs 2 values");
      o.center_projection = {c[0], c[1]};
      frame.objects.push_back(std::move(o));
    }
  }
  if (j.contains("warnings")) frame.warnings = field<std::vector<std::string>>(j, "warnings");
  return frame;
}

Json patch_record(const InstancePatch& patch) {
  Json j;
  j["m"] = patch.rows();
  j["n"] = patch.cols();
  Json dv = Json::array(), uv = Json::array(), da = Json::array(), ua = Json::array();
  for (std::size_t i = 0; i < patch.size(); ++i) {
    dv.push_back(patch.visual()[i].d());
    uv.push_back(patch.visual()[i].u());
    da.push_back(patch.attribute()[i].d());
    ua.push_back(patch.attribute()[i].u());
  }
  j["d_vis"] = std::move(dv);
  j["u_vis"] = std::move(uv);
  j["d_att"] = std::move(da);
  j["u_att"] = std::move(ua);
  j["valid"] = flags(patch.valid());
  return j;
}

InstancePatch patch_from_record(const Json& j) {
  const int m = field<int>(j, "m");
  const int n = field<int>(j, "n");
  if (m < 1 || n < 1) throw Error(ErrorCode::InvalidValue, fmt::format("patch {}x{} is empty", m, n));
  const std::size_t cells = std::size_t(m) * n;
  const auto dv = nullable_array(j, "d_vis", cells);
  const auto uv = nullable_array(j, "u_vis", cells);
  const auto da = nullable_array(j, "d_att", cells);
  const auto ua = nullable_array(j, "u_att", cells);
  std::vector<DepthBelief> vis, att;
  for (std::size_t i = 0; i < cells; ++i) {
    vis.emplace_back(dv[i], uv[i]);
    att.emplace_back(da[i], ua[i]);
  }
  return InstancePatch(m, n, std::move(vis), std::move(att), flag_array(j, "valid", cells));
}

Json fused_record(const FusedObject& f) {
  Json j;
  j["frame_id"] = f.frame_id;
  j["object_index"] = f.object_index;
  j["d_ins"] = f.d_ins;
  j["u_summary"] = {{"min", f.u_summary.min}, {"mean", f.u_summary.mean}, {"max", f.u_summary.max}};
  j["p_ins"] = f.p_ins;
  j["score"] = f.score;
  return j;
}

Json uncertainty_record(const UncertaintyFile& u) {
  Json j;
  j["frame_id"] = u.frame_id;
  Json objects = Json::array();
  for (const auto& o : u.objects) {
    Json rec;
    rec["object_index"] = o.object_index;
    rec["u_vis"] = o.u_vis.size() == 1 ? Json(o.u_vis[0]) : Json(o.u_vis);
    rec["u_att"] = o.u_att.size() == 1 ? Json(o.u_att[0]) : Json(o.u_att);
    rec["p_2d"] = o.p_2d;
    objects.push_back(std::move(rec));
  }
  j["objects"] = std::move(objects);
  return j;
}

UncertaintyFile uncertainty_from_record(const Json& j) {
  UncertaintyFile u;
  u.frame_id = field<std::string>(j, "frame_id");
  if (!j.contains("objects")) throw Error(ErrorCode::MissingKey, "uncertainty record lacks 'objects'");
  for (const auto& rec : j.at("objects")) {
    ObjectUncertainty o;
    o.object_index = field<std::size_t>(rec, "object_index");
    o.u_vis = scalar_or_array(rec, "u_vis");
    o.u_att = scalar_or_array(rec, "u_att");
    o.p_2d = rec.contains("p_2d") ? field<double>(rec, "p_2d") : 1.0;
    u.objects.push_back(std::move(o));
  }
  return u;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidValue, fmt::format("malformed JSON: {}", e.what()));
  }
}

}  // namespace didgeom::records
