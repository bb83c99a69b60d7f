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

// KITTI calibration, label/detection and velodyne formats.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "didgeom/types.hpp"

namespace didgeom {

// Left colour camera projection (P2) with derived intrinsics.
//
// Optional R0_rect / Tr_velo_to_cam extrinsics are carried when present so
// raw velodyne clouds can be brought into the rectified camera frame.
class CameraCalib {
 public:
  // Throws InvalidValue unless P[0][0] > 0 and P[1][1] > 0.
  explicit CameraCalib(const Matrix34& p2);

  const Matrix34& projection() const { return p_; }

  double fu() const { return fu_; }
  double fv() const { return fv_; }
  double cu() const { return cu_; }
  double cv() const { return cv_; }
  double tx() const { return tx_; }
  double ty() const { return ty_; }

  const std::optional<Matrix33>& rect() const { return rect_; }
  const std::optional<Matrix34>& velo_to_cam() const { return velo_to_cam_; }
  void set_rect(const Matrix33& r) { rect_ = r; }
  void set_velo_to_cam(const Matrix34& t) { velo_to_cam_ = t; }
  bool has_extrinsics() const { return rect_.has_value() && velo_to_cam_.has_value(); }

  // R0_rect * Tr_velo_to_cam * [x y z 1]^T. Throws MissingKey without extrinsics.
  Point3D velodyne_to_camera(const Point3D& p) const;

  // Rows 0 and 1 of P multiplied by s: the camera seeing an image rescaled by s
  // about the pixel origin.
  CameraCalib scaled(double s) const;

  friend bool operator==(const CameraCalib& a, const CameraCalib& b) {
    return a.p_ == b.p_ && a.rect_ == b.rect_ && a.velo_to_cam_ == b.velo_to_cam_;
  }

 private:
  Matrix34 p_;
  double fu_, fv_, cu_, cv_, tx_, ty_;
  std::optional<Matrix33> rect_;
  std::optional<Matrix34> velo_to_cam_;
};

// One KITTI label or detection row. `location` is the bottom-face centre.
struct ObjectLabel {
  std::string category;
  double truncation = 0.0;
  int occlusion = 0;
  double alpha = 0.0;
  Box2D box;
  Dimensions dims;
  Point3D location;
  double ry = 0.0;
  std::optional<double> score;

  bool is_dont_care() const { return category == "DontCare"; }

  friend bool operator==(const ObjectLabel&, const ObjectLabel&) = default;
};

struct LidarPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double reflectance = 0.0;

  friend bool operator==(const LidarPoint&, const LidarPoint&) = default;
};

struct PointCloud {
  std::vector<LidarPoint> points;

  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

namespace kitti {

// Reals written by serialize_* carry this many decimals in the default
// (KITTI tooling) precision. Lossy by design.
inline constexpr int kDecimals = 2;

enum class Precision {
  Kitti,  // fixed 2 decimals
  Exact,  // shortest representation that parses back to the same double
};

// Requires a "P2:" line with 12 reals; "R0_rect:" (9) and "Tr_velo_to_cam:"
// (12) are picked up when present. Other keys are ignored.
CameraCalib parse_calibration(std::string_view text);

// Emits P2 (and extrinsics, when set) in shortest round-trip form.
std::string write_calibration(const CameraCalib& calib);

// 15 tokens for labels, 16 for detections (trailing score).
ObjectLabel parse_label_line(std::string_view line);

// Blank lines are skipped. Errors are re-thrown with a "line N" prefix.
std::vector<ObjectLabel> parse_label_file(std::string_view text);

// 16-field detection row at fixed 2-decimal precision. Throws MissingScore.
std::string serialize_detection(const ObjectLabel& label);

// 15-field label row (16 if a score is present).
std::string serialize_label(const ObjectLabel& label, Precision precision = Precision::Kitti);

// One line per object, LF-terminated.
std::string serialize_label_file(std::span<const ObjectLabel> labels,
                                 Precision precision = Precision::Kitti);

// Little-endian float32 x4 per point. Throws TruncatedFile when the byte
// count is not a multiple of 16 and InvalidValue on non-finite records.
PointCloud read_point_cloud(std::span<const std::byte> bytes);
std::vector<std::byte> write_point_cloud(const PointCloud& cloud);

}  // namespace kitti

namespace files {

// All throw IoError with the path in the message.
std::string read_text(const std::filesystem::path& path);
std::vector<std::byte> read_binary(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);
void write_binary(const std::filesystem::path& path, std::span<const std::byte> bytes);

}  // namespace files

}  // namespace didgeom
