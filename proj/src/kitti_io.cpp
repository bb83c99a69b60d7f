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

#include "didgeom/kitti_io.hpp"

#include <fmt/format.h>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "didgeom/error.hpp"

namespace didgeom {

CameraCalib::CameraCalib(const Matrix34& p2) : p_(p2) {
  fu_ = p_[0][0];
  fv_ = p_[1][1];
  cu_ = p_[0][2];
  cv_ = p_[1][2];
  tx_ = p_[0][3];
  ty_ = p_[1][3];
  if (!(fu_ > 0.0) || !(fv_ > 0.0)) {
    throw Error(ErrorCode::InvalidValue, fmt::format("focal lengths must be positive (fu={}, fv={})", fu_, fv_));
  }
}

Point3D CameraCalib::velodyne_to_camera(const Point3D& p) const {
  if (!has_extrinsics()) {
    throw Error(ErrorCode::MissingKey, "R0_rect and Tr_velo_to_cam required for velodyne points");
  }
  const Matrix34& t = *velo_to_cam_;
  const Matrix33& r = *rect_;
  std::array<double, 3> cam{};
  for (int i = 0; i < 3; ++i) {
    cam[i] = t[i][0] * p.x + t[i][1] * p.y + t[i][2] * p.z + t[i][3];
  }
  std::array<double, 3> out{};
  for (int i = 0; i < 3; ++i) {
    out[i] = r[i][0] * cam[0] + r[i][1] * cam[1] + r[i][2] * cam[2];
  }
  return {out[0], out[1], out[2]};
}

CameraCalib CameraCalib::scaled(double s) const {
  Matrix34 p = p_;
  for (int r = 0; r < 2; ++r) {
    for (auto& v : p[r]) v *= s;
  }
  CameraCalib out(p);
  out.rect_ = rect_;
  out.velo_to_cam_ = velo_to_cam_;
  return out;
}

namespace kitti {
namespace {

std::vector<std::string_view> tokenize(std::string_view text) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) tokens.push_back(text.substr(start, i - start));
  }
  return tokens;
}

double parse_real(std::string_view token) {
  std::string_view body = token;
  if (!body.empty() && body.front() == '+') body.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
  if (ec != std::errc() || ptr != body.data() + body.size() || body.empty()) {
    throw Error(ErrorCode::MalformedNumber, fmt::format("cannot parse '{}' as a real", token));
  }
  return value;
}

int parse_integral(std::string_view token) {
  const double value = parse_real(token);
  if (value != std::floor(value) || std::abs(value) > 1e6) {
    throw Error(ErrorCode::MalformedNumber, fmt::format("'{}' is not an integer", token));
  }
  return static_cast<int>(value);
}

template <std::size_t N>
std::array<double, N> parse_values(std::string_view key, std::string_view rest) {
  const auto tokens = tokenize(rest);
  if (tokens.size() != N) {
    throw Error(ErrorCode::WrongArity, fmt::format("{} expects {} values, got {}", key, N, tokens.size()));
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = parse_real(tokens[i]);
  return out;
}

std::string real(double v, Precision precision) {
  if (precision == Precision::Exact) return fmt::format("{}", v);
  // avoid "-0.00"
  std::string s = fmt::format("{:.2f}", v);
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string join_matrix_row_major(const double* values, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += fmt::format("{}", values[i]);
  }
  return out;
}

}  // namespace

CameraCalib parse_calibration(std::string_view text) {
  std::optional<std::array<double, 12>> p2;
  std::optional<std::array<double, 9>> rect;
  std::optional<std::array<double, 12>> velo;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;

    const std::size_t colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    auto key = line.substr(0, colon);
    while (!key.empty() && std::isspace(static_cast<unsigned char>(key.front()))) key.remove_prefix(1);
    const auto rest = line.substr(colon + 1);
    if (key == "P2") {
      p2 = parse_values<12>(key, rest);
    } else if (key == "R0_rect" || key == "R_rect") {
      rect = parse_values<9>(key, rest);
    } else if (key == "Tr_velo_to_cam" || key == "Tr_velo_cam") {
      velo = parse_values<12>(key, rest);
    }
  }
  if (!p2) throw Error(ErrorCode::MissingKey, "no P2 line in calibration");

  Matrix34 p{};
  for (int i = 0; i < 12; ++i) p[i / 4][i % 4] = (*p2)[i];
  CameraCalib calib(p);
  if (rect) {
    Matrix33 r{};
    for (int i = 0; i < 9; ++i) r[i / 3][i % 3] = (*rect)[i];
    calib.set_rect(r);
  }
  if (velo) {
    Matrix34 t{};
    for (int i = 0; i < 12; ++i) t[i / 4][i % 4] = (*velo)[i];
    calib.set_velo_to_cam(t);
  }
  return calib;
}

std::string write_calibration(const CameraCalib& calib) {
  std::string out = "P2: " + join_matrix_row_major(calib.projection()[0].data(), 4) + ' ' +
                    join_matrix_row_major(calib.projection()[1].data(), 4) + ' ' +
                    join_matrix_row_major(calib.projection()[2].data(), 4) + '\n';
  if (calib.rect()) {
    const auto& r = *calib.rect();
    out += "R0_rect: " + join_matrix_row_major(r[0].data(), 3) + ' ' + join_matrix_row_major(r[1].data(), 3) +
           ' ' + join_matrix_row_major(r[2].data(), 3) + '\n';
  }
  if (calib.velo_to_cam()) {
    const auto& t = *calib.velo_to_cam();
    out += "Tr_velo_to_cam: " + join_matrix_row_major(t[0].data(), 4) + ' ' + join_matrix_row_major(t[1].data(), 4) +
           ' ' + join_matrix_row_major(t[2].data(), 4) + '\n';
  }
  return out;
}

ObjectLabel parse_label_line(std::string_view line) {
  const auto tok = tokenize(line);
  if (tok.size() != 15 && tok.size() != 16) {
    throw Error(ErrorCode::WrongArity, fmt::format("label line has {} fields, expected 15 or 16", tok.size()));
  }
  ObjectLabel label;
  label.category = std::string(tok[0]);
  label.truncation = parse_real(tok[1]);
  label.occlusion = parse_integral(tok[2]);
  label.alpha = parse_real(tok[3]);
  label.box = {parse_real(tok[4]), parse_real(tok[5]), parse_real(tok[6]), parse_real(tok[7])};
  label.dims = {parse_real(tok[8]), parse_real(tok[9]), parse_real(tok[10])};
  label.location = {parse_real(tok[11]), parse_real(tok[12]), parse_real(tok[13])};
  label.ry = parse_real(tok[14]);
  if (tok.size() == 16) label.score = parse_real(tok[15]);

  if (!label.is_dont_care()) {
    if (!(label.box.u_min < label.box.u_max) || !(label.box.v_min < label.box.v_max)) {
      throw Error(ErrorCode::InvalidValue, "2D box must satisfy u_min < u_max and v_min < v_max");
    }
    if (!(label.dims.h > 0.0) || !(label.dims.w > 0.0) || !(label.dims.l > 0.0)) {
      throw Error(ErrorCode::InvalidValue, "dimensions must be positive");
    }
    // -1 is what most detectors write for "not estimated"
    if (label.occlusion < -1 || label.occlusion > 3) {
      throw Error(ErrorCode::InvalidValue, fmt::format("occlusion {} outside -1..3", label.occlusion));
    }
  }
  return label;
}

std::vector<ObjectLabel> parse_label_file(std::string_view text) {
  std::vector<ObjectLabel> out;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (tokenize(line).empty()) continue;
    try {
      out.push_back(parse_label_line(line));
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("line {}: {}", line_no, e.what()));
    }
  }
  return out;
}

std::string serialize_label(const ObjectLabel& l, Precision precision) {
  std::string out = fmt::format(
      "{} {} {} {} {} {} {} {} {} {} {} {} {} {} {}", l.category, real(l.truncation, precision), l.occlusion,
      real(l.alpha, precision), real(l.box.u_min, precision), real(l.box.v_min, precision),
      real(l.box.u_max, precision), real(l.box.v_max, precision), real(l.dims.h, precision),
      real(l.dims.w, precision), real(l.dims.l, precision), real(l.location.x, precision),
      real(l.location.y, precision), real(l.location.z, precision), real(l.ry, precision));
  if (l.score) out += ' ' + real(*l.score, precision);
  return out;
}

std::string serialize_detection(const ObjectLabel& label) {
  if (!label.score) throw Error(ErrorCode::MissingScore, "detections need a score");
  return serialize_label(label, Precision::Kitti);
}

std::string serialize_label_file(std::span<const ObjectLabel> labels, Precision precision) {
  std::string out;
  for (const auto& l : labels) {
    out += serialize_label(l, precision);
    out += '\n';
  }
  return out;
}

namespace {

float load_le_float(const std::byte* p) {
  std::uint32_t bits = 0;
  for (int i = 3; i >= 0; --i) bits = (bits << 8) | static_cast<std::uint32_t>(p[i]);
  return std::bit_cast<float>(bits);
}

void store_le_float(float v, std::byte* p) {
  auto bits = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) {
    p[i] = static_cast<std::byte>(bits & 0xFFu);
    bits >>= 8;
  }
}

}  // namespace

PointCloud read_point_cloud(std::span<const std::byte> bytes) {
  if (bytes.size() % 16 != 0) {
    throw Error(ErrorCode::TruncatedFile, fmt::format("{} bytes is not a multiple of 16", bytes.size()));
  }
  PointCloud cloud;
  cloud.points.reserve(bytes.size() / 16);
  for (std::size_t off = 0; off < bytes.size(); off += 16) {
    const float x = load_le_float(bytes.data() + off);
    const float y = load_le_float(bytes.data() + off + 4);
    const float z = load_le_float(bytes.data() + off + 8);
    const float r = load_le_float(bytes.data() + off + 12);
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z) || !std::isfinite(r)) {
      throw Error(ErrorCode::InvalidValue, fmt::format("non-finite point record {}", off / 16));
    }
    cloud.points.push_back({x, y, z, r});
  }
  return cloud;
}

std::vector<std::byte> write_point_cloud(const PointCloud& cloud) {
  std::vector<std::byte> out(cloud.points.size() * 16);
  std::byte* p = out.data();
  for (const auto& pt : cloud.points) {
    store_le_float(static_cast<float>(pt.x), p);
    store_le_float(static_cast<float>(pt.y), p + 4);
    store_le_float(static_cast<float>(pt.z), p + 8);
    store_le_float(static_cast<float>(pt.reflectance), p + 12);
    p += 16;
  }
  return out;
}

}  // namespace kitti

namespace files {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open {}", path.string()));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::byte> read_binary(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  std::vector<std::byte> out(text.size());
  std::memcpy(out.data(), text.data(), text.size());
  return out;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot write {}", path.string()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::IoError, fmt::format("short write to {}", path.string()));
}

void write_binary(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  write_text(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace files

}  // namespace didgeom
