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

// KITTI-style difficulty stratification, greedy matching and AP|R40 for BEV
// and 3D boxes.

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "didgeom/geometry.hpp"
#include "didgeom/kitti_io.hpp"

namespace didgeom {

enum class Difficulty { Easy = 0, Moderate = 1, Hard = 2, Ignored = 3 };
enum class Metric { Bev, Box3D };

std::string_view to_string(Difficulty d);
std::string_view to_string(Metric m);

inline constexpr int kRecallPoints = 40;

struct DifficultyThresholds {
  std::array<double, 3> min_height{40.0, 25.0, 25.0};
  std::array<int, 3> max_occlusion{0, 1, 2};
  std::array<double, 3> max_truncation{0.15, 0.30, 0.50};
};

enum class DetStatus { TruePositive, FalsePositive, Ignored };

struct GroundTruthEntry {
  ObjectBox3D box;
  bool ignored = false;
};

struct FrameMatch {
  std::vector<DetStatus> det_status;  // aligned with the input detection order
  std::vector<bool> gt_matched;
};

struct ScoredOutcome {
  double score = 0.0;
  bool true_positive = false;
};

struct SliceResult {
  std::string category;
  Difficulty difficulty = Difficulty::Easy;
  Metric metric = Metric::Bev;
  double iou_threshold = 0.7;
  double ap = 0.0;
  bool defined = false;  // false when the slice has no ground truth
  int num_gt = 0;
  int num_tp = 0;
  int num_fp = 0;
  std::array<double, kRecallPoints> precision{};  // p_interp(k/40), k = 1..40
};

struct EvalReport {
  std::vector<SliceResult> slices;

  const SliceResult* find(std::string_view category, Difficulty d, Metric m) const;
};

struct EvalConfig {
  // Overrides every per-category threshold when set.
  std::optional<double> iou_threshold;
  std::map<std::string, double> category_iou{{"Car", 0.7}, {"Pedestrian", 0.5}, {"Cyclist", 0.5}};
  double default_iou = 0.5;
  std::vector<Metric> metrics{Metric::Bev, Metric::Box3D};
  // Empty: every category present in ground truth or detections.
  std::vector<std::string> categories;
  DifficultyThresholds difficulty;

  double threshold_for(const std::string& category) const;
};

using FrameSet = std::map<std::string, std::vector<ObjectLabel>>;

namespace eval {

// Easy / Moderate / Hard by 2D box height, occlusion and truncation;
// DontCare and everything else is Ignored.
Difficulty assign_difficulty(const ObjectLabel& label, const DifficultyThresholds& t = {});

// Greedy matching. Detections are visited by descending score (stable on
// input order); each claims the unmatched non-ignored ground truth with the
// highest IoU >= threshold. A detection whose best remaining match is an
// ignored ground truth is Ignored; anything else is a false positive.
FrameMatch match_frame(std::span<const ObjectBox3D> detections, std::span<const GroundTruthEntry> gts,
                       Metric metric, double threshold);

// Interpolated precision at recall k/40, k = 1..40, over the pooled
// outcomes. The curve is only sampled at score boundaries, so the result
// does not depend on the order of equal-score outcomes.
std::array<double, kRecallPoints> interpolated_precision(std::span<const ScoredOutcome> outcomes, int num_gt);

// Mean of interpolated_precision; 0 when num_gt == 0.
double ap40(std::span<const ScoredOutcome> outcomes, int num_gt);

// Throws FrameMismatch unless both sets cover the same frame ids.
EvalReport evaluate(const FrameSet& gt, const FrameSet& det, const EvalConfig& config = {});

// Aligned text table, one row per (category, difficulty, metric).
std::string format_report(const EvalReport& report);

}  // namespace eval
}  // namespace didgeom
