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

#include "didgeom/evaluation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "didgeom/error.hpp"

namespace didgeom {

std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::Easy: return "easy";
    case Difficulty::Moderate: return "moderate";
    case Difficulty::Hard: return "hard";
    case Difficulty::Ignored: return "ignored";
  }
  return "?";
}

std::string_view to_string(Metric m) { return m == Metric::Bev ? "bev" : "3d"; }

const SliceResult* EvalReport::find(std::string_view category, Difficulty d, Metric m) const {
  for (const auto& s : slices) {
    if (s.category == category && s.difficulty == d && s.metric == m) return &s;
  }
  return nullptr;
}

double EvalConfig::threshold_for(const std::string& category) const {
  if (iou_threshold) return *iou_threshold;
  const auto it = category_iou.find(category);
  return it == category_iou.end() ? default_iou : it->second;
}

namespace eval {

Difficulty assign_difficulty(const ObjectLabel& label, const DifficultyThresholds& t) {
  if (label.is_dont_care()) return Difficulty::Ignored;
  const double height = label.box.height();
  for (int level = 0; level < 3; ++level) {
    if (height >= t.min_height[level] && label.occlusion >= 0 && label.occlusion <= t.max_occlusion[level] &&
        label.truncation <= t.max_truncation[level]) {
      return static_cast<Difficulty>(level);
    }
  }
  return Difficulty::Ignored;
}

namespace {

std::vector<std::size_t> score_order(std::span<const ObjectBox3D> detections) {
  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detections[a].score.value_or(0.0) > detections[b].score.value_or(0.0);
  });
  return order;
}

double box_iou(const ObjectBox3D& a, const ObjectBox3D& b, Metric metric) {
  return metric == Metric::Bev ? geom::iou_bev(a, b) : geom::iou_3d(a, b);
}

}  // namespace

FrameMatch match_frame(std::span<const ObjectBox3D> detections, std::span<const GroundTruthEntry> gts, Metric metric,
                       double threshold) {
  FrameMatch result;
  result.det_status.assign(detections.size(), DetStatus::FalsePositive);
  result.gt_matched.assign(gts.size(), false);

  for (const std::size_t d : score_order(detections)) {
    int best = -1;
    double best_iou = -1.0;
    bool hits_ignored = false;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const double iou = box_iou(detections[d], gts[g].box, metric);
      if (iou < threshold) continue;
      if (gts[g].ignored) {
        hits_ignored = true;
      } else if (!result.gt_matched[g] && iou > best_iou) {
        best = static_cast<int>(g);
        best_iou = iou;
      }
    }
    if (best >= 0) {
      result.gt_matched[best] = true;
      result.det_status[d] = DetStatus::TruePositive;
    } else if (hits_ignored) {
      result.det_status[d] = DetStatus::Ignored;
    }
  }
  return result;
}

std::array<double, kRecallPoints> interpolated_precision(std::span<const ScoredOutcome> outcomes, int num_gt) {
  std::array<double, kRecallPoints> out{};
  if (num_gt <= 0 || outcomes.empty()) return out;

  std::vector<std::size_t> order(outcomes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return outcomes[a].score > outcomes[b].score; });

  // (tp, precision) at each score threshold
  std::vector<std::pair<long, double>> curve;
  long tp = 0;
  long fp = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (outcomes[order[i]].true_positive) ++tp;
    else ++fp;
    const bool group_end = i + 1 == order.size() || outcomes[order[i + 1]].score != outcomes[order[i]].score;
    if (group_end) curve.emplace_back(tp, double(tp) / double(tp + fp));
  }

  // suffix maximum of precision; recall is monotone along the curve
  std::vector<double> best(curve.size());
  double running = 0.0;
  for (std::size_t i = curve.size(); i-- > 0;) {
    running = std::max(running, curve[i].second);
    best[i] = running;
  }
  std::size_t j = 0;
  for (int k = 1; k <= kRecallPoints; ++k) {
    // recall tp / num_gt >= k / 40
    while (j < curve.size() && curve[j].first * kRecallPoints < long(k) * num_gt) ++j;
    out[k - 1] = j < curve.size() ? best[j] : 0.0;
  }
  return out;
}

double ap40(std::span<const ScoredOutcome> outcomes, int num_gt) {
  const auto p = interpolated_precision(outcomes, num_gt);
  double sum = 0.0;
  for (double v : p) sum += v;
  return sum / kRecallPoints;
}

EvalReport evaluate(const FrameSet& gt, const FrameSet& det, const EvalConfig& config) {
  for (const auto& [id, _] : gt) {
    if (!det.contains(id)) throw Error(ErrorCode::FrameMismatch, fmt::format("frame {} has no detections entry", id));
  }
  for (const auto& [id, _] : det) {
    if (!gt.contains(id)) throw Error(ErrorCode::FrameMismatch, fmt::format("frame {} has no ground truth", id));
  }

  std::vector<std::string> categories = config.categories;
  if (categories.empty()) {
    std::set<std::string> seen;
    for (const auto* set : {&gt, &det}) {
      for (const auto& [_, objects] : *set) {
        for (const auto& o : objects) {
          if (!o.is_dont_care()) seen.insert(o.category);
        }
      }
    }
    categories.assign(seen.begin(), seen.end());
  }

  EvalReport report;
  for (const auto& category : categories) {
    const double threshold = config.threshold_for(category);
    for (const Metric metric : config.metrics) {
      for (int level = 0; level < 3; ++level) {
        SliceResult slice;
        slice.category = category;
        slice.difficulty = static_cast<Difficulty>(level);
        slice.metric = metric;
        slice.iou_threshold = threshold;

        std::vector<ScoredOutcome> pooled;
        for (const auto& [id, gt_objects] : gt) {
          std::vector<GroundTruthEntry> gts;
          for (const auto& g : gt_objects) {
            if (g.category != category) continue;
            const auto d = assign_difficulty(g, config.difficulty);
            const bool ignored = d == Difficulty::Ignored || static_cast<int>(d) > level;
            gts.push_back({box_from_label(g), ignored});
            if (!ignored) ++slice.num_gt;
          }
          std::vector<ObjectBox3D> dets;
          for (const auto& d : det.at(id)) {
            if (d.category != category) continue;
            if (!d.score) throw Error(ErrorCode::MissingScore, fmt::format("frame {}: detection without score", id));
            dets.push_back(box_from_label(d));
          }
          const auto match = match_frame(dets, gts, metric, threshold);
          for (std::size_t i = 0; i < dets.size(); ++i) {
            if (match.det_status[i] == DetStatus::Ignored) continue;
            const bool tp = match.det_status[i] == DetStatus::TruePositive;
            pooled.push_back({*dets[i].score, tp});
            (tp ? slice.num_tp : slice.num_fp)++;
          }
        }
        slice.defined = slice.num_gt > 0;
        slice.precision = interpolated_precision(pooled, slice.num_gt);
        slice.ap = ap40(pooled, slice.num_gt);
        report.slices.push_back(std::move(slice));
      }
    }
  }
  return report;
}

std::string format_report(const EvalReport& report) {
  std::string out = fmt::format("{:<12} {:<9} {:<6} {:>5} {:>8} {:>6} {:>6} {:>6}\n", "category", "level", "metric",
                                "iou", "AP40", "gt", "tp", "fp");
  for (const auto& s : report.slices) {
    out += fmt::format("{:<12} {:<9} {:<6} {:>5.2f} {:>8} {:>6} {:>6} {:>6}\n", s.category, to_string(s.difficulty),
                       to_string(s.metric), s.iou_threshold, s.defined ? fmt::format("{:.4f}", s.ap) : "n/a",
                       s.num_gt, s.num_tp, s.num_fp);
  }
  return out;
}

}  // namespace eval
}  // namespace didgeom
