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

// Independent reference implementations used by the unit and acceptance
// tests. Nothing here calls into the library's geometry or evaluation code.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

struct Footprint {
  double x, z;     // centre
  double l, w;     // extent along the rotated x / z axes
  double ry;
};

inline bool inside(const Footprint& f, double px, double pz) {
  const double c = std::cos(f.ry), s = std::sin(f.ry);
  const double dx = px - f.x, dz = pz - f.z;
  const double lx = c * dx - s * dz;
  const double lz = s * dx + c * dz;
  return std::abs(lx) <= f.l / 2 && std::abs(lz) <= f.w / 2;
}

// Monte-Carlo BEV IoU over the joint bounding square of both footprints.
inline double monte_carlo_iou(const Footprint& a, const Footprint& b, int samples, std::uint64_t seed) {
  const double ra = 0.5 * std::hypot(a.l, a.w), rb = 0.5 * std::hypot(b.l, b.w);
  const double x0 = std::min(a.x - ra, b.x - rb), x1 = std::max(a.x + ra, b.x + rb);
  const double z0 = std::min(a.z - ra, b.z - rb), z1 = std::max(a.z + ra, b.z + rb);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> ux(x0, x1), uz(z0, z1);
  long in_a = 0, in_b = 0, both = 0;
  for (int i = 0; i < samples; ++i) {
    const double px = ux(gen), pz = uz(gen);
    const bool ia = inside(a, px, pz), ib = inside(b, px, pz);
    in_a += ia;
    in_b += ib;
    both += ia && ib;
  }
  const long uni = in_a + in_b - both;
  return uni == 0 ? 0.0 : double(both) / double(uni);
}

struct Outcome {
  double score;
  bool tp;
};

// AP over the 40-point recall grid by enumerating every score threshold.
inline double brute_force_ap40(const std::vector<Outcome>& outcomes, int num_gt) {
  if (num_gt <= 0) return 0.0;
  std::vector<double> thresholds;
  for (const auto& o : outcomes) thresholds.push_back(o.score);
  std::vector<std::pair<double, double>> pr;  // (recall, precision)
  for (double t : thresholds) {
    int tp = 0, fp = 0;
    for (const auto& o : outcomes) {
      if (o.score >= t) (o.tp ? tp : fp) += 1;
    }
    pr.emplace_back(double(tp) / num_gt, double(tp) / double(tp + fp));
  }
  double sum = 0.0;
  for (int k = 1; k <= 40; ++k) {
    const double r = k / 40.0;
    double best = 0.0;
    for (const auto& [rec, prec] : pr) {
      if (rec >= r) best = std::max(best, prec);
    }
    sum += best;
  }
  return sum / 40.0;
}

}  // namespace oracle
