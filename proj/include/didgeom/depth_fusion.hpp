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

// Laplace depth beliefs: fusion of visual and attribute depth, probability
// weighted aggregation over the RoI patch, and the depth losses.

#include <cstdint>
#include <span>
#include <vector>

namespace didgeom {

inline constexpr double kMinUncertainty = 1e-6;

// Laplace(d, u). `u` is clamped up to kMinUncertainty on construction.
class DepthBelief {
 public:
  // Throws InvalidUncertainty when u <= 0 or is not finite.
  DepthBelief(double d, double u);

  double d() const { return d_; }
  double u() const { return u_; }

 private:
  double d_;
  double u_;
};

// m x n visual and attribute beliefs plus the derived per-cell instance
// belief and probability. Invalid cells take no part in aggregation.
class InstancePatch {
 public:
  InstancePatch(int m, int n, std::vector<DepthBelief> visual, std::vector<DepthBelief> attribute,
                std::vector<std::uint8_t> valid);

  int rows() const { return m_; }
  int cols() const { return n_; }
  std::size_t size() const { return valid_.size(); }

  const std::vector<DepthBelief>& visual() const { return visual_; }
  const std::vector<DepthBelief>& attribute() const { return attribute_; }
  const std::vector<std::uint8_t>& valid() const { return valid_; }
  const std::vector<double>& instance_depth() const { return d_ins_; }
  const std::vector<double>& instance_uncertainty() const { return u_ins_; }
  const std::vector<double>& probability() const { return prob_; }
  std::size_t valid_count() const;

 private:
  int m_;
  int n_;
  std::vector<DepthBelief> visual_;
  std::vector<DepthBelief> attribute_;
  std::vector<std::uint8_t> valid_;
  std::vector<double> d_ins_;
  std::vector<double> u_ins_;
  std::vector<double> prob_;
};

namespace fusion {

// d = vis.d + att.d, u = sqrt(vis.u^2 + att.u^2).
DepthBelief fuse_cell(const DepthBelief& vis, const DepthBelief& att);

// exp(-u). Throws NegativeUncertainty.
double uncertainty_to_prob(double u);

// sum(d * P) / sum(P) over valid cells. Throws NoValidCells.
double aggregate_depth(const InstancePatch& patch);

// sum(P^2) / sum(P) over valid cells. Throws NoValidCells.
double instance_confidence(const InstancePatch& patch);

// p_2d * p_ins. Throws OutOfRange unless p_2d in [0, 1] and p_ins in (0, 1].
double final_score(double p_2d, double p_ins);

struct UncertaintySummary {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
};

// Statistics of the fused per-cell uncertainty over valid cells.
UncertaintySummary summarize_uncertainty(const InstancePatch& patch);

struct LaplaceGrad {
  double d_d = 0.0;
  double d_u = 0.0;
};

// sqrt(2)/u * |d - target| + ln u. Throws InvalidUncertainty for u < kMinUncertainty.
double laplace_nll(double d, double u, double target);
// Gradient w.r.t. (d, u); the sign term is 0 at d == target.
LaplaceGrad laplace_nll_grad(double d, double u, double target);

// 0.5 x^2 / beta inside |x| < beta, |x| - 0.5 beta outside. Throws InvalidValue for beta <= 0.
double smooth_l1(double x, double beta = 1.0);
double smooth_l1_grad(double x, double beta = 1.0);

struct GradCheckReport {
  int samples = 0;
  double max_rel_error_nll_d = 0.0;
  double max_rel_error_nll_u = 0.0;
  double max_rel_error_smooth_l1 = 0.0;
  double max_abs_grad_at_optimum = 0.0;  // |dL/du| at u = sqrt(2)|d - target|

  double max_rel_error() const;
};

// Central differences with step h against the analytic gradients over
// `samples` random points (fixed seed). Relative error is
// |analytic - numeric| / max(1, |analytic|, |numeric|).
GradCheckReport gradient_check(int samples, std::uint64_t seed, double h = 1e-6);

}  // namespace fusion
}  // namespace didgeom
