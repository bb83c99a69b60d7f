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

#include "didgeom/depth_fusion.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "didgeom/error.hpp"
#include "didgeom/random.hpp"

namespace didgeom {

DepthBelief::DepthBelief(double d, double u) : d_(d), u_(u) {
  if (!(u > 0.0) || !std::isfinite(u)) {
    throw Error(ErrorCode::InvalidUncertainty, fmt::format("uncertainty {} must be positive and finite", u));
  }
  u_ = std::max(u, kMinUncertainty);
}

InstancePatch::InstancePatch(int m, int n, std::vector<DepthBelief> visual, std::vector<DepthBelief> attribute,
                             std::vector<std::uint8_t> valid)
    : m_(m), n_(n), visual_(std::move(visual)), attribute_(std::move(attribute)), valid_(std::move(valid)) {
  const auto cells = std::size_t(std::max(m, 0)) * std::size_t(std::max(n, 0));
  if (m < 1 || n < 1 || visual_.size() != cells || attribute_.size() != cells || valid_.size() != cells) {
    throw Error(ErrorCode::InvalidValue, fmt::format("patch {}x{} needs {} cells in every field", m, n, cells));
  }
  d_ins_.resize(cells);
  u_ins_.resize(cells);
  prob_.resize(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    const auto fused = fusion::fuse_cell(visual_[i], attribute_[i]);
    d_ins_[i] = fused.d();
    u_ins_[i] = fused.u();
    prob_[i] = fusion::uncertainty_to_prob(fused.u());
  }
}

std::size_t InstancePatch::valid_count() const {
  return static_cast<std::size_t>(std::count_if(valid_.begin(), valid_.end(), [](auto v) { return v != 0; }));
}

namespace fusion {
namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

void require_valid(const InstancePatch& patch) {
  if (patch.valid_count() == 0) throw Error(ErrorCode::NoValidCells, "patch has no valid cells");
}

// True when every valid cell carries the same probability; the weighted
// means then reduce to plain means and are evaluated as such.
// Equal uncertainties, so equal P even where exp(-u) underflows.
bool uniform_probability(const InstancePatch& patch) {
  std::optional<double> first;
  for (std::size_t i = 0; i < patch.size(); ++i) {
    if (!patch.valid()[i]) continue;
    if (!first) first = patch.instance_uncertainty()[i];
    else if (patch.instance_uncertainty()[i] != *first) return false;
  }
  return true;
}

// exp(-(u - u_lowest)): same ratios as P but immune to underflow.
std::vector<double> shifted_weights(const InstancePatch& patch) {
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < patch.size(); ++i) {
    if (patch.valid()[i]) lowest = std::min(lowest, patch.instance_uncertainty()[i]);
  }
  std::vector<double> w(patch.size(), 0.0);
  for (std::size_t i = 0; i < patch.size(); ++i) {
    if (patch.valid()[i]) w[i] = std::exp(-(patch.instance_uncertainty()[i] - lowest));
  }
  return w;
}

void require_min_uncertainty(double u) {
  if (!(u >= kMinUncertainty) || !std::isfinite(u)) {
    throw Error(ErrorCode::InvalidUncertainty, fmt::format("uncertainty {} below {}", u, kMinUncertainty));
  }
}

}  // namespace

DepthBelief fuse_cell(const DepthBelief& vis, const DepthBelief& att) {
  return {vis.d() + att.d(), std::hypot(vis.u(), att.u())};
}

double uncertainty_to_prob(double u) {
  if (!(u >= 0.0)) throw Error(ErrorCode::NegativeUncertainty, fmt::format("uncertainty {} is negative", u));
  return std::exp(-u);
}

double aggregate_depth(const InstancePatch& patch) {
  require_valid(patch);
  const auto& d = patch.instance_depth();
  const auto& p = patch.probability();
  if (uniform_probability(patch)) {
    double sum = 0.0;
    for (std::size_t i = 0; i < patch.size(); ++i) {
      if (patch.valid()[i]) sum += d[i];
    }
    return sum / double(patch.valid_count());
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < patch.size(); ++i) {
    if (!patch.valid()[i]) continue;
    num += d[i] * p[i];
    den += p[i];
  }
  if (den > 0.0) return num / den;

  const auto w = shifted_weights(patch);
  num = den = 0.0;
  for (std::size_t i = 0; i < patch.size(); ++i) {
    num += d[i] * w[i];
    den += w[i];
  }
  return num / den;
}

double instance_confidence(const InstancePatch& patch) {
  require_valid(patch);
  const auto& p = patch.probability();
  if (uniform_probability(patch)) {
    for (std::size_t i = 0; i < patch.size(); ++i) {
      if (patch.valid()[i]) return p[i];
    }
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < patch.size(); ++i) {
    if (!patch.valid()[i]) continue;
    num += p[i] * p[i];
    den += p[i];
  }
  return den > 0.0 ? num / den : 0.0;
}

double final_score(double p_2d, double p_ins) {
  if (!(p_2d >= 0.0 && p_2d <= 1.0) || !(p_ins > 0.0 && p_ins <= 1.0)) {
    throw Error(ErrorCode::OutOfRange, fmt::format("scores out of range (p_2d={}, p_ins={})", p_2d, p_ins));
  }
  return p_2d * p_ins;
}

UncertaintySummary summarize_uncertainty(const InstancePatch& patch) {
  require_valid(patch);
  UncertaintySummary s{std::numeric_limits<double>::infinity(), 0.0, -std::numeric_limits<double>::infinity()};
  double sum = 0.0;
  for (std::size_t i = 0; i < patch.size(); ++i) {
    if (!patch.valid()[i]) continue;
    const double u = patch.instance_uncertainty()[i];
    s.min = std::min(s.min, u);
    s.max = std::max(s.max, u);
    sum += u;
  }
  s.mean = sum / double(patch.valid_count());
  return s;
}

double laplace_nll(double d, double u, double target) {
  require_min_uncertainty(u);
  return kSqrt2 / u * std::abs(d - target) + std::log(u);
}

LaplaceGrad laplace_nll_grad(double d, double u, double target) {
  require_min_uncertainty(u);
  const double diff = d - target;
  const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
  // (1 - sqrt2 |diff| / u) / u vanishes exactly at u = sqrt2 |diff|
  return {kSqrt2 / u * sign, (1.0 - kSqrt2 * std::abs(diff) / u) / u};
}

double smooth_l1(double x, double beta) {
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidValue, fmt::format("beta {} must be positive", beta));
  const double ax = std::abs(x);
  return ax < beta ? 0.5 * x * x / beta : ax - 0.5 * beta;
}

double smooth_l1_grad(double x, double beta) {
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidValue, fmt::format("beta {} must be positive", beta));
  if (std::abs(x) < beta) return x / beta;
  return x > 0.0 ? 1.0 : -1.0;
}

double GradCheckReport::max_rel_error() const {
  return std::max({max_rel_error_nll_d, max_rel_error_nll_u, max_rel_error_smooth_l1});
}

GradCheckReport gradient_check(int samples, std::uint64_t seed, double h) {
  Rng rng(seed);
  auto rel = [](double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max({1.0, std::abs(analytic), std::abs(numeric)});
  };

  GradCheckReport report;
  report.samples = samples;
  for (int s = 0; s < samples; ++s) {
    double d = 0.0, target = 0.0;
    do {
      d = rng.uniform(0.5, 80.0);
      target = rng.uniform(0.5, 80.0);
    } while (std::abs(d - target) < 1e-3);
    const double u = rng.uniform(0.05, 5.0);

    const auto g = laplace_nll_grad(d, u, target);
    const double fd_d = (laplace_nll(d + h, u, target) - laplace_nll(d - h, u, target)) / (2.0 * h);
    const double fd_u = (laplace_nll(d, u + h, target) - laplace_nll(d, u - h, target)) / (2.0 * h);
    report.max_rel_error_nll_d = std::max(report.max_rel_error_nll_d, rel(g.d_d, fd_d));
    report.max_rel_error_nll_u = std::max(report.max_rel_error_nll_u, rel(g.d_u, fd_u));

    const double u_star = kSqrt2 * std::abs(d - target);
    if (u_star >= kMinUncertainty) {
      report.max_abs_grad_at_optimum =
          std::max(report.max_abs_grad_at_optimum, std::abs(laplace_nll_grad(d, u_star, target).d_u));
    }

    const double beta = rng.uniform(0.1, 2.0);
    double x = 0.0;
    do {
      x = rng.uniform(-5.0, 5.0);
    } while (std::abs(std::abs(x) - beta) < 1e-3);
    const double fd_x = (smooth_l1(x + h, beta) - smooth_l1(x - h, beta)) / (2.0 * h);
    report.max_rel_error_smooth_l1 = std::max(report.max_rel_error_smooth_l1, rel(smooth_l1_grad(x, beta), fd_x));
  }
  return report;
}

}  // namespace fusion
}  // namespace didgeom
