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

#include <doctest.h>

#include <cmath>
#include <numeric>

#include "didgeom/depth_fusion.hpp"
#include "didgeom/error.hpp"
#include "didgeom/random.hpp"

using namespace didgeom;

namespace {

InstancePatch patch_from(const std::vector<double>& d, const std::vector<double>& u,
                         std::vector<std::uint8_t> valid = {}) {
  if (valid.empty()) valid.assign(d.size(), 1);
  std::vector<DepthBelief> vis, att;
  for (std::size_t i = 0; i < d.size(); ++i) {
    vis.emplace_back(d[i], u[i]);
    att.emplace_back(0.0, kMinUncertainty);
  }
  return InstancePatch(1, int(d.size()), std::move(vis), std::move(att), std::move(valid));
}

// Patch whose per-cell probability is p up to the u_min attribute term (~1e-12 relative).
InstancePatch patch_with_prob(const std::vector<double>& d, const std::vector<double>& p) {
  std::vector<double> u;
  for (double x : p) u.push_back(-std::log(x));
  return patch_from(d, u);
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidValue;
}

}  // namespace

TEST_CASE("fuse_cell") {
  const auto f = fusion::fuse_cell({10, 3}, {2, 4});
  CHECK(f.d() == 12.0);
  CHECK(f.u() == 5.0);

  const auto near = fusion::fuse_cell({7.5, 2.0}, {0.0, kMinUncertainty});
  CHECK(near.d() == 7.5);
  CHECK(std::abs(near.u() - 2.0) < 1e-12);

  CHECK(fusion::fuse_cell({1, 0.3}, {2, 1.7}).u() == fusion::fuse_cell({1, 1.7}, {2, 0.3}).u());

  CHECK(code_of([] { DepthBelief(1.0, 0.0); }) == ErrorCode::InvalidUncertainty);
  CHECK(code_of([] { DepthBelief(1.0, -2.0); }) == ErrorCode::InvalidUncertainty);
  CHECK(DepthBelief(1.0, 1e-9).u() == kMinUncertainty);
}

TEST_CASE("uncertainty_to_prob") {
  CHECK(fusion::uncertainty_to_prob(0.0) == 1.0);
  CHECK(std::abs(fusion::uncertainty_to_prob(std::log(2.0)) - 0.5) < 1e-15);
  CHECK(fusion::uncertainty_to_prob(0.2) > fusion::uncertainty_to_prob(0.3));
  CHECK(code_of([] { fusion::uncertainty_to_prob(-0.1); }) == ErrorCode::NegativeUncertainty);
}

TEST_CASE("aggregate_depth") {
  const auto uniform = patch_from({10, 20, 30, 45}, {0.4, 0.4, 0.4, 0.4});
  CHECK(fusion::aggregate_depth(uniform) == (10.0 + 20 + 30 + 45) / 4);

  const auto two = patch_with_prob({10, 20}, {0.6, 0.2});
  CHECK(std::abs(fusion::aggregate_depth(two) - 12.5) < 1e-9);

  const auto single = patch_from({10, 20, 30}, {0.1, 0.2, 0.3}, {0, 1, 0});
  CHECK(fusion::aggregate_depth(single) == 20.0);

  const auto none = patch_from({10, 20}, {0.1, 0.2}, {0, 0});
  CHECK(code_of([&] { fusion::aggregate_depth(none); }) == ErrorCode::NoValidCells);
  CHECK(code_of([&] { fusion::instance_confidence(none); }) == ErrorCode::NoValidCells);

  Rng rng(17);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> d, u;
    for (int i = 0; i < 49; ++i) {
      d.push_back(rng.uniform(5, 60));
      u.push_back(rng.uniform(0.01, 8));
    }
    const auto p = patch_from(d, u);
    const double agg = fusion::aggregate_depth(p);
    CHECK(agg >= *std::min_element(d.begin(), d.end()));
    CHECK(agg <= *std::max_element(d.begin(), d.end()));

    std::vector<double> scaled = d;
    for (auto& x : scaled) x *= 2.5;
    CHECK(std::abs(fusion::aggregate_depth(patch_from(scaled, u)) - 2.5 * agg) <= 1e-12 * agg);
  }
}

TEST_CASE("aggregate survives probabilities that underflow") {
  const auto p = patch_from({10, 30}, {800, 801});
  const double w0 = 1.0, w1 = std::exp(-1.0);
  CHECK(std::abs(fusion::aggregate_depth(p) - (10 * w0 + 30 * w1) / (w0 + w1)) < 1e-12);
}

TEST_CASE("instance_confidence") {
  CHECK(std::abs(fusion::instance_confidence(patch_with_prob({1, 2, 3}, {0.3, 0.3, 0.3})) - 0.3) < 1e-9);
  CHECK(std::abs(fusion::instance_confidence(patch_with_prob({1, 2}, {0.8, 0.4})) - 0.8 / 1.2) < 1e-9);

  const auto same = patch_from({1, 2, 3}, {0.7, 0.7, 0.7});
  CHECK(fusion::instance_confidence(same) == same.probability()[0]);

  Rng rng(23);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> d, u;
    for (int i = 0; i < 12; ++i) {
      d.push_back(rng.uniform(5, 60));
      u.push_back(rng.uniform(0.01, 4));
    }
    const auto p = patch_from(d, u);
    const double conf = fusion::instance_confidence(p);
    const auto& probs = p.probability();
    CHECK(conf >= *std::min_element(probs.begin(), probs.end()) - 1e-15);
    CHECK(conf <= *std::max_element(probs.begin(), probs.end()) + 1e-15);

    auto dd = d, uu = u;
    dd.insert(dd.end(), d.begin(), d.end());
    uu.insert(uu.end(), u.begin(), u.end());
    CHECK(std::abs(fusion::instance_confidence(patch_from(dd, uu)) - conf) < 1e-12);
    std::reverse(d.begin(), d.end());
    std::reverse(u.begin(), u.end());
    CHECK(std::abs(fusion::instance_confidence(patch_from(d, u)) - conf) < 1e-12);
  }
}

TEST_CASE("final_score") {
  CHECK(fusion::final_score(1.0, 0.7) == 0.7);
  CHECK(fusion::final_score(0.0, 0.4) == 0.0);
  CHECK(fusion::final_score(0.9, 0.5) == 0.45);
  CHECK(code_of([] { fusion::final_score(1.2, 0.5); }) == ErrorCode::OutOfRange);
  CHECK(code_of([] { fusion::final_score(0.5, 0.0); }) == ErrorCode::OutOfRange);
}

TEST_CASE("uncertainty summary over valid cells") {
  std::vector<DepthBelief> vis{{10, 3}, {11, 6}, {12, 1}}, att{{1, 4}, {1, 8}, {1, 1}};
  const InstancePatch p(1, 3, vis, att, {1, 1, 0});
  const auto s = fusion::summarize_uncertainty(p);
  CHECK(s.min == 5.0);
  CHECK(s.max == 10.0);
  CHECK(s.mean == 7.5);
}

TEST_CASE("laplace loss values and gradients") {
  CHECK(fusion::laplace_nll(3.0, 1.0, 3.0) == 0.0);
  CHECK(fusion::laplace_nll_grad(3.0, 1.0, 3.0).d_u == 1.0);
  CHECK(fusion::laplace_nll_grad(3.0, 1.0, 3.0).d_d == 0.0);
  CHECK(std::abs(fusion::laplace_nll(4.0, 1.0, 3.0) - std::sqrt(2.0)) < 1e-15);
  CHECK(code_of([] { fusion::laplace_nll(1, 0, 1); }) == ErrorCode::InvalidUncertainty);

  Rng rng(41);
  const double h = 1e-6;
  for (int i = 0; i < 1000; ++i) {
    const double target = rng.uniform(1, 60);
    double d = rng.uniform(1, 60);
    if (std::abs(d - target) < 1e-3) d = target + 0.5;
    const double u = rng.uniform(0.05, 5);
    const auto g = fusion::laplace_nll_grad(d, u, target);
    const double fd_d = (fusion::laplace_nll(d + h, u, target) - fusion::laplace_nll(d - h, u, target)) / (2 * h);
    const double fd_u = (fusion::laplace_nll(d, u + h, target) - fusion::laplace_nll(d, u - h, target)) / (2 * h);
    CHECK(std::abs(g.d_d - fd_d) <= 1e-5 * std::max(1.0, std::abs(fd_d)));
    CHECK(std::abs(g.d_u - fd_u) <= 1e-5 * std::max(1.0, std::abs(fd_u)));

    // minimiser over u
    const double u_star = std::sqrt(2.0) * std::abs(d - target);
    CHECK(std::abs(fusion::laplace_nll_grad(d, u_star, target).d_u) <= 1e-12);
    CHECK(fusion::laplace_nll(d, u_star, target) <= fusion::laplace_nll(d, u_star * 1.01, target));
    CHECK(fusion::laplace_nll(d, u_star, target) <= fusion::laplace_nll(d, u_star * 0.99, target));
    // minimiser over d
    CHECK(fusion::laplace_nll(target, u, target) < fusion::laplace_nll(d, u, target));
  }
}

TEST_CASE("smooth L1") {
  CHECK(fusion::smooth_l1(0.0) == 0.0);
  CHECK(fusion::smooth_l1(1.0) == 0.5);
  CHECK(fusion::smooth_l1(0.5, 0.5) == 0.25);
  CHECK(std::abs(fusion::smooth_l1(0.5 - 1e-9, 0.5) - 0.25) < 1e-8);
  CHECK(fusion::smooth_l1(-3.0, 2.0) == 2.0);

  Rng rng(42);
  const double h = 1e-6;
  for (int i = 0; i < 1000; ++i) {
    const double beta = rng.uniform(0.1, 2);
    double x = rng.uniform(-5, 5);
    if (std::abs(std::abs(x) - beta) < 1e-3) x += 0.01;
    const double fd = (fusion::smooth_l1(x + h, beta) - fusion::smooth_l1(x - h, beta)) / (2 * h);
    CHECK(std::abs(fusion::smooth_l1_grad(x, beta) - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("gradient_check report") {
  const auto r = fusion::gradient_check(1000, 9);
  CHECK(r.samples == 1000);
  CHECK(r.max_rel_error() <= 1e-5);
  CHECK(r.max_abs_grad_at_optimum <= 1e-12);
}
