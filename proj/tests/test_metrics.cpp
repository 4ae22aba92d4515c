/*
 * Copyright 2025 The ivsid Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ivsid/metrics.hpp"
#include "ivsid/uq.hpp"
#include "testutil.hpp"

using namespace ivsid;
using interval::Activation;

TEST_CASE("rmse closed forms") {
  const std::vector<double> a = {1, 2, 3};
  CHECK(metrics::rmse(a, a) == 0.0);

  const std::vector<double> shifted = {1.5, 2.5, 3.5};
  CHECK(metrics::rmse(shifted, a) == doctest::Approx(0.5).epsilon(1e-15));

  const std::vector<double> p = {1, 2}, t = {3, 2};
  CHECK(metrics::rmse(p, t) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

  CHECK_THROWS_AS(metrics::rmse(p, a), std::invalid_argument);
}

TEST_CASE("coverage counts inclusive bounds") {
  const std::vector<double> lower = {0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  const std::vector<double> upper = {1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
  std::vector<double> target(10, 0.5);
  CHECK(metrics::picp(lower, upper, target) == 100.0);

  target[3] = 7.0;  // one escape
  CHECK(metrics::picp(lower, upper, target) == 90.0);

  // bounds inclusive
  target = std::vector<double>(10, 1.0);
  CHECK(metrics::picp(lower, upper, target) == 100.0);

  // degenerate bands miss everything off-center
  const std::vector<double> deg(10, 0.25);
  std::vector<double> off(10, 0.3);
  CHECK(metrics::picp(deg, deg, off) == 0.0);
  CHECK(metrics::picp(deg, deg, deg) == 100.0);
}

TEST_CASE("normalized width ratios") {
  SUBCASE("constant width against a doubled range") {
    const std::vector<double> lower = {0, 1, 2};
    const std::vector<double> upper = {1, 2, 3};  // width 1 everywhere
    const std::vector<double> target = {0, 2, 1};  // range 2
    CHECK(metrics::pinaw(lower, upper, target) == 50.0);
  }
  SUBCASE("degenerate bands have zero width") {
    const std::vector<double> x = {1, 2, 3};
    const std::vector<double> target = {0, 4, 2};
    CHECK(metrics::pinaw(x, x, target) == 0.0);
  }
  SUBCASE("mean width over the range") {
    const std::vector<double> lower = {0, 0};
    const std::vector<double> upper = {1, 3};  // widths 1 and 3
    CHECK(metrics::pinaw_with_range(lower, upper, 4.0) == 50.0);
  }
  SUBCASE("zero range is rejected") {
    const std::vector<double> x = {1, 2};
    const std::vector<double> flat = {5, 5};
    CHECK_THROWS_AS(metrics::pinaw(x, x, flat), std::invalid_argument);
  }
  SUBCASE("widths and range are shift invariant") {
    Rng rng(1);
    std::vector<double> lower, upper, target;
    for (int i = 0; i < 50; ++i) {
      const auto iv = testutil::random_interval(rng);
      lower.push_back(iv.lo);
      upper.push_back(iv.hi);
      target.push_back(rng.uniform(-3, 3));
    }
    const double base = metrics::pinaw(lower, upper, target);
    const double c = 17.5;
    for (auto& v : lower) v += c;
    for (auto& v : upper) v += c;
    for (auto& v : target) v += c;
    CHECK(metrics::pinaw(lower, upper, target) ==
          doctest::Approx(base).epsilon(1e-9));
  }
}

TEST_CASE("elasticity ratios per parameter") {
  Rng rng(2);
  model::ModelParams p = model::make_node(data::RegressorSpec{0, 0, 1}, {3},
                                          Activation::Tanh, rng);

  SUBCASE("hand case: width one around magnitude two") {
    p.dense[0].W(0, 0) = 2.0;
    auto d = ivmodel::zero_delta(p, ivmodel::TrickKind::Abs);
    d.raw_lo[0](0, 0) = 0.5;
    d.raw_hi[0](0, 0) = 0.5;  // interval [1.5, 2.5]
    const auto maps = metrics::elasticity(
        p, ivmodel::wrap(p, d), metrics::ElasticityGranularity::PerEntry);
    CHECK(maps[0].values(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(maps[0].flagged.empty());
  }
  SUBCASE("zero radii give zero everywhere") {
    const auto maps = metrics::elasticity(
        p, ivmodel::wrap(p, ivmodel::zero_delta(p, ivmodel::TrickKind::Abs)),
        metrics::ElasticityGranularity::PerEntry);
    for (const auto& m : maps)
      for (size_t e = 0; e < m.values.size(); ++e) CHECK(m.values[e] == 0.0);
  }
  SUBCASE("vanishing crisp magnitude is guarded and flagged") {
    p.dense[0].W(1, 0) = 0.0;
    auto d = ivmodel::zero_delta(p, ivmodel::TrickKind::Abs);
    d.raw_lo[0](1, 0) = 0.25;
    d.raw_hi[0](1, 0) = 0.25;
    const auto maps = metrics::elasticity(
        p, ivmodel::wrap(p, d), metrics::ElasticityGranularity::PerEntry);
    CHECK(std::isfinite(maps[0].values(1, 0)));
    CHECK(maps[0].values(1, 0) > 1.0);
    REQUIRE(maps[0].flagged.size() == 1);
    CHECK(maps[0].flagged[0] == std::pair<int, int>{1, 0});
  }
  SUBCASE("per-entry ratios are invariant to joint scaling") {
    Rng r2(3);
    model::ModelParams q = model::make_node(data::RegressorSpec{0, 0, 1}, {3},
                                            Activation::Tanh, r2);
    auto d = ivmodel::zero_delta(q, ivmodel::TrickKind::Abs);
    for (auto& t : d.raw_lo) r2.fill_uniform(t, 0.05, 0.5);
    for (auto& t : d.raw_hi) r2.fill_uniform(t, 0.05, 0.5);
    const auto base = metrics::elasticity(
        q, ivmodel::wrap(q, d), metrics::ElasticityGranularity::PerEntry);

    const double c = -3.0;
    model::ModelParams scaled = q;
    model::for_each_param(scaled, [&](const std::string&, Tensor& t, bool,
                                      bool) {
      for (auto& v : t.a) v *= c;
    });
    auto ds = d;
    for (auto& t : ds.raw_lo)
      for (auto& v : t.a) v *= std::fabs(c);
    for (auto& t : ds.raw_hi)
      for (auto& v : t.a) v *= std::fabs(c);
    const auto after = metrics::elasticity(
        scaled, ivmodel::wrap(scaled, ds),
        metrics::ElasticityGranularity::PerEntry);
    for (size_t m = 0; m < base.size(); ++m)
      for (size_t e = 0; e < base[m].values.size(); ++e)
        CHECK(after[m].values[e] ==
              doctest::Approx(base[m].values[e]).epsilon(1e-9));
  }
  SUBCASE("per-tensor granularity emits norm ratios") {
    auto d = ivmodel::zero_delta(p, ivmodel::TrickKind::Abs);
    const auto maps = metrics::elasticity(
        p, ivmodel::wrap(p, d), metrics::ElasticityGranularity::PerTensor);
    for (const auto& m : maps) {
      CHECK(m.values.rows == 1);
      CHECK(m.values.cols == 1);
      CHECK(m.values(0, 0) == 0.0);
    }
  }
}

TEST_CASE("heatmap csv shapes echo the tensor shapes") {
  Rng rng(4);
  model::ModelParams p = model::make_node(data::RegressorSpec{1, 0, 2}, {4},
                                          Activation::Tanh, rng);
  auto d = ivmodel::zero_delta(p, ivmodel::TrickKind::Abs);
  const auto maps = metrics::elasticity(
      p, ivmodel::wrap(p, d), metrics::ElasticityGranularity::PerEntry);
  std::vector<std::pair<int, int>> shapes;
  model::for_each_param(p, [&](const std::string&, const Tensor& t, bool,
                               bool) { shapes.emplace_back(t.rows, t.cols); });
  REQUIRE(maps.size() == shapes.size());
  for (size_t i = 0; i < maps.size(); ++i) {
    std::ostringstream ss;
    metrics::write_elasticity_csv(ss, maps[i]);
    std::istringstream in(ss.str());
    std::string line;
    int rows = 0, cols = -1;
    while (std::getline(in, line)) {
      ++rows;
      const int commas =
          static_cast<int>(std::count(line.begin(), line.end(), ','));
      if (cols < 0) cols = commas + 1;
      CHECK(cols == commas + 1);
    }
    CHECK(rows == shapes[i].first);
    CHECK(cols == shapes[i].second);
  }
}

TEST_CASE("aggregation over seeds") {
  using metrics::SeedMetrics;
  SUBCASE("single seed keeps zero deviation and is flagged by count") {
    const auto r = metrics::aggregate("ds", "inode2", 0.9,
                                      {SeedMetrics{7, 1.0, 90.0, 12.0}});
    CHECK(r.n_seeds == 1);
    CHECK(r.picp.mean == 90.0);
    CHECK(r.picp.stddev == 0.0);
  }
  SUBCASE("constant values have zero deviation") {
    std::vector<SeedMetrics> seeds;
    for (uint64_t s = 1; s <= 3; ++s)
      seeds.push_back(SeedMetrics{s, 1.0, 90.0, 10.0});
    const auto r = metrics::aggregate("ds", "inode2", 0.9, seeds);
    CHECK(r.picp.mean == 90.0);
    CHECK(r.picp.stddev == 0.0);
  }
  SUBCASE("two-point sample deviation") {
    const auto r = metrics::aggregate(
        "ds", "ilstm1", 0.9,
        {SeedMetrics{1, 1.0, 88.0, 10.0}, SeedMetrics{2, 1.0, 92.0, 14.0}});
    CHECK(r.picp.mean == 90.0);
    CHECK(r.picp.stddev == doctest::Approx(2.8284271247461903).epsilon(1e-12));
    CHECK(r.pinaw.mean == 12.0);
  }
  SUBCASE("identical reports aggregate to themselves") {
    std::vector<SeedMetrics> seeds(4, SeedMetrics{1, 0.5, 91.0, 11.0});
    const auto r = metrics::aggregate("ds", "inode1", 0.95, seeds);
    CHECK(r.rmse.mean == 0.5);
    CHECK(r.picp.mean == 91.0);
    CHECK(r.pinaw.mean == 11.0);
  }
  SUBCASE("empty input is rejected") {
    CHECK_THROWS_AS(metrics::aggregate("ds", "x", 0.9, {}),
                    std::invalid_argument);
  }
}

TEST_CASE("box-plot rows carry the coverage gap") {
  const auto r = metrics::aggregate(
      "ds", "inode2", 0.9,
      {metrics::SeedMetrics{1, 1.0, 92.5, 10.0},
       metrics::SeedMetrics{2, 1.0, 88.0, 12.0}});
  std::ostringstream ss;
  metrics::write_boxplot_csv(ss, r);
  CHECK(ss.str().find("seed,picp_minus_target,pinaw") == 0);
  CHECK(ss.str().find("1,2.5,10") != std::string::npos);
  CHECK(ss.str().find("2,-2,12") != std::string::npos);
}

TEST_CASE("svg heatmaps carry one cell per entry") {
  metrics::ElasticityMap m;
  m.name = "w";
  m.values = Tensor(2, 3, {0.1, 0.5, 1.0, 0.0, 0.25, 0.75});
  const std::string svg = metrics::render_heatmap_svg(m);
  size_t rects = 0, at = 0;
  while ((at = svg.find("<rect", at)) != std::string::npos) {
    ++rects;
    at += 5;
  }
  CHECK(rects == 6);
}
