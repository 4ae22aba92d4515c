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

#ifndef IVSID_METRICS_HPP
#define IVSID_METRICS_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ivsid/interval_model.hpp"
#include "ivsid/model.hpp"

namespace ivsid::metrics {

double rmse(std::span<const double> pred, std::span<const double> target);

// Percent of targets falling inside their bounds, bounds inclusive.
double picp(std::span<const double> lower, std::span<const double> upper,
            std::span<const double> target);

// Percent mean width normalized by the target range (max - min > 0 required).
double pinaw(std::span<const double> lower, std::span<const double> upper,
             std::span<const double> target);
double pinaw_with_range(std::span<const double> lower,
                        std::span<const double> upper, double target_range);

enum class ElasticityGranularity { PerEntry, PerTensor };

// Per-parameter uncertainty ratio: interval width over crisp magnitude.
// Entries whose crisp magnitude vanishes are guarded by eps and flagged.
struct ElasticityMap {
  std::string name;
  Tensor values;  // per-entry grid, or 1 x 1 for per-tensor granularity
  std::vector<std::pair<int, int>> flagged;
};

std::vector<ElasticityMap> elasticity(const model::ModelParams& crisp,
                                      const ivmodel::IntervalModel& ivm,
                                      ElasticityGranularity granularity,
                                      double eps = 1e-12);

struct SeedMetrics {
  uint64_t seed;
  double rmse;
  double picp;
  double pinaw;
};

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};

struct UQReport {
  std::string dataset;
  std::string variant;
  double alpha = 0.0;
  std::vector<SeedMetrics> per_seed;
  MeanStd rmse, picp, pinaw;
  int n_seeds = 0;
};

// Mean and sample standard deviation (n-1 denominator, 0 when n == 1) of the
// per-seed metrics.
UQReport aggregate(const std::string& dataset, const std::string& variant,
                   double alpha, const std::vector<SeedMetrics>& seeds);

// CSV heatmap grid: rows are output units, columns input units.
void write_elasticity_csv(std::ostream& os, const ElasticityMap& m);

// Per-seed (picp - 100*alpha, pinaw) pairs for box-plot rendering.
void write_boxplot_csv(std::ostream& os, const UQReport& r);

// Minimal SVG rendering of an elasticity grid.
std::string render_heatmap_svg(const ElasticityMap& m, int cell = 12);

}  // namespace ivsid::metrics

#endif  // IVSID_METRICS_HPP
