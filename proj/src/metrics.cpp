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

#include "ivsid/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace ivsid::metrics {

namespace {

void check_lengths(size_t a, size_t b, const char* what) {
  if (a != b)
    throw std::invalid_argument(std::string(what) + ": length mismatch " +
                                std::to_string(a) + " vs " +
                                std::to_string(b));
  if (a == 0)
    throw std::invalid_argument(std::string(what) + ": empty sequences");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double rmse(std::span<const double> pred, std::span<const double> target) {
  check_lengths(pred.size(), target.size(), "rmse");
  double sum = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(pred.size()));
}

double picp(std::span<const double> lower, std::span<const double> upper,
            std::span<const double> target) {
  check_lengths(lower.size(), target.size(), "picp");
  check_lengths(upper.size(), target.size(), "picp");
  long long inside = 0;
  for (size_t i = 0; i < target.size(); ++i)
    if (lower[i] <= target[i] && target[i] <= upper[i]) ++inside;
  return 100.0 * static_cast<double>(inside) /
         static_cast<double>(target.size());
}

double pinaw_with_range(std::span<const double> lower,
                        std::span<const double> upper, double target_range) {
  check_lengths(lower.size(), upper.size(), "pinaw");
  if (!(target_range > 0.0))
    throw std::invalid_argument("pinaw: target range must be positive");
  double sum = 0.0;
  for (size_t i = 0; i < lower.size(); ++i) sum += upper[i] - lower[i];
  return 100.0 * (sum / static_cast<double>(lower.size())) / target_range;
}

double pinaw(std::span<const double> lower, std::span<const double> upper,
             std::span<const double> target) {
  check_lengths(lower.size(), target.size(), "pinaw");
  const auto [mn, mx] = std::minmax_element(target.begin(), target.end());
  return pinaw_with_range(lower, upper, *mx - *mn);
}

std::vector<ElasticityMap> elasticity(const model::ModelParams& crisp,
                                      const ivmodel::IntervalModel& ivm,
                                      ElasticityGranularity granularity,
                                      double eps) {
  if (crisp.kind != ivm.kind)
    throw std::invalid_argument("elasticity: model kind mismatch");
  std::vector<const Tensor*> crisp_tensors;
  model::for_each_param(crisp, [&](const std::string&, const Tensor& t, bool,
                                   bool) { crisp_tensors.push_back(&t); });
  std::vector<ElasticityMap> maps;
  size_t i = 0;
  ivmodel::for_each_iv_param(ivm, [&](const std::string& name,
                                      const ivmodel::IntervalMatrix& im) {
    if (i >= crisp_tensors.size())
      throw std::invalid_argument("elasticity: tensor count mismatch");
    const Tensor& theta = *crisp_tensors[i++];
    if (theta.rows != im.rows() || theta.cols != im.cols())
      throw std::invalid_argument("elasticity: shape mismatch for " + name);
    ElasticityMap m;
    m.name = name;
    if (granularity == ElasticityGranularity::PerEntry) {
      m.values = Tensor(theta.rows, theta.cols);
      for (int r = 0; r < theta.rows; ++r)
        for (int c = 0; c < theta.cols; ++c) {
          const double width = im.hi(r, c) - im.lo(r, c);
          const double mag = std::fabs(theta(r, c));
          m.values(r, c) = width / (mag + eps);
          if (mag < eps && width > 0.0) m.flagged.emplace_back(r, c);
        }
    } else {
      double wsq = 0.0, tsq = 0.0;
      for (int r = 0; r < theta.rows; ++r)
        for (int c = 0; c < theta.cols; ++c) {
          const double width = im.hi(r, c) - im.lo(r, c);
          wsq += width * width;
          tsq += theta(r, c) * theta(r, c);
        }
      const double wn = std::sqrt(wsq);
      const double tn = std::sqrt(tsq);
      m.values = Tensor(1, 1);
      m.values(0, 0) = wn / (tn + eps);
      if (tn < eps && wn > 0.0) m.flagged.emplace_back(0, 0);
    }
    maps.push_back(std::move(m));
  });
  return maps;
}

UQReport aggregate(const std::string& dataset, const std::string& variant,
                   double alpha, const std::vector<SeedMetrics>& seeds) {
  if (seeds.empty())
    throw std::invalid_argument("aggregate: need at least one seed report");
  UQReport r;
  r.dataset = dataset;
  r.variant = variant;
  r.alpha = alpha;
  r.per_seed = seeds;
  r.n_seeds = static_cast<int>(seeds.size());
  auto stat = [&](auto get) {
    MeanStd ms;
    for (const auto& s : seeds) ms.mean += get(s);
    ms.mean /= seeds.size();
    if (seeds.size() > 1) {
      double acc = 0.0;
      for (const auto& s : seeds) {
        const double d = get(s) - ms.mean;
        acc += d * d;
      }
      ms.stddev = std::sqrt(acc / (seeds.size() - 1));
    }
    return ms;
  };
  r.rmse = stat([](const SeedMetrics& s) { return s.rmse; });
  r.picp = stat([](const SeedMetrics& s) { return s.picp; });
  r.pinaw = stat([](const SeedMetrics& s) { return s.pinaw; });
  return r;
}

void write_elasticity_csv(std::ostream& os, const ElasticityMap& m) {
  for (int r = 0; r < m.values.rows; ++r) {
    for (int c = 0; c < m.values.cols; ++c) {
      if (c > 0) os << ',';
      os << fmt(m.values(r, c));
    }
    os << '\n';
  }
}

void write_boxplot_csv(std::ostream& os, const UQReport& r) {
  os << "seed,picp_minus_target,pinaw\n";
  for (const auto& s : r.per_seed)
    os << s.seed << ',' << fmt(s.picp - 100.0 * r.alpha) << ','
       << fmt(s.pinaw) << '\n';
}

std::string render_heatmap_svg(const ElasticityMap& m, int cell) {
  const int w = m.values.cols * cell;
  const int h = m.values.rows * cell;
  double vmax = 0.0;
  for (size_t i = 0; i < m.values.size(); ++i)
    vmax = std::max(vmax, m.values[i]);
  if (vmax <= 0.0) vmax = 1.0;
  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
      std::to_string(w) + "\" height=\"" + std::to_string(h) + "\">\n";
  for (int r = 0; r < m.values.rows; ++r)
    for (int c = 0; c < m.values.cols; ++c) {
      const double t = std::min(1.0, m.values(r, c) / vmax);
      const int red = static_cast<int>(255 * t);
      const int blue = static_cast<int>(255 * (1.0 - t));
      svg += "<rect x=\"" + std::to_string(c * cell) + "\" y=\"" +
             std::to_string(r * cell) + "\" width=\"" + std::to_string(cell) +
             "\" height=\"" + std::to_string(cell) + "\" fill=\"rgb(" +
             std::to_string(red) + ",0," + std::to_string(blue) + ")\"/>\n";
    }
  svg += "</svg>\n";
  return svg;
}

}  // namespace ivsid::metrics
