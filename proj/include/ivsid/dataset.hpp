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

#ifndef IVSID_DATASET_HPP
#define IVSID_DATASET_HPP

#include <algorithm>
#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ivsid/tensor.hpp"

namespace ivsid::data {

enum class NormMethod { None, ZScore, MinMax };

NormMethod norm_method_from_string(const std::string& s);
const char* norm_method_name(NormMethod m);

// Per-channel normalization statistics. For z-score a/b are mean/std, for
// min-max they are min/max of the fitting prefix.
struct ChannelStats {
  double a = 0.0;
  double b = 1.0;
};

struct NormInfo {
  NormMethod method = NormMethod::None;
  ChannelStats u;
  ChannelStats y;
  int fit_prefix = 0;  // samples the statistics were fitted on
};

double normalize_value(NormMethod m, const ChannelStats& s, double v);
double denormalize_value(NormMethod m, const ChannelStats& s, double v);

// Single-input single-output series. Normalization, when applied, is
// recorded so predictions can be mapped back to original units.
struct SeriesDataset {
  std::string name;
  std::vector<double> u;
  std::vector<double> y;
  std::optional<NormInfo> norm;

  int length() const { return static_cast<int>(u.size()); }
};

// Input/output lag structure of the regressor
// x(k) = [u(k-n_d), ..., u(k-n_d-n_x), y(k-1), ..., y(k-n_y)].
struct RegressorSpec {
  int n_x = 0;  // input lag count
  int n_d = 0;  // dead time
  int n_y = 1;  // output lag count (models are recurrent in y)

  int input_size() const { return n_x + 1 + n_y; }
  // Steps at the start of a window whose lags cannot all be built; those
  // positions carry ground-truth seeds instead of predictions.
  int warmup() const { return std::max(n_d + n_x, n_y); }
  void validate() const;
};

// B x N trajectory matrices; row m is the contiguous slice starting at
// sample m of the source split.
struct WindowedBatch {
  Tensor u;  // B x N
  Tensor y;  // B x N
  int window() const { return u.cols; }
  int count() const { return u.rows; }
};

SeriesDataset load_csv(const std::string& path, const std::string& u_column,
                       const std::string& y_column,
                       const std::string& name = "");

// Fit statistics on the first `prefix` samples only, then transform the
// whole series.
SeriesDataset normalize_with_prefix(const SeriesDataset& ds, NormMethod m,
                                    int prefix);
SeriesDataset normalize(const SeriesDataset& ds, NormMethod m,
                        double train_fraction);

struct SplitSizes {
  int train = 0, val = 0, test = 0;
};
// Integer percentages summing to 100; chronological contiguous segments.
SplitSizes split_sizes(int total, const std::array<int, 3>& percent);
std::array<SeriesDataset, 3> split(const SeriesDataset& ds,
                                   const std::array<int, 3>& percent);

WindowedBatch window(const SeriesDataset& ds, int n);

// Where each regressor entry of step k (0-based within a window) comes from.
struct LagSource {
  bool from_u;
  int t;  // source time index within the window
};
std::vector<LagSource> regressor_sources(const RegressorSpec& spec, int k);

std::vector<double> build_regressor(std::span<const double> u,
                                    std::span<const double> y, int k,
                                    const RegressorSpec& spec);

}  // namespace ivsid::data

#endif  // IVSID_DATASET_HPP
