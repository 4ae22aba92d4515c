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

#include "ivsid/dataset.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ivsid::data {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim surrounding whitespace
    size_t b = cell.find_first_not_of(" \t\r");
    size_t e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_cell(const std::string& cell, const std::string& column,
                  int line_no) {
  const char* s = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(s, &end);
  if (end == s || *end != '\0' || !std::isfinite(v))
    throw std::invalid_argument("csv: non-numeric value '" + cell +
                             "' in column '" + column + "' at line " +
                             std::to_string(line_no));
  return v;
}

}  // namespace

NormMethod norm_method_from_string(const std::string& s) {
  if (s == "z-score") return NormMethod::ZScore;
  if (s == "min-max") return NormMethod::MinMax;
  if (s == "none") return NormMethod::None;
  throw std::invalid_argument("unknown normalization method '" + s + "'");
}

const char* norm_method_name(NormMethod m) {
  switch (m) {
    case NormMethod::None: return "none";
    case NormMethod::ZScore: return "z-score";
    case NormMethod::MinMax: return "min-max";
  }
  throw std::invalid_argument("unknown normalization method");
}

double normalize_value(NormMethod m, const ChannelStats& s, double v) {
  switch (m) {
    case NormMethod::None: return v;
    case NormMethod::ZScore: return (v - s.a) / s.b;
    case NormMethod::MinMax: return (v - s.a) / (s.b - s.a);
  }
  throw std::invalid_argument("unknown normalization method");
}

double denormalize_value(NormMethod m, const ChannelStats& s, double v) {
  switch (m) {
    case NormMethod::None: return v;
    case NormMethod::ZScore: return v * s.b + s.a;
    case NormMethod::MinMax: return v * (s.b - s.a) + s.a;
  }
  throw std::invalid_argument("unknown normalization method");
}

void RegressorSpec::validate() const {
  if (n_x < 0 || n_d < 0 || n_y < 1)
    throw std::invalid_argument(
        "regressor: lags must satisfy n_x >= 0, n_d >= 0, n_y >= 1");
}

SeriesDataset load_csv(const std::string& path, const std::string& u_column,
                       const std::string& y_column, const std::string& name) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("csv: cannot open file '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("csv: empty file '" + path + "'");
  const auto header = split_line(line);
  int u_idx = -1, y_idx = -1;
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == u_column) u_idx = static_cast<int>(i);
    if (header[i] == y_column) y_idx = static_cast<int>(i);
  }
  if (u_idx < 0)
    throw std::invalid_argument("csv: column '" + u_column + "' not found in '" +
                             path + "'");
  if (y_idx < 0)
    throw std::invalid_argument("csv: column '" + y_column + "' not found in '" +
                             path + "'");

  SeriesDataset ds;
  ds.name = name.empty() ? path : name;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_line(line);
    if (static_cast<int>(cells.size()) <= std::max(u_idx, y_idx))
      throw std::invalid_argument("csv: too few cells at line " +
                               std::to_string(line_no));
    ds.u.push_back(parse_cell(cells[u_idx], u_column, line_no));
    ds.y.push_back(parse_cell(cells[y_idx], y_column, line_no));
  }
  if (ds.length() < 2)
    throw std::invalid_argument("csv: need at least 2 samples, got " +
                             std::to_string(ds.length()));
  return ds;
}

namespace {

ChannelStats fit_channel(NormMethod m, std::span<const double> v, int prefix,
                         const char* channel) {
  ChannelStats s;
  if (m == NormMethod::None) return s;
  if (m == NormMethod::ZScore) {
    double mean = 0.0;
    for (int i = 0; i < prefix; ++i) mean += v[i];
    mean /= prefix;
    double var = 0.0;
    for (int i = 0; i < prefix; ++i) var += (v[i] - mean) * (v[i] - mean);
    var /= prefix;
    const double sd = std::sqrt(var);
    if (sd <= 0.0)
      throw std::invalid_argument(std::string("normalize: zero variance in ") +
                               channel + " channel on training prefix");
    s.a = mean;
    s.b = sd;
    return s;
  }
  double lo = v[0], hi = v[0];
  for (int i = 1; i < prefix; ++i) {
    lo = std::min(lo, v[i]);
    hi = std::max(hi, v[i]);
  }
  if (hi <= lo)
    throw std::invalid_argument(std::string("normalize: zero range in ") +
                             channel + " channel on training prefix");
  s.a = lo;
  s.b = hi;
  return s;
}

}  // namespace

SeriesDataset normalize_with_prefix(const SeriesDataset& ds, NormMethod m,
                                    int prefix) {
  if (prefix < 1 || prefix > ds.length())
    throw std::invalid_argument("normalize: prefix out of range");
  SeriesDataset out = ds;
  NormInfo info;
  info.method = m;
  info.fit_prefix = prefix;
  info.u = fit_channel(m, ds.u, prefix, "u");
  info.y = fit_channel(m, ds.y, prefix, "y");
  for (auto& v : out.u) v = normalize_value(m, info.u, v);
  for (auto& v : out.y) v = normalize_value(m, info.y, v);
  out.norm = info;
  return out;
}

SeriesDataset normalize(const SeriesDataset& ds, NormMethod m,
                        double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("normalize: train fraction must be in (0,1)");
  const int prefix =
      static_cast<int>(std::floor(train_fraction * ds.length() + 1e-9));
  return normalize_with_prefix(ds, m, prefix);
}

SplitSizes split_sizes(int total, const std::array<int, 3>& percent) {
  for (int p : percent)
    if (p <= 0) throw std::invalid_argument("split: fractions must be positive");
  if (percent[0] + percent[1] + percent[2] != 100)
    throw std::invalid_argument("split: fractions must sum to 100, got " +
                                std::to_string(percent[0] + percent[1] +
                                               percent[2]));
  SplitSizes s;
  s.train = static_cast<int>(static_cast<long long>(total) * percent[0] / 100);
  s.val = static_cast<int>(static_cast<long long>(total) * percent[1] / 100);
  s.test = total - s.train - s.val;
  return s;
}

std::array<SeriesDataset, 3> split(const SeriesDataset& ds,
                                   const std::array<int, 3>& percent) {
  const SplitSizes s = split_sizes(ds.length(), percent);
  auto slice = [&](int offset, int count, const char* tag) {
    SeriesDataset part;
    part.name = ds.name + "/" + tag;
    part.norm = ds.norm;
    part.u.assign(ds.u.begin() + offset, ds.u.begin() + offset + count);
    part.y.assign(ds.y.begin() + offset, ds.y.begin() + offset + count);
    return part;
  };
  return {slice(0, s.train, "train"), slice(s.train, s.val, "val"),
          slice(s.train + s.val, s.test, "test")};
}

WindowedBatch window(const SeriesDataset& ds, int n) {
  const int total = ds.length();
  if (n < 1) throw std::invalid_argument("window: length must be positive");
  if (n >= total)
    throw std::invalid_argument(
        "window: length N=" + std::to_string(n) +
        " must be smaller than the series length K=" + std::to_string(total));
  const int b = total - n;
  WindowedBatch wb{Tensor(b, n), Tensor(b, n)};
  for (int i = 0; i < b; ++i)
    for (int j = 0; j < n; ++j) {
      wb.u(i, j) = ds.u[i + j];
      wb.y(i, j) = ds.y[i + j];
    }
  return wb;
}

std::vector<LagSource> regressor_sources(const RegressorSpec& spec, int k) {
  spec.validate();
  std::vector<LagSource> src;
  src.reserve(spec.input_size());
  for (int j = 0; j <= spec.n_x; ++j)
    src.push_back({true, k - spec.n_d - j});
  for (int j = 1; j <= spec.n_y; ++j) src.push_back({false, k - j});
  return src;
}

std::vector<double> build_regressor(std::span<const double> u,
                                    std::span<const double> y, int k,
                                    const RegressorSpec& spec) {
  const auto src = regressor_sources(spec, k);
  std::vector<double> x;
  x.reserve(src.size());
  for (const auto& s : src) {
    const auto& seq = s.from_u ? u : y;
    if (s.t < 0 || s.t >= static_cast<int>(seq.size()))
      throw std::invalid_argument(
          "regressor: insufficient history at step " + std::to_string(k));
    x.push_back(seq[s.t]);
  }
  return x;
}

}  // namespace ivsid::data
