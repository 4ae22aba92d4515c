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

#ifndef IVSID_CONFIG_HPP
#define IVSID_CONFIG_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ivsid/dataset.hpp"
#include "ivsid/model.hpp"

namespace ivsid::config {

struct DatasetBlock {
  std::string name;
  std::string csv;
  std::string u_column = "u";
  std::string y_column = "y";
  data::NormMethod normalization = data::NormMethod::ZScore;
  std::array<int, 3> split = {40, 10, 50};
  int window = 30;
};

struct ModelBlock {
  model::ModelKind kind = model::ModelKind::Node;
  std::vector<int> hidden;
  interval::Activation activation = interval::Activation::Tanh;
  data::RegressorSpec regressor;
};

struct CrispBlock {
  int epochs = 300;
  int batch = 64;
  double lr = 1e-3;
};

struct UqBlock {
  std::vector<double> alphas = {0.90, 0.95};
  double lambda = 0.1;
  double r_h = 0.2;
  double r_o = 1.0;
  int epochs = 200;
  int batch = 64;
  double lr = 1e-3;
  bool freeze_recurrent = false;
};

struct ExperimentConfig {
  DatasetBlock dataset;
  ModelBlock model;
  CrispBlock train;
  UqBlock uq;
  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string output_dir = "out";
};

// Strict parse: unknown keys are rejected, the referenced CSV must exist.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json(const nlohmann::json& j,
                                  bool check_paths = true);
nlohmann::json config_to_json(const ExperimentConfig& c);

}  // namespace ivsid::config

#endif  // IVSID_CONFIG_HPP
