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

#ifndef IVSID_CHECKPOINT_HPP
#define IVSID_CHECKPOINT_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "ivsid/dataset.hpp"
#include "ivsid/interval_model.hpp"
#include "ivsid/model.hpp"

namespace ivsid::ckpt {

std::string sha256_hex(const std::string& bytes);
std::string file_sha256(const std::string& path);

struct CrispCheckpoint {
  model::ModelParams params;
  std::optional<data::NormInfo> norm;
  std::string dataset;
  uint64_t seed = 0;
};

void save_crisp(const std::string& path, const CrispCheckpoint& c);
CrispCheckpoint load_crisp(const std::string& path);

struct InnCheckpoint {
  ivmodel::DeltaParams delta;
  std::string crisp_sha256;
  std::string crisp_path;  // hint only; the hash is authoritative
  double alpha = 0.0;
  double lambda = 0.0;
  double r_h = 0.0;
  double r_o = 0.0;
  uint64_t seed = 0;
};

void save_inn(const std::string& path, const InnCheckpoint& c);
InnCheckpoint load_inn(const std::string& path);

}  // namespace ivsid::ckpt

#endif  // IVSID_CHECKPOINT_HPP
