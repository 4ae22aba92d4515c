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

#ifndef IVSID_TRAIN_HPP
#define IVSID_TRAIN_HPP

#include <stdexcept>
#include <vector>

#include "ivsid/adam.hpp"
#include "ivsid/dataset.hpp"
#include "ivsid/model.hpp"
#include "ivsid/tape.hpp"

namespace ivsid::train {

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int epoch_, const std::string& what)
      : std::runtime_error(what), epoch(epoch_) {}
  int epoch;
};

struct CrispTrainConfig {
  int epochs = 300;
  int batch = 64;
  AdamConfig adam;
  uint64_t seed = 1;
};

struct EpochRow {
  int epoch;
  double train_obj;
  double val_obj;
  double wall_ms;
};

struct CrispResult {
  model::ModelParams params;  // best validation snapshot
  std::vector<EpochRow> history;
  int best_epoch = -1;
  double best_val = 0.0;
};

// Mini-batch Adam on the simulation-mode squared-error objective; keeps the
// parameters with the lowest validation objective across epochs.
CrispResult train_mse(const model::ModelParams& init,
                      const data::WindowedBatch& train_wb,
                      const data::WindowedBatch& val_wb,
                      const CrispTrainConfig& cfg);

// Parameter leaves recorded on a tape, in for_each_param order.
std::vector<int> tape_params(ad::Tape& tape, model::ModelParams& p);

// Records the full closed-loop rollout of a chunk of windows and returns the
// scalar MSE loss node. `ids` must come from tape_params on the same model.
int build_crisp_loss(ad::Tape& tape, const model::ModelParams& p,
                     const std::vector<int>& ids, const Tensor& cu,
                     const Tensor& cy);

// Row gather of selected windows.
Tensor gather_rows(const Tensor& src, const std::vector<int>& rows);

}  // namespace ivsid::train

#endif  // IVSID_TRAIN_HPP
