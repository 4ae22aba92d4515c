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

#ifndef IVSID_UQ_HPP
#define IVSID_UQ_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ivsid/adam.hpp"
#include "ivsid/dataset.hpp"
#include "ivsid/interval_model.hpp"
#include "ivsid/model.hpp"

namespace ivsid::uq {

// Coverage loss: kappa = (yhat - lower)(yhat - upper), scaled by alpha when
// the target lies outside the interval and by alpha - 1 when inside.
double rqr_loss(double yhat, double lower, double upper, double alpha);

// Squared width penalty (upper - lower)^2 / 2.
double width_loss(double lower, double upper);

// Mean over all matrix elements of rqr_loss + lambda * width_loss.
double rqrw_objective(const Tensor& lower, const Tensor& upper,
                      const Tensor& targets, double alpha, double lambda);

struct UQTrainConfig {
  double alpha = 0.9;   // target coverage, strictly inside (0,1)
  double lambda = 0.1;  // width penalty weight
  int epochs = 200;
  int batch = 64;
  double r_h = 0.2;  // hidden layer uncertainty rate
  double r_o = 1.0;  // output layer uncertainty rate
  ivmodel::TrickKind trick = ivmodel::TrickKind::Abs;
  bool freeze_recurrent = false;
  uint64_t seed = 1;
  AdamConfig adam;

  void validate() const;
};

// Raw radii initialized so the effective radii after the trick equal
// |theta| * r_h on hidden layers and |theta| * r_o on the output layer.
// With freeze_recurrent the LSTM recurrent-weight radii start at zero.
ivmodel::DeltaParams init_delta(const model::ModelParams& crisp, double r_h,
                                double r_o, ivmodel::TrickKind trick,
                                bool freeze_recurrent = false);

struct UQEpochRow {
  int epoch;
  double train_obj;
  double val_obj;
  double picp;   // validation coverage, percent
  double pinaw;  // validation normalized width, percent
  double wall_ms;
};

struct UQResult {
  ivmodel::DeltaParams delta;  // best validation snapshot
  std::vector<UQEpochRow> history;
  int best_epoch = -1;
  double best_val = 0.0;
};

// Mini-batch Adam on the coverage/width objective with the crisp model
// frozen; keeps the radii with the lowest validation objective. When `log`
// is given, one JSON line per epoch is emitted.
UQResult train_inn(const model::ModelParams& crisp,
                   const data::WindowedBatch& train_wb,
                   const data::WindowedBatch& val_wb,
                   const UQTrainConfig& cfg, std::ostream* log = nullptr);

}  // namespace ivsid::uq

#endif  // IVSID_UQ_HPP
