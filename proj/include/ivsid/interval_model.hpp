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

#ifndef IVSID_INTERVAL_MODEL_HPP
#define IVSID_INTERVAL_MODEL_HPP

#include <array>
#include <span>
#include <string>
#include <vector>

#include "ivsid/interval.hpp"
#include "ivsid/model.hpp"
#include "ivsid/tape.hpp"

namespace ivsid::ivmodel {

using interval::Interval;
using interval::IntervalMatrix;

enum class TrickKind { Abs, Relu };

TrickKind trick_from_string(const std::string& s);
const char* trick_name(TrickKind t);

inline double apply_trick(TrickKind t, double raw) {
  if (t == TrickKind::Abs) return raw < 0.0 ? -raw : raw;
  return raw > 0.0 ? raw : 0.0;
}

// Raw interval radii, one lower-side and one upper-side tensor per crisp
// parameter tensor (for_each_param order). Effective radii are obtained by
// mapping the raw values through the parameterization trick, which keeps
// them nonnegative without constraining the optimizer.
struct DeltaParams {
  TrickKind trick = TrickKind::Abs;
  std::vector<std::string> names;
  std::vector<Tensor> raw_lo;
  std::vector<Tensor> raw_hi;
};

// Interval weights mirroring the crisp model structure.
struct IvDense {
  IntervalMatrix W;
  IntervalMatrix b;
  interval::Activation act;
};

struct IvLstmLayer {
  IntervalMatrix Wi, Ui, bi;
  IntervalMatrix Wf, Uf, bf;
  IntervalMatrix Wc, Uc, bc;
  IntervalMatrix Wo, Uo, bo;
};

struct IntervalModel {
  model::ModelKind kind = model::ModelKind::Node;
  data::RegressorSpec reg;
  std::vector<IvDense> dense;
  std::vector<IvLstmLayer> cells;
  IntervalMatrix Wn, bn;
};

// Interval tensors enumerated in the same order as the crisp
// for_each_param.
template <class M, class Fn>
void for_each_iv_param(M& m, Fn&& fn) {
  if (m.kind == model::ModelKind::Node) {
    for (size_t i = 0; i < m.dense.size(); ++i) {
      const std::string tag = "dense" + std::to_string(i);
      fn(tag + ".W", m.dense[i].W);
      fn(tag + ".b", m.dense[i].b);
    }
    return;
  }
  for (size_t i = 0; i < m.cells.size(); ++i) {
    const std::string tag = "cell" + std::to_string(i);
    auto& c = m.cells[i];
    fn(tag + ".Wi", c.Wi);
    fn(tag + ".Ui", c.Ui);
    fn(tag + ".bi", c.bi);
    fn(tag + ".Wf", c.Wf);
    fn(tag + ".Uf", c.Uf);
    fn(tag + ".bf", c.bf);
    fn(tag + ".Wc", c.Wc);
    fn(tag + ".Uc", c.Uc);
    fn(tag + ".bc", c.bc);
    fn(tag + ".Wo", c.Wo);
    fn(tag + ".Uo", c.Uo);
    fn(tag + ".bo", c.bo);
  }
  fn("out.W", m.Wn);
  fn("out.b", m.bn);
}

// Raw radii shaped like the crisp parameters, all zero.
DeltaParams zero_delta(const model::ModelParams& crisp, TrickKind trick);

// theta_i -> [theta_i - trick(raw_lo_i), theta_i + trick(raw_hi_i)].
IntervalModel wrap(const model::ModelParams& crisp, const DeltaParams& delta);

// Interval feedforward pass over a crisp input vector.
IntervalMatrix iffn_forward(const Tensor& x, const IntervalModel& m);

// One interval LSTM step with states centered on the pretrained crisp
// model's states (hid x 1 each, one per layer).
Interval ilstm_step(const Tensor& x, const std::vector<Tensor>& h_prev,
                    const std::vector<Tensor>& c_prev, const IntervalModel& m);

// One interval NODE step centered on the crisp model's previous output.
Interval inode_step(const Tensor& x, double y_prev, const IntervalModel& m);

// Lower/upper bounds around the crisp trajectory; warm-up positions carry
// the degenerate ground-truth seeds.
struct PredictionInterval {
  std::vector<double> lower;
  std::vector<double> center;
  std::vector<double> upper;
  int warmup = 0;
};

PredictionInterval predict_pi(const IntervalModel& ivm,
                              const model::ModelParams& crisp,
                              std::span<const double> u,
                              std::span<const double> yhat);

// Batched interval bounds for every window of a rollout (B x N lo/hi,
// degenerate seeds in warm-up columns). Runs tape chunks internally.
struct PiBatch {
  Tensor lo;
  Tensor hi;
  Tensor center;
  int warmup = 0;
};
PiBatch interval_forward_batch(const model::ModelParams& crisp,
                               const DeltaParams& delta,
                               const data::WindowedBatch& wb,
                               int chunk = 128);

// --- tape construction for radius training ---

// Raw radii registered as tape parameters (ids 2*i for lower, 2*i+1 for
// upper), wrapped into interval parameter nodes around the crisp constants.
struct TapeIvModel {
  std::vector<std::array<int, 2>> dense;  // interval {W, b} node ids
  std::vector<std::array<int, 12>> cells;
  int Wn = -1, bn = -1;
};

TapeIvModel tape_interval_params(ad::Tape& tape,
                                 const model::ModelParams& crisp,
                                 const DeltaParams& delta);

// Interval rollout for a set of windows sharing centered crisp data; returns
// interval prediction nodes (1 x cols) for each predicted step.
std::vector<int> build_interval_steps(ad::Tape& tape, const TapeIvModel& tm,
                                      const model::ModelParams& crisp,
                                      const model::RolloutCenters& centers,
                                      const std::vector<int>& window_cols);

}  // namespace ivsid::ivmodel

#endif  // IVSID_INTERVAL_MODEL_HPP
