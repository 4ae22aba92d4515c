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

#ifndef IVSID_MODEL_HPP
#define IVSID_MODEL_HPP

#include <span>
#include <string>
#include <vector>

#include "ivsid/dataset.hpp"
#include "ivsid/interval.hpp"
#include "ivsid/rng.hpp"
#include "ivsid/tensor.hpp"

namespace ivsid::model {

using data::RegressorSpec;
using interval::Activation;

enum class ModelKind { Lstm, Node };

ModelKind model_kind_from_string(const std::string& s);
const char* model_kind_name(ModelKind k);

struct DenseLayer {
  Tensor W;  // out x in
  Tensor b;  // out x 1
  Activation act = Activation::Identity;
};

// One LSTM cell layer; gate order i, f, c, o throughout the project.
struct LstmLayer {
  Tensor Wi, Ui, bi;
  Tensor Wf, Uf, bf;
  Tensor Wc, Uc, bc;
  Tensor Wo, Uo, bo;
  int hidden() const { return Wi.rows; }
  int input() const { return Wi.cols; }
};

struct ModelParams {
  ModelKind kind = ModelKind::Node;
  RegressorSpec reg;
  // NODE / feedforward: hidden layers plus identity output layer.
  std::vector<DenseLayer> dense;
  // LSTM: stacked cells plus affine output layer.
  std::vector<LstmLayer> cells;
  Tensor Wn;  // 1 x hidden
  Tensor bn;  // 1 x 1

  int input_size() const { return reg.input_size(); }
  std::vector<int> hidden_sizes() const;
  Activation hidden_activation() const;
};

// Enumerates every parameter tensor in a fixed order shared by training,
// checkpoints and interval radii.
template <class Params, class Fn>
void for_each_param(Params& p, Fn&& fn) {
  if (p.kind == ModelKind::Node) {
    for (size_t i = 0; i < p.dense.size(); ++i) {
      const bool out = i + 1 == p.dense.size();
      const std::string tag = "dense" + std::to_string(i);
      fn(tag + ".W", p.dense[i].W, out, false);
      fn(tag + ".b", p.dense[i].b, out, false);
    }
    return;
  }
  for (size_t i = 0; i < p.cells.size(); ++i) {
    const std::string tag = "cell" + std::to_string(i);
    auto& c = p.cells[i];
    fn(tag + ".Wi", c.Wi, false, false);
    fn(tag + ".Ui", c.Ui, false, true);
    fn(tag + ".bi", c.bi, false, false);
    fn(tag + ".Wf", c.Wf, false, false);
    fn(tag + ".Uf", c.Uf, false, true);
    fn(tag + ".bf", c.bf, false, false);
    fn(tag + ".Wc", c.Wc, false, false);
    fn(tag + ".Uc", c.Uc, false, true);
    fn(tag + ".bc", c.bc, false, false);
    fn(tag + ".Wo", c.Wo, false, false);
    fn(tag + ".Uo", c.Uo, false, true);
    fn(tag + ".bo", c.bo, false, false);
  }
  fn("out.W", p.Wn, true, false);
  fn("out.b", p.bn, true, false);
}

struct ParamRef {
  std::string name;
  Tensor* tensor;
  bool output_layer;
  bool recurrent;
};

std::vector<ParamRef> param_refs(ModelParams& p);

ModelParams make_node(const RegressorSpec& reg, const std::vector<int>& hidden,
                      Activation act, Rng& rng);
ModelParams make_lstm(const RegressorSpec& reg, const std::vector<int>& hidden,
                      Rng& rng);

// Per-layer hidden and cell states; reset to zeros at window start.
struct SimState {
  std::vector<Tensor> h;
  std::vector<Tensor> c;
  static SimState zeros(const ModelParams& p, int cols = 1);
};

Tensor ffn_forward(const Tensor& x, const std::vector<DenseLayer>& layers);
double lstm_step(const Tensor& x, SimState& state, const ModelParams& p);
double node_step(const Tensor& x, double y_prev, const ModelParams& p);

// Closed-loop rollout over one window. The first warmup() positions carry
// the ground-truth seeds; later lagged outputs come from the model's own
// predictions.
std::vector<double> simulate(const ModelParams& p, std::span<const double> u,
                             std::span<const double> yhat);

// Batched forward pass over every window (windows are columns internally).
// When keep_centers is set, the regressors and pre-step states feeding each
// predicted step are retained for interval inference.
struct RolloutCenters {
  int warmup = 0;
  Tensor ypred;                            // B x N, seeds in warm-up columns
  std::vector<Tensor> x;                   // per predicted step: n_in x B
  std::vector<Tensor> y_prev;              // per predicted step: 1 x B
  std::vector<std::vector<Tensor>> h_prev; // [step][layer]: hid x B
  std::vector<std::vector<Tensor>> c_prev;
};
RolloutCenters crisp_rollout(const ModelParams& p,
                             const data::WindowedBatch& wb,
                             bool keep_centers);

// Mean squared error of the closed-loop rollout against the recorded
// outputs, normalized by window count times full window length.
double mse_objective(const ModelParams& p, const data::WindowedBatch& wb);

}  // namespace ivsid::model

#endif  // IVSID_MODEL_HPP
