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

#include "ivsid/train.hpp"

#include <chrono>
#include <cmath>
#include <cstring>

#include "ivsid/rng.hpp"

namespace ivsid::train {

using ad::Tape;
using model::ModelParams;

std::vector<int> tape_params(Tape& tape, ModelParams& p) {
  std::vector<int> ids;
  int pid = 0;
  model::for_each_param(
      p, [&](const std::string&, Tensor& t, bool, bool) {
        ids.push_back(tape.param(pid++, t));
      });
  return ids;
}

Tensor gather_rows(const Tensor& src, const std::vector<int>& rows) {
  Tensor out(static_cast<int>(rows.size()), src.cols);
  for (size_t i = 0; i < rows.size(); ++i)
    std::memcpy(out.row_ptr(static_cast<int>(i)), src.row_ptr(rows[i]),
                static_cast<size_t>(src.cols) * sizeof(double));
  return out;
}

namespace {

Tensor column_as_row(const Tensor& m, int col) {
  Tensor r(1, m.rows);
  for (int i = 0; i < m.rows; ++i) r(0, i) = m(i, col);
  return r;
}

}  // namespace

int build_crisp_loss(Tape& tape, const ModelParams& p,
                     const std::vector<int>& ids, const Tensor& cu,
                     const Tensor& cy) {
  const int bs = cu.rows;
  const int n = cu.cols;
  const int w = p.reg.warmup();
  if (n <= w)
    throw std::invalid_argument("train: window shorter than warm-up");

  // Per-time rows across the chunk; y rows switch from teacher constants to
  // prediction nodes after the warm-up.
  std::vector<int> u_nodes(n), y_nodes(n);
  for (int t = 0; t < n; ++t) u_nodes[t] = tape.constant(column_as_row(cu, t));
  for (int t = 0; t < w; ++t) y_nodes[t] = tape.constant(column_as_row(cy, t));

  // LSTM state nodes, zero at window start.
  std::vector<int> h_nodes, c_nodes;
  for (const auto& c : p.cells) {
    h_nodes.push_back(tape.constant(Tensor(c.hidden(), bs)));
    c_nodes.push_back(tape.constant(Tensor(c.hidden(), bs)));
  }

  const bool is_node = p.kind == model::ModelKind::Node;
  const size_t ncells = p.cells.size();
  std::vector<int> preds;
  for (int k = w; k < n; ++k) {
    std::vector<ad::RowSrc> rows;
    for (const auto& s : data::regressor_sources(p.reg, k))
      rows.push_back(ad::RowSrc::from_node(
          s.from_u ? u_nodes[s.t] : y_nodes[s.t]));
    int x = tape.assemble_rows(std::move(rows), Tensor(), bs);

    int yk;
    if (is_node) {
      int a = x;
      for (size_t li = 0; li < p.dense.size(); ++li) {
        const int wn = ids[2 * li];
        const int bn = ids[2 * li + 1];
        a = tape.activate(tape.add_col_bcast(tape.matmul(wn, a), bn),
                          p.dense[li].act);
      }
      yk = tape.add(y_nodes[k - 1], a);
    } else {
      int layer_in = x;
      for (size_t li = 0; li < ncells; ++li) {
        const int base = static_cast<int>(12 * li);
        auto gate = [&](int off, interval::Activation act) {
          const int z = tape.add(tape.matmul(ids[base + off], layer_in),
                                 tape.matmul(ids[base + off + 1], h_nodes[li]));
          return tape.activate(tape.add_col_bcast(z, ids[base + off + 2]),
                               act);
        };
        const int ig = gate(0, interval::Activation::Sigmoid);
        const int fg = gate(3, interval::Activation::Sigmoid);
        const int cand = gate(6, interval::Activation::Tanh);
        const int og = gate(9, interval::Activation::Sigmoid);
        c_nodes[li] = tape.add(tape.hadamard(fg, c_nodes[li]),
                               tape.hadamard(ig, cand));
        h_nodes[li] = tape.hadamard(
            og, tape.activate(c_nodes[li], interval::Activation::Tanh));
        layer_in = h_nodes[li];
      }
      const int wn = ids[static_cast<int>(12 * ncells)];
      const int bn = ids[static_cast<int>(12 * ncells) + 1];
      yk = tape.add_col_bcast(tape.matmul(wn, layer_in), bn);
    }
    y_nodes[k] = yk;
    preds.push_back(yk);
  }

  Tensor targets(n - w, bs);
  for (int k = w; k < n; ++k)
    for (int m = 0; m < bs; ++m) targets(k - w, m) = cy(m, k);
  return tape.mse_loss(preds, std::move(targets),
                       1.0 / (static_cast<double>(bs) * n));
}

CrispResult train_mse(const ModelParams& init,
                      const data::WindowedBatch& train_wb,
                      const data::WindowedBatch& val_wb,
                      const CrispTrainConfig& cfg) {
  if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (cfg.batch < 1) throw std::invalid_argument("train: batch must be >= 1");

  ModelParams params = init;
  auto refs = model::param_refs(params);
  std::vector<Tensor*> tensors;
  for (auto& r : refs) tensors.push_back(r.tensor);

  Adam adam(cfg.adam);
  Rng rng(cfg.seed);
  const int b = train_wb.count();

  CrispResult res;
  res.best_val = std::numeric_limits<double>::infinity();

  const auto t0 = std::chrono::steady_clock::now();
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto order = rng.permutation(b);
    double train_sum = 0.0;
    for (int at = 0; at < b; at += cfg.batch) {
      const int bs = std::min(cfg.batch, b - at);
      std::vector<int> rows(order.begin() + at, order.begin() + at + bs);
      const Tensor cu = gather_rows(train_wb.u, rows);
      const Tensor cy = gather_rows(train_wb.y, rows);

      Tape tape;
      const auto ids = tape_params(tape, params);
      const int loss = build_crisp_loss(tape, params, ids, cu, cy);
      const double loss_v = tape.scalar(loss);
      if (!std::isfinite(loss_v))
        throw TrainingDiverged(
            epoch, "training diverged (non-finite loss) at epoch " +
                       std::to_string(epoch));
      train_sum += loss_v * bs;

      auto grads = tape.backward(loss);
      adam.step(tensors, grads);
    }
    const double train_obj = train_sum / b;
    const double val_obj = model::mse_objective(params, val_wb);
    if (!std::isfinite(val_obj))
      throw TrainingDiverged(
          epoch, "training diverged (non-finite validation loss) at epoch " +
                     std::to_string(epoch));
    const double wall_ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - t0)
            .count();
    res.history.push_back({epoch, train_obj, val_obj, wall_ms});
    if (val_obj < res.best_val) {
      res.best_val = val_obj;
      res.best_epoch = epoch;
      res.params = params;
    }
  }
  return res;
}

}  // namespace ivsid::train
