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

#ifndef IVSID_TAPE_HPP
#define IVSID_TAPE_HPP

#include <cstdint>
#include <vector>

#include "ivsid/interval.hpp"
#include "ivsid/tensor.hpp"

namespace ivsid::ad {

using interval::Activation;

enum class Op : uint8_t {
  ConstC,
  Param,
  Add,
  Sub,
  Hadamard,
  MatMul,
  AddColBcast,
  Activate,
  AssembleRows,
  Lift,
  MakeInterval,
  IvAdd,
  IvMatMul,
  IvHadamard,
  IvActivate,
  IvAddColBcast,
  SplitLo,
  SplitHi,
  Abs,
  Relu,
  MseLoss,
  RqrwLoss,
};

// One stacked row of an AssembleRows node: either the (1 x n) output of an
// earlier node or a constant row stored in the node's cdata.
struct RowSrc {
  int node = -1;
  int const_row = -1;
  static RowSrc from_node(int id) { return RowSrc{id, -1}; }
  static RowSrc from_const(int row) { return RowSrc{-1, row}; }
};

struct Node {
  Op op;
  bool interval = false;
  std::vector<int> in;
  Tensor lo;  // forward value; crisp nodes use lo only
  Tensor hi;
  Activation act = Activation::Identity;
  int param = -1;
  std::vector<RowSrc> rows;
  Tensor cdata;  // const rows (AssembleRows) or targets (loss nodes)
  double alpha = 0.0;
  double lambda = 0.0;
  double inv_count = 0.0;
};

// Record of primitive ops in topological order (children before parents).
// Forward values are computed eagerly as nodes are recorded; backward walks
// the record in reverse. One tape per training step.
class Tape {
 public:
  // --- leaves ---
  int constant(Tensor v);
  int param(int param_id, const Tensor& value);

  // --- crisp ops ---
  int add(int a, int b);
  int sub(int a, int b);
  int hadamard(int a, int b);
  int matmul(int a, int b);
  // C = A + b broadcast across columns (b is p x 1).
  int add_col_bcast(int a, int b);
  int activate(int a, Activation k);
  // Stack 1 x cols rows into a (rows.size() x cols) matrix.
  int assemble_rows(std::vector<RowSrc> rows, Tensor const_rows, int cols);

  // --- interval ops ---
  int lift(int a);
  // [center - rlo, center + rhi]; radii must be elementwise nonnegative.
  int make_interval(int center, int rlo, int rhi);
  int iv_add(int a, int b);
  int iv_matmul(int a, int b);
  int iv_hadamard(int a, int b);
  int iv_activate(int a, Activation k);
  int iv_add_col_bcast(int a, int b);
  int split_lo(int a);
  int split_hi(int a);

  // --- parameterization tricks ---
  int abs_value(int a);
  int relu_value(int a);

  // --- fused losses (scalar outputs) ---
  // loss = inv_count * sum over rows/cols of (pred - target)^2
  int mse_loss(const std::vector<int>& preds, Tensor targets,
               double inv_count);
  // loss = inv_count * sum of coverage loss + lambda * width^2 / 2
  int rqrw_loss(const std::vector<int>& pis, Tensor targets, double alpha,
                double lambda, double inv_count);

  const Node& node(int id) const { return nodes_[id]; }
  const Tensor& value(int id) const { return nodes_[id].lo; }
  const Tensor& value_hi(int id) const { return nodes_[id].hi; }
  double scalar(int id) const { return nodes_[id].lo(0, 0); }
  int size() const { return static_cast<int>(nodes_.size()); }
  int num_params() const { return static_cast<int>(param_shapes_.size()); }

  // Reverse-mode sweep from a scalar loss node. Gradients are returned per
  // parameter id; parameters the loss does not reach get zero tensors.
  std::vector<Tensor> backward(int loss_id, double seed = 1.0);

  // Recompute every node from its inputs and check the recorded values are
  // reproduced bitwise.
  bool replay_matches() const;

 private:
  int push(Node n);
  void compute(Node& n) const;

  std::vector<Node> nodes_;
  std::vector<std::pair<int, int>> param_shapes_;  // by param id
};

}  // namespace ivsid::ad

#endif  // IVSID_TAPE_HPP
