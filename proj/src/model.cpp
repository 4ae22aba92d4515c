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

#include "ivsid/model.hpp"

#include <cmath>
#include <stdexcept>

#include "ivsid/kernels.hpp"

namespace ivsid::model {

namespace {

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols != b.rows)
    throw std::invalid_argument("model: inner dimension mismatch " +
                                a.shape_str() + " vs " + b.shape_str());
  Tensor c(a.rows, b.cols);
  kern::active().matmul(a.data(), b.data(), c.data(), a.rows, a.cols, b.cols);
  return c;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "model add");
  Tensor c(a.rows, a.cols);
  kern::active().add(a.data(), b.data(), c.data(), c.size());
  return c;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "model hadamard");
  Tensor c(a.rows, a.cols);
  kern::active().mul(a.data(), b.data(), c.data(), c.size());
  return c;
}

Tensor add_col_bcast(const Tensor& a, const Tensor& b) {
  Tensor c(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i) {
    const double bias = b(i, 0);
    for (int j = 0; j < a.cols; ++j) c(i, j) = a(i, j) + bias;
  }
  return c;
}

Tensor activate(const Tensor& a, Activation k) {
  Tensor c(a.rows, a.cols);
  for (size_t i = 0; i < a.size(); ++i)
    c[i] = interval::apply_activation(k, a[i]);
  return c;
}

}  // namespace

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "lstm") return ModelKind::Lstm;
  if (s == "node") return ModelKind::Node;
  throw std::invalid_argument("unknown model kind '" + s + "'");
}

const char* model_kind_name(ModelKind k) {
  return k == ModelKind::Lstm ? "lstm" : "node";
}

std::vector<int> ModelParams::hidden_sizes() const {
  std::vector<int> h;
  if (kind == ModelKind::Node) {
    for (size_t i = 0; i + 1 < dense.size(); ++i) h.push_back(dense[i].W.rows);
  } else {
    for (const auto& c : cells) h.push_back(c.hidden());
  }
  return h;
}

Activation ModelParams::hidden_activation() const {
  if (kind == ModelKind::Node && !dense.empty()) return dense.front().act;
  return Activation::Tanh;
}

std::vector<ParamRef> param_refs(ModelParams& p) {
  std::vector<ParamRef> refs;
  for_each_param(p, [&](const std::string& name, Tensor& t, bool out,
                        bool rec) { refs.push_back({name, &t, out, rec}); });
  return refs;
}

ModelParams make_node(const RegressorSpec& reg, const std::vector<int>& hidden,
                      Activation act, Rng& rng) {
  reg.validate();
  if (hidden.empty())
    throw std::invalid_argument("node model needs at least one hidden layer");
  ModelParams p;
  p.kind = ModelKind::Node;
  p.reg = reg;
  int in = reg.input_size();
  for (int h : hidden) {
    if (h < 1) throw std::invalid_argument("hidden size must be positive");
    DenseLayer l{Tensor(h, in), Tensor(h, 1), act};
    rng.fill_glorot(l.W, in, h);
    p.dense.push_back(std::move(l));
    in = h;
  }
  DenseLayer out{Tensor(1, in), Tensor(1, 1), Activation::Identity};
  rng.fill_glorot(out.W, in, 1);
  p.dense.push_back(std::move(out));
  return p;
}

ModelParams make_lstm(const RegressorSpec& reg, const std::vector<int>& hidden,
                      Rng& rng) {
  reg.validate();
  if (hidden.empty())
    throw std::invalid_argument("lstm model needs at least one cell layer");
  ModelParams p;
  p.kind = ModelKind::Lstm;
  p.reg = reg;
  int in = reg.input_size();
  for (int h : hidden) {
    if (h < 1) throw std::invalid_argument("hidden size must be positive");
    LstmLayer c;
    auto gate = [&](Tensor& W, Tensor& U, Tensor& b) {
      W = Tensor(h, in);
      U = Tensor(h, h);
      b = Tensor(h, 1);
      rng.fill_glorot(W, in, h);
      rng.fill_glorot(U, h, h);
    };
    gate(c.Wi, c.Ui, c.bi);
    gate(c.Wf, c.Uf, c.bf);
    gate(c.Wc, c.Uc, c.bc);
    gate(c.Wo, c.Uo, c.bo);
    p.cells.push_back(std::move(c));
    in = h;
  }
  p.Wn = Tensor(1, in);
  p.bn = Tensor(1, 1);
  rng.fill_glorot(p.Wn, in, 1);
  return p;
}

SimState SimState::zeros(const ModelParams& p, int cols) {
  SimState s;
  for (const auto& c : p.cells) {
    s.h.emplace_back(c.hidden(), cols);
    s.c.emplace_back(c.hidden(), cols);
  }
  return s;
}

Tensor ffn_forward(const Tensor& x, const std::vector<DenseLayer>& layers) {
  Tensor a = x;
  for (const auto& l : layers) {
    if (l.W.cols != a.rows)
      throw std::invalid_argument("ffn: input width mismatch, expected " +
                                  std::to_string(l.W.cols) + " got " +
                                  std::to_string(a.rows));
    a = activate(add_col_bcast(matmul(l.W, a), l.b), l.act);
  }
  return a;
}

namespace {

// One LSTM stack step over `cols` windows at once; x is in x cols, states
// are hid x cols. Operation order matches the training tape exactly.
Tensor lstm_stack_step(const Tensor& x, SimState& st, const ModelParams& p) {
  Tensor layer_in = x;
  for (size_t li = 0; li < p.cells.size(); ++li) {
    const LstmLayer& c = p.cells[li];
    auto gate = [&](const Tensor& W, const Tensor& U, const Tensor& b,
                    Activation act) {
      return activate(add_col_bcast(add(matmul(W, layer_in),
                                        matmul(U, st.h[li])),
                                    b),
                      act);
    };
    const Tensor ig = gate(c.Wi, c.Ui, c.bi, Activation::Sigmoid);
    const Tensor fg = gate(c.Wf, c.Uf, c.bf, Activation::Sigmoid);
    const Tensor cand = gate(c.Wc, c.Uc, c.bc, Activation::Tanh);
    const Tensor og = gate(c.Wo, c.Uo, c.bo, Activation::Sigmoid);
    st.c[li] = add(hadamard(fg, st.c[li]), hadamard(ig, cand));
    st.h[li] = hadamard(og, activate(st.c[li], Activation::Tanh));
    layer_in = st.h[li];
  }
  return add_col_bcast(matmul(p.Wn, layer_in), p.bn);
}

}  // namespace

double lstm_step(const Tensor& x, SimState& state, const ModelParams& p) {
  if (p.kind != ModelKind::Lstm)
    throw std::invalid_argument("lstm_step: not an lstm model");
  return lstm_stack_step(x, state, p)(0, 0);
}

double node_step(const Tensor& x, double y_prev, const ModelParams& p) {
  if (p.kind != ModelKind::Node)
    throw std::invalid_argument("node_step: not a node model");
  return y_prev + ffn_forward(x, p.dense)(0, 0);
}

std::vector<double> simulate(const ModelParams& p, std::span<const double> u,
                             std::span<const double> yhat) {
  if (u.size() != yhat.size())
    throw std::invalid_argument("simulate: window rows must align");
  const int n = static_cast<int>(u.size());
  const int w = p.reg.warmup();
  if (n <= w)
    throw std::invalid_argument("simulate: window of length " +
                                std::to_string(n) +
                                " is shorter than warm-up " +
                                std::to_string(w + 1));
  std::vector<double> y(yhat.begin(), yhat.begin() + w);
  y.resize(n);
  SimState st = SimState::zeros(p);
  for (int k = w; k < n; ++k) {
    const auto xv = data::build_regressor(u, y, k, p.reg);
    const Tensor x = Tensor::col(xv);
    if (p.kind == ModelKind::Node)
      y[k] = node_step(x, y[k - 1], p);
    else
      y[k] = lstm_step(x, st, p);
  }
  return y;
}

RolloutCenters crisp_rollout(const ModelParams& p,
                             const data::WindowedBatch& wb,
                             bool keep_centers) {
  const int b = wb.count();
  const int n = wb.window();
  const int w = p.reg.warmup();
  if (n <= w)
    throw std::invalid_argument("rollout: window of length " +
                                std::to_string(n) +
                                " is shorter than warm-up " +
                                std::to_string(w + 1));
  RolloutCenters rc;
  rc.warmup = w;
  rc.ypred = Tensor(b, n);

  // Per-step rows across windows: u_rows are inputs, y_rows start as the
  // teacher seeds and are overwritten by predictions from the warm-up on.
  std::vector<Tensor> u_rows(n), y_rows(n);
  for (int t = 0; t < n; ++t) {
    u_rows[t] = Tensor(1, b);
    y_rows[t] = Tensor(1, b);
    for (int m = 0; m < b; ++m) {
      u_rows[t](0, m) = wb.u(m, t);
      y_rows[t](0, m) = wb.y(m, t);
    }
  }
  for (int t = 0; t < w; ++t)
    for (int m = 0; m < b; ++m) rc.ypred(m, t) = wb.y(m, t);

  SimState st = SimState::zeros(p, b);
  const int n_in = p.input_size();
  for (int k = w; k < n; ++k) {
    Tensor x(n_in, b);
    const auto src = data::regressor_sources(p.reg, k);
    for (size_t r = 0; r < src.size(); ++r) {
      const Tensor& from = src[r].from_u ? u_rows[src[r].t] : y_rows[src[r].t];
      std::copy(from.data(), from.data() + b, x.row_ptr(static_cast<int>(r)));
    }
    if (keep_centers) {
      rc.x.push_back(x);
      if (p.kind == ModelKind::Node) {
        rc.y_prev.push_back(y_rows[k - 1]);
      } else {
        rc.h_prev.push_back(st.h);
        rc.c_prev.push_back(st.c);
      }
    }
    Tensor yk;
    if (p.kind == ModelKind::Node) {
      yk = add(y_rows[k - 1], ffn_forward(x, p.dense));
    } else {
      yk = lstm_stack_step(x, st, p);
    }
    y_rows[k] = yk;
    for (int m = 0; m < b; ++m) rc.ypred(m, k) = yk(0, m);
  }
  return rc;
}

double mse_objective(const ModelParams& p, const data::WindowedBatch& wb) {
  const RolloutCenters rc = crisp_rollout(p, wb, false);
  const int b = wb.count();
  const int n = wb.window();
  double sum = 0.0;
  for (int m = 0; m < b; ++m)
    for (int k = rc.warmup; k < n; ++k) {
      const double d = rc.ypred(m, k) - wb.y(m, k);
      sum += d * d;
    }
  return sum / (static_cast<double>(b) * n);
}

}  // namespace ivsid::model
