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

#include "ivsid/interval_model.hpp"

#include <cstring>
#include <stdexcept>

#include "ivsid/train.hpp"

namespace ivsid::ivmodel {

using interval::Activation;
using model::ModelKind;
using model::ModelParams;

TrickKind trick_from_string(const std::string& s) {
  if (s == "abs") return TrickKind::Abs;
  if (s == "relu") return TrickKind::Relu;
  throw std::invalid_argument("unknown parameterization trick '" + s + "'");
}

const char* trick_name(TrickKind t) {
  return t == TrickKind::Abs ? "abs" : "relu";
}

DeltaParams zero_delta(const ModelParams& crisp, TrickKind trick) {
  DeltaParams d;
  d.trick = trick;
  model::for_each_param(crisp, [&](const std::string& name, const Tensor& t,
                                   bool, bool) {
    d.names.push_back(name);
    d.raw_lo.emplace_back(t.rows, t.cols);
    d.raw_hi.emplace_back(t.rows, t.cols);
  });
  return d;
}

namespace {

// Interval tensors in for_each_param order.
std::vector<IntervalMatrix> wrap_flat(const ModelParams& crisp,
                                      const DeltaParams& delta) {
  std::vector<IntervalMatrix> out;
  size_t i = 0;
  model::for_each_param(crisp, [&](const std::string& name, const Tensor& t,
                                   bool, bool) {
    if (i >= delta.raw_lo.size())
      throw std::invalid_argument("wrap: radius tensor count mismatch");
    if (i < delta.names.size() && delta.names[i] != name)
      throw std::invalid_argument("wrap: radius order mismatch, expected '" +
                                  name + "' got '" + delta.names[i] + "'");
    const Tensor& rl = delta.raw_lo[i];
    const Tensor& rh = delta.raw_hi[i];
    if (!t.same_shape(rl) || !t.same_shape(rh))
      throw std::invalid_argument("wrap: radius shape mismatch for " + name);
    Tensor lo(t.rows, t.cols), hi(t.rows, t.cols);
    for (size_t e = 0; e < t.size(); ++e) {
      lo[e] = t[e] - apply_trick(delta.trick, rl[e]);
      hi[e] = t[e] + apply_trick(delta.trick, rh[e]);
    }
    out.emplace_back(std::move(lo), std::move(hi));
    ++i;
  });
  if (i != delta.raw_lo.size())
    throw std::invalid_argument("wrap: radius tensor count mismatch");
  return out;
}

IntervalMatrix lift(const Tensor& t) { return IntervalMatrix(t, t); }

}  // namespace

IntervalModel wrap(const ModelParams& crisp, const DeltaParams& delta) {
  auto flat = wrap_flat(crisp, delta);
  IntervalModel m;
  m.kind = crisp.kind;
  m.reg = crisp.reg;
  size_t at = 0;
  if (crisp.kind == ModelKind::Node) {
    for (const auto& l : crisp.dense) {
      IvDense d{std::move(flat[at]), std::move(flat[at + 1]), l.act};
      at += 2;
      m.dense.push_back(std::move(d));
    }
    return m;
  }
  for (size_t c = 0; c < crisp.cells.size(); ++c) {
    IvLstmLayer l;
    IntervalMatrix* slots[12] = {&l.Wi, &l.Ui, &l.bi, &l.Wf, &l.Uf, &l.bf,
                                 &l.Wc, &l.Uc, &l.bc, &l.Wo, &l.Uo, &l.bo};
    for (auto* s : slots) *s = std::move(flat[at++]);
    m.cells.push_back(std::move(l));
  }
  m.Wn = std::move(flat[at++]);
  m.bn = std::move(flat[at++]);
  return m;
}

IntervalMatrix iffn_forward(const Tensor& x, const IntervalModel& m) {
  if (m.dense.empty())
    throw std::invalid_argument("iffn_forward: no dense layers");
  IntervalMatrix a = interval::activate(
      m.dense[0].act,
      interval::add(interval::matmul(m.dense[0].W, x), m.dense[0].b));
  for (size_t i = 1; i < m.dense.size(); ++i)
    a = interval::activate(
        m.dense[i].act,
        interval::add(interval::matmul(m.dense[i].W, a), m.dense[i].b));
  return a;
}

Interval ilstm_step(const Tensor& x, const std::vector<Tensor>& h_prev,
                    const std::vector<Tensor>& c_prev,
                    const IntervalModel& m) {
  if (m.kind != ModelKind::Lstm)
    throw std::invalid_argument("ilstm_step: not an lstm model");
  if (h_prev.size() != m.cells.size() || c_prev.size() != m.cells.size())
    throw std::invalid_argument("ilstm_step: state/layer count mismatch");

  IntervalMatrix layer_in = lift(x);
  for (size_t li = 0; li < m.cells.size(); ++li) {
    const auto& c = m.cells[li];
    if (h_prev[li].rows != c.Wi.rows() || c_prev[li].rows != c.Wi.rows())
      throw std::invalid_argument("ilstm_step: state width mismatch");
    auto gate = [&](const IntervalMatrix& W, const IntervalMatrix& U,
                    const IntervalMatrix& b, Activation act) {
      return interval::activate(
          act, interval::add(interval::add(interval::matmul(W, layer_in),
                                           interval::matmul(U, h_prev[li])),
                             b));
    };
    const IntervalMatrix ig = gate(c.Wi, c.Ui, c.bi, Activation::Sigmoid);
    const IntervalMatrix fg = gate(c.Wf, c.Uf, c.bf, Activation::Sigmoid);
    const IntervalMatrix cand = gate(c.Wc, c.Uc, c.bc, Activation::Tanh);
    const IntervalMatrix og = gate(c.Wo, c.Uo, c.bo, Activation::Sigmoid);
    const IntervalMatrix cnew =
        interval::add(interval::hadamard(fg, lift(c_prev[li])),
                      interval::hadamard(ig, cand));
    layer_in = interval::hadamard(
        og, interval::activate(Activation::Tanh, cnew));
  }
  const IntervalMatrix y =
      interval::add(interval::matmul(m.Wn, layer_in), m.bn);
  return y.at(0, 0);
}

Interval inode_step(const Tensor& x, double y_prev, const IntervalModel& m) {
  if (m.kind != ModelKind::Node)
    throw std::invalid_argument("inode_step: not a node model");
  const IntervalMatrix g = iffn_forward(x, m);
  return Interval(y_prev + g.lo(0, 0), y_prev + g.hi(0, 0));
}

PredictionInterval predict_pi(const IntervalModel& ivm,
                              const ModelParams& crisp,
                              std::span<const double> u,
                              std::span<const double> yhat) {
  if (ivm.kind != crisp.kind ||
      ivm.reg.n_x != crisp.reg.n_x || ivm.reg.n_d != crisp.reg.n_d ||
      ivm.reg.n_y != crisp.reg.n_y)
    throw std::invalid_argument("predict_pi: crisp/interval model mismatch");
  const int n = static_cast<int>(u.size());
  const int w = crisp.reg.warmup();
  if (n <= w)
    throw std::invalid_argument("predict_pi: window shorter than warm-up");

  PredictionInterval pi;
  pi.warmup = w;
  pi.lower.assign(yhat.begin(), yhat.begin() + w);
  pi.center = pi.lower;
  pi.upper = pi.lower;
  pi.lower.resize(n);
  pi.center.resize(n);
  pi.upper.resize(n);

  model::SimState st = model::SimState::zeros(crisp);
  for (int k = w; k < n; ++k) {
    const auto xv = data::build_regressor(u, pi.center, k, crisp.reg);
    const Tensor x = Tensor::col(xv);
    if (crisp.kind == ModelKind::Node) {
      const Interval y = inode_step(x, pi.center[k - 1], ivm);
      pi.center[k] = model::node_step(x, pi.center[k - 1], crisp);
      pi.lower[k] = y.lo;
      pi.upper[k] = y.hi;
    } else {
      const Interval y = ilstm_step(x, st.h, st.c, ivm);
      pi.center[k] = model::lstm_step(x, st, crisp);
      pi.lower[k] = y.lo;
      pi.upper[k] = y.hi;
    }
  }
  return pi;
}

TapeIvModel tape_interval_params(ad::Tape& tape, const ModelParams& crisp,
                                 const DeltaParams& delta) {
  std::vector<int> flat;
  size_t i = 0;
  model::for_each_param(crisp, [&](const std::string& name, const Tensor& t,
                                   bool, bool) {
    if (i >= delta.raw_lo.size())
      throw std::invalid_argument("tape wrap: radius count mismatch");
    if (i < delta.names.size() && delta.names[i] != name)
      throw std::invalid_argument(
          "tape wrap: radius order mismatch, expected '" + name + "' got '" +
          delta.names[i] + "'");
    if (!t.same_shape(delta.raw_lo[i]) || !t.same_shape(delta.raw_hi[i]))
      throw std::invalid_argument("tape wrap: radius shape mismatch for " +
                                  name);
    const int pl = tape.param(static_cast<int>(2 * i), delta.raw_lo[i]);
    const int ph = tape.param(static_cast<int>(2 * i + 1), delta.raw_hi[i]);
    const int tl = delta.trick == TrickKind::Abs ? tape.abs_value(pl)
                                                 : tape.relu_value(pl);
    const int th = delta.trick == TrickKind::Abs ? tape.abs_value(ph)
                                                 : tape.relu_value(ph);
    const int c = tape.constant(t);
    flat.push_back(tape.make_interval(c, tl, th));
    ++i;
  });
  if (i != delta.raw_lo.size())
    throw std::invalid_argument("tape wrap: radius count mismatch");

  TapeIvModel tm;
  size_t at = 0;
  if (crisp.kind == ModelKind::Node) {
    for (size_t l = 0; l < crisp.dense.size(); ++l) {
      tm.dense.push_back({flat[at], flat[at + 1]});
      at += 2;
    }
    return tm;
  }
  for (size_t c = 0; c < crisp.cells.size(); ++c) {
    std::array<int, 12> ids{};
    for (int s = 0; s < 12; ++s) ids[s] = flat[at++];
    tm.cells.push_back(ids);
  }
  tm.Wn = flat[at++];
  tm.bn = flat[at++];
  return tm;
}

namespace {

Tensor gather_cols(const Tensor& src, const std::vector<int>& cols) {
  Tensor out(src.rows, static_cast<int>(cols.size()));
  for (int i = 0; i < src.rows; ++i)
    for (size_t j = 0; j < cols.size(); ++j) out(i, static_cast<int>(j)) = src(i, cols[j]);
  return out;
}

}  // namespace

std::vector<int> build_interval_steps(ad::Tape& tape, const TapeIvModel& tm,
                                      const ModelParams& crisp,
                                      const model::RolloutCenters& centers,
                                      const std::vector<int>& window_cols) {
  const bool is_node = crisp.kind == ModelKind::Node;
  std::vector<int> ys;
  for (size_t idx = 0; idx < centers.x.size(); ++idx) {
    const int x_const = tape.constant(gather_cols(centers.x[idx], window_cols));
    const int x_lift = tape.lift(x_const);
    if (is_node) {
      int a = x_lift;
      for (size_t li = 0; li < crisp.dense.size(); ++li) {
        const int z = tape.iv_add_col_bcast(tape.iv_matmul(tm.dense[li][0], a),
                                            tm.dense[li][1]);
        a = tape.iv_activate(z, crisp.dense[li].act);
      }
      const int yprev =
          tape.lift(tape.constant(gather_cols(centers.y_prev[idx], window_cols)));
      ys.push_back(tape.iv_add(yprev, a));
    } else {
      int layer_in = x_lift;
      for (size_t li = 0; li < crisp.cells.size(); ++li) {
        const int h_prev = tape.lift(
            tape.constant(gather_cols(centers.h_prev[idx][li], window_cols)));
        const int c_prev = tape.lift(
            tape.constant(gather_cols(centers.c_prev[idx][li], window_cols)));
        const auto& ids = tm.cells[li];
        auto gate = [&](int off, Activation act) {
          const int z =
              tape.iv_add(tape.iv_matmul(ids[off], layer_in),
                          tape.iv_matmul(ids[off + 1], h_prev));
          return tape.iv_activate(tape.iv_add_col_bcast(z, ids[off + 2]), act);
        };
        const int ig = gate(0, Activation::Sigmoid);
        const int fg = gate(3, Activation::Sigmoid);
        const int cand = gate(6, Activation::Tanh);
        const int og = gate(9, Activation::Sigmoid);
        const int cnew = tape.iv_add(tape.iv_hadamard(fg, c_prev),
                                     tape.iv_hadamard(ig, cand));
        layer_in = tape.iv_hadamard(
            og, tape.iv_activate(cnew, Activation::Tanh));
      }
      ys.push_back(tape.iv_add_col_bcast(tape.iv_matmul(tm.Wn, layer_in),
                                         tm.bn));
    }
  }
  return ys;
}

PiBatch interval_forward_batch(const ModelParams& crisp,
                               const DeltaParams& delta,
                               const data::WindowedBatch& wb, int chunk) {
  const int b = wb.count();
  const int n = wb.window();
  PiBatch out;
  out.lo = Tensor(b, n);
  out.hi = Tensor(b, n);
  out.center = Tensor(b, n);
  for (int at = 0; at < b; at += chunk) {
    const int bs = std::min(chunk, b - at);
    std::vector<int> rows(bs);
    for (int i = 0; i < bs; ++i) rows[i] = at + i;
    data::WindowedBatch sub{train::gather_rows(wb.u, rows),
                            train::gather_rows(wb.y, rows)};
    const auto centers = model::crisp_rollout(crisp, sub, true);
    out.warmup = centers.warmup;

    ad::Tape tape;
    const auto tm = tape_interval_params(tape, crisp, delta);
    std::vector<int> cols(bs);
    for (int i = 0; i < bs; ++i) cols[i] = i;
    const auto ys = build_interval_steps(tape, tm, crisp, centers, cols);

    for (int m = 0; m < bs; ++m)
      for (int k = 0; k < n; ++k) {
        out.center(at + m, k) = centers.ypred(m, k);
        if (k < centers.warmup) {
          out.lo(at + m, k) = centers.ypred(m, k);
          out.hi(at + m, k) = centers.ypred(m, k);
        }
      }
    for (size_t idx = 0; idx < ys.size(); ++idx) {
      const Tensor& lo = tape.value(ys[idx]);
      const Tensor& hi = tape.value_hi(ys[idx]);
      const int k = centers.warmup + static_cast<int>(idx);
      for (int m = 0; m < bs; ++m) {
        out.lo(at + m, k) = lo(0, m);
        out.hi(at + m, k) = hi(0, m);
      }
    }
  }
  return out;
}

}  // namespace ivsid::ivmodel
