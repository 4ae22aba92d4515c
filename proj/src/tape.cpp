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

#include "ivsid/tape.hpp"

#include <cstring>
#include <stdexcept>

namespace ivsid::ad {

namespace {

Tensor transpose(const Tensor& t) {
  Tensor r(t.cols, t.rows);
  for (int i = 0; i < t.rows; ++i)
    for (int j = 0; j < t.cols; ++j) r(j, i) = t(i, j);
  return r;
}

Tensor& grab(Tensor& g, int rows, int cols) {
  if (g.empty()) g = Tensor(rows, cols);
  return g;
}

void acc(Tensor& dst, const Tensor& src) {
  grab(dst, src.rows, src.cols);
  for (size_t i = 0; i < src.size(); ++i) dst[i] += src[i];
}

void acc_neg(Tensor& dst, const Tensor& src) {
  grab(dst, src.rows, src.cols);
  for (size_t i = 0; i < src.size(); ++i) dst[i] -= src[i];
}

void acc_mul(Tensor& dst, const Tensor& g, const Tensor& other) {
  grab(dst, g.rows, g.cols);
  for (size_t i = 0; i < g.size(); ++i) dst[i] += g[i] * other[i];
}

bool bits_equal(const Tensor& a, const Tensor& b) {
  if (a.rows != b.rows || a.cols != b.cols) return false;
  if (a.size() == 0) return true;
  return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

int Tape::push(Node n) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(std::move(n));
  return id;
}

int Tape::constant(Tensor v) {
  Node n;
  n.op = Op::ConstC;
  n.lo = std::move(v);
  return push(std::move(n));
}

int Tape::param(int param_id, const Tensor& value) {
  if (param_id < 0) throw std::invalid_argument("tape: negative param id");
  if (param_id >= static_cast<int>(param_shapes_.size()))
    param_shapes_.resize(param_id + 1, {0, 0});
  param_shapes_[param_id] = {value.rows, value.cols};
  Node n;
  n.op = Op::Param;
  n.param = param_id;
  n.lo = value;
  return push(std::move(n));
}

void Tape::compute(Node& n) const {
  const auto& k = kern::active();
  const auto& A = nodes_[n.in.empty() ? 0 : n.in[0]];
  switch (n.op) {
    case Op::ConstC:
    case Op::Param:
      return;
    case Op::Add: {
      const auto& B = nodes_[n.in[1]];
      n.lo = Tensor(A.lo.rows, A.lo.cols);
      k.add(A.lo.data(), B.lo.data(), n.lo.data(), n.lo.size());
      return;
    }
    case Op::Sub: {
      const auto& B = nodes_[n.in[1]];
      n.lo = Tensor(A.lo.rows, A.lo.cols);
      k.sub(A.lo.data(), B.lo.data(), n.lo.data(), n.lo.size());
      return;
    }
    case Op::Hadamard: {
      const auto& B = nodes_[n.in[1]];
      n.lo = Tensor(A.lo.rows, A.lo.cols);
      k.mul(A.lo.data(), B.lo.data(), n.lo.data(), n.lo.size());
      return;
    }
    case Op::MatMul: {
      const auto& B = nodes_[n.in[1]];
      n.lo = Tensor(A.lo.rows, B.lo.cols);
      k.matmul(A.lo.data(), B.lo.data(), n.lo.data(), A.lo.rows, A.lo.cols,
               B.lo.cols);
      return;
    }
    case Op::AddColBcast: {
      const auto& B = nodes_[n.in[1]];
      n.lo = Tensor(A.lo.rows, A.lo.cols);
      for (int i = 0; i < A.lo.rows; ++i) {
        const double b = B.lo(i, 0);
        const double* arow = A.lo.row_ptr(i);
        double* crow = n.lo.row_ptr(i);
        for (int j = 0; j < A.lo.cols; ++j) crow[j] = arow[j] + b;
      }
      return;
    }
    case Op::Activate: {
      n.lo = Tensor(A.lo.rows, A.lo.cols);
      for (size_t i = 0; i < A.lo.size(); ++i)
        n.lo[i] = interval::apply_activation(n.act, A.lo[i]);
      return;
    }
    case Op::AssembleRows: {
      const int cols = n.cdata.cols > 0
                           ? n.cdata.cols
                           : nodes_[n.rows[0].node].lo.cols;
      n.lo = Tensor(static_cast<int>(n.rows.size()), cols);
      for (size_t r = 0; r < n.rows.size(); ++r) {
        const RowSrc& src = n.rows[r];
        const double* from = src.node >= 0 ? nodes_[src.node].lo.data()
                                           : n.cdata.row_ptr(src.const_row);
        std::memcpy(n.lo.row_ptr(static_cast<int>(r)), from,
                    static_cast<size_t>(cols) * sizeof(double));
      }
      return;
    }
    case Op::Lift: {
      n.lo = A.lo;
      n.hi = A.lo;
      return;
    }
    case Op::MakeInterval: {
      const auto& RL = nodes_[n.in[1]];
      const auto& RH = nodes_[n.in[2]];
      n.lo = Tensor(A.lo.rows, A.lo.cols);
      n.hi = Tensor(A.lo.rows, A.lo.cols);
      k.sub(A.lo.data(), RL.lo.data(), n.lo.data(), n.lo.size());
      k.add(A.lo.data(), RH.lo.data(), n.hi.data(), n.hi.size());
      return;
    }
    case Op::IvAdd: {
      const auto& B = nodes_[n.in[1]];
      n.lo = Tensor(A.lo.rows, A.lo.cols);
      n.hi = Tensor(A.lo.rows, A.lo.cols);
      k.add(A.lo.data(), B.lo.data(), n.lo.data(), n.lo.size());
      k.add(A.hi.data(), B.hi.data(), n.hi.data(), n.hi.size());
      return;
    }
    case Op::IvMatMul: {
      const auto& B = nodes_[n.in[1]];
      n.lo = Tensor(A.lo.rows, B.lo.cols);
      n.hi = Tensor(A.lo.rows, B.lo.cols);
      if (B.op == Op::Lift) {
        k.iv_matmul_dgb(A.lo.data(), A.hi.data(), B.lo.data(), n.lo.data(),
                        n.hi.data(), A.lo.rows, A.lo.cols, B.lo.cols);
      } else {
        k.iv_matmul(A.lo.data(), A.hi.data(), B.lo.data(), B.hi.data(),
                    n.lo.data(), n.hi.data(), A.lo.rows, A.lo.cols,
                    B.lo.cols);
      }
      return;
    }
    case Op::IvHadamard: {
      const auto& B = nodes_[n.in[1]];
      n.lo = Tensor(A.lo.rows, A.lo.cols);
      n.hi = Tensor(A.lo.rows, A.lo.cols);
      k.iv_mul(A.lo.data(), A.hi.data(), B.lo.data(), B.hi.data(),
               n.lo.data(), n.hi.data(), n.lo.size());
      return;
    }
    case Op::IvActivate: {
      n.lo = Tensor(A.lo.rows, A.lo.cols);
      n.hi = Tensor(A.lo.rows, A.lo.cols);
      for (size_t i = 0; i < A.lo.size(); ++i) {
        n.lo[i] = interval::apply_activation(n.act, A.lo[i]);
        n.hi[i] = interval::apply_activation(n.act, A.hi[i]);
      }
      return;
    }
    case Op::IvAddColBcast: {
      const auto& B = nodes_[n.in[1]];
      n.lo = Tensor(A.lo.rows, A.lo.cols);
      n.hi = Tensor(A.lo.rows, A.lo.cols);
      for (int i = 0; i < A.lo.rows; ++i) {
        const double bl = B.lo(i, 0);
        const double bh = B.hi(i, 0);
        for (int j = 0; j < A.lo.cols; ++j) {
          n.lo(i, j) = A.lo(i, j) + bl;
          n.hi(i, j) = A.hi(i, j) + bh;
        }
      }
      return;
    }
    case Op::SplitLo:
      n.lo = A.lo;
      return;
    case Op::SplitHi:
      n.lo = A.hi;
      return;
    case Op::Abs: {
      n.lo = Tensor(A.lo.rows, A.lo.cols);
      for (size_t i = 0; i < A.lo.size(); ++i) n.lo[i] = std::fabs(A.lo[i]);
      return;
    }
    case Op::Relu: {
      n.lo = Tensor(A.lo.rows, A.lo.cols);
      for (size_t i = 0; i < A.lo.size(); ++i)
        n.lo[i] = A.lo[i] > 0.0 ? A.lo[i] : 0.0;
      return;
    }
    case Op::MseLoss: {
      double sum = 0.0;
      for (size_t r = 0; r < n.in.size(); ++r) {
        const Tensor& pred = nodes_[n.in[r]].lo;
        const double* trow = n.cdata.row_ptr(static_cast<int>(r));
        for (int j = 0; j < pred.cols; ++j) {
          const double d = pred(0, j) - trow[j];
          sum += d * d;
        }
      }
      n.lo = Tensor(1, 1);
      n.lo(0, 0) = n.inv_count * sum;
      return;
    }
    case Op::RqrwLoss: {
      double sum = 0.0;
      for (size_t r = 0; r < n.in.size(); ++r) {
        const Node& pi = nodes_[n.in[r]];
        const double* trow = n.cdata.row_ptr(static_cast<int>(r));
        for (int j = 0; j < pi.lo.cols; ++j) {
          const double t = trow[j];
          const double lo = pi.lo(0, j);
          const double hi = pi.hi(0, j);
          const double kappa = (t - lo) * (t - hi);
          const double rqr =
              kappa >= 0.0 ? n.alpha * kappa : (n.alpha - 1.0) * kappa;
          const double w = hi - lo;
          sum += rqr + n.lambda * w * w / 2.0;
        }
      }
      n.lo = Tensor(1, 1);
      n.lo(0, 0) = n.inv_count * sum;
      return;
    }
  }
  throw std::logic_error("tape: unhandled op in compute");
}

#define IVSID_BINARY_BUILDER(NAME, OPK, CHECK)                     \
  int Tape::NAME(int a, int b) {                                   \
    Node n;                                                        \
    n.op = OPK;                                                    \
    n.in = {a, b};                                                 \
    CHECK;                                                         \
    const int id = push(std::move(n));                             \
    compute(nodes_[id]);                                           \
    return id;                                                     \
  }

IVSID_BINARY_BUILDER(add, Op::Add, {
  require_same_shape(nodes_[a].lo, nodes_[b].lo, "tape add");
})
IVSID_BINARY_BUILDER(sub, Op::Sub, {
  require_same_shape(nodes_[a].lo, nodes_[b].lo, "tape sub");
})
IVSID_BINARY_BUILDER(hadamard, Op::Hadamard, {
  require_same_shape(nodes_[a].lo, nodes_[b].lo, "tape hadamard");
})

int Tape::matmul(int a, int b) {
  if (nodes_[a].lo.cols != nodes_[b].lo.rows)
    throw std::invalid_argument("tape matmul: inner dimension mismatch");
  Node n;
  n.op = Op::MatMul;
  n.in = {a, b};
  const int id = push(std::move(n));
  compute(nodes_[id]);
  return id;
}

int Tape::add_col_bcast(int a, int b) {
  if (nodes_[b].lo.cols != 1 || nodes_[b].lo.rows != nodes_[a].lo.rows)
    throw std::invalid_argument("tape add_col_bcast: bias must be rows x 1");
  Node n;
  n.op = Op::AddColBcast;
  n.in = {a, b};
  const int id = push(std::move(n));
  compute(nodes_[id]);
  return id;
}

int Tape::activate(int a, Activation k) {
  Node n;
  n.op = Op::Activate;
  n.in = {a};
  n.act = k;
  const int id = push(std::move(n));
  compute(nodes_[id]);
  return id;
}

int Tape::assemble_rows(std::vector<RowSrc> rows, Tensor const_rows,
                        int cols) {
  for (const auto& r : rows) {
    if (r.node >= 0) {
      if (nodes_[r.node].lo.rows != 1 || nodes_[r.node].lo.cols != cols)
        throw std::invalid_argument("tape assemble_rows: row must be 1 x cols");
    } else if (r.const_row < 0 || r.const_row >= const_rows.rows ||
               const_rows.cols != cols) {
      throw std::invalid_argument("tape assemble_rows: bad const row");
    }
  }
  Node n;
  n.op = Op::AssembleRows;
  n.rows = std::move(rows);
  n.cdata = std::move(const_rows);
  if (n.cdata.cols == 0) n.cdata = Tensor(0, cols);
  for (const auto& r : n.rows)
    if (r.node >= 0) n.in.push_back(r.node);
  const int id = push(std::move(n));
  compute(nodes_[id]);
  return id;
}

int Tape::lift(int a) {
  Node n;
  n.op = Op::Lift;
  n.interval = true;
  n.in = {a};
  const int id = push(std::move(n));
  compute(nodes_[id]);
  return id;
}

int Tape::make_interval(int center, int rlo, int rhi) {
  require_same_shape(nodes_[center].lo, nodes_[rlo].lo, "tape make_interval");
  require_same_shape(nodes_[center].lo, nodes_[rhi].lo, "tape make_interval");
  Node n;
  n.op = Op::MakeInterval;
  n.interval = true;
  n.in = {center, rlo, rhi};
  const int id = push(std::move(n));
  compute(nodes_[id]);
  return id;
}

#define IVSID_IV_BINARY_BUILDER(NAME, OPK, CHECK)                  \
  int Tape::NAME(int a, int b) {                                   \
    Node n;                                                        \
    n.op = OPK;                                                    \
    n.interval = true;                                             \
    n.in = {a, b};                                                 \
    CHECK;                                                         \
    const int id = push(std::move(n));                             \
    compute(nodes_[id]);                                           \
    return id;                                                     \
  }

IVSID_IV_BINARY_BUILDER(iv_add, Op::IvAdd, {
  require_same_shape(nodes_[a].lo, nodes_[b].lo, "tape iv_add");
})
IVSID_IV_BINARY_BUILDER(iv_hadamard, Op::IvHadamard, {
  require_same_shape(nodes_[a].lo, nodes_[b].lo, "tape iv_hadamard");
})

int Tape::iv_matmul(int a, int b) {
  if (nodes_[a].lo.cols != nodes_[b].lo.rows)
    throw std::invalid_argument("tape iv_matmul: inner dimension mismatch");
  Node n;
  n.op = Op::IvMatMul;
  n.interval = true;
  n.in = {a, b};
  const int id = push(std::move(n));
  compute(nodes_[id]);
  return id;
}

int Tape::iv_activate(int a, Activation k) {
  Node n;
  n.op = Op::IvActivate;
  n.interval = true;
  n.in = {a};
  n.act = k;
  const int id = push(std::move(n));
  compute(nodes_[id]);
  return id;
}

int Tape::iv_add_col_bcast(int a, int b) {
  if (nodes_[b].lo.cols != 1 || nodes_[b].lo.rows != nodes_[a].lo.rows)
    throw std::invalid_argument("tape iv_add_col_bcast: bias must be rows x 1");
  Node n;
  n.op = Op::IvAddColBcast;
  n.interval = true;
  n.in = {a, b};
  const int id = push(std::move(n));
  compute(nodes_[id]);
  return id;
}

int Tape::split_lo(int a) {
  Node n;
  n.op = Op::SplitLo;
  n.in = {a};
  const int id = push(std::move(n));
  compute(nodes_[id]);
  return id;
}

int Tape::split_hi(int a) {
  Node n;
  n.op = Op::SplitHi;
  n.in = {a};
  const int id = push(std::move(n));
  compute(nodes_[id]);
  return id;
}

int Tape::abs_value(int a) {
  Node n;
  n.op = Op::Abs;
  n.in = {a};
  const int id = push(std::move(n));
  compute(nodes_[id]);
  return id;
}

int Tape::relu_value(int a) {
  Node n;
  n.op = Op::Relu;
  n.in = {a};
  const int id = push(std::move(n));
  compute(nodes_[id]);
  return id;
}

int Tape::mse_loss(const std::vector<int>& preds, Tensor targets,
                   double inv_count) {
  if (preds.empty()) throw std::invalid_argument("tape mse_loss: no inputs");
  if (targets.rows != static_cast<int>(preds.size()))
    throw std::invalid_argument("tape mse_loss: target rows mismatch");
  for (int p : preds)
    if (nodes_[p].lo.rows != 1 || nodes_[p].lo.cols != targets.cols)
      throw std::invalid_argument("tape mse_loss: prediction shape mismatch");
  Node n;
  n.op = Op::MseLoss;
  n.in = preds;
  n.cdata = std::move(targets);
  n.inv_count = inv_count;
  const int id = push(std::move(n));
  compute(nodes_[id]);
  return id;
}

int Tape::rqrw_loss(const std::vector<int>& pis, Tensor targets, double alpha,
                    double lambda, double inv_count) {
  if (pis.empty()) throw std::invalid_argument("tape rqrw_loss: no inputs");
  if (targets.rows != static_cast<int>(pis.size()))
    throw std::invalid_argument("tape rqrw_loss: target rows mismatch");
  for (int p : pis) {
    if (!nodes_[p].interval)
      throw std::invalid_argument("tape rqrw_loss: inputs must be intervals");
    if (nodes_[p].lo.rows != 1 || nodes_[p].lo.cols != targets.cols)
      throw std::invalid_argument("tape rqrw_loss: interval shape mismatch");
  }
  Node n;
  n.op = Op::RqrwLoss;
  n.in = pis;
  n.cdata = std::move(targets);
  n.alpha = alpha;
  n.lambda = lambda;
  n.inv_count = inv_count;
  const int id = push(std::move(n));
  compute(nodes_[id]);
  return id;
}

std::vector<Tensor> Tape::backward(int loss_id, double seed) {
  if (loss_id < 0 || loss_id >= size())
    throw std::invalid_argument("tape backward: bad loss node");
  const Node& loss = nodes_[loss_id];
  if (loss.interval || loss.lo.rows != 1 || loss.lo.cols != 1)
    throw std::invalid_argument("tape backward: loss must be a crisp scalar");

  std::vector<Tensor> glo(nodes_.size());
  std::vector<Tensor> ghi(nodes_.size());
  grab(glo[loss_id], 1, 1)(0, 0) = seed;

  for (int i = loss_id; i >= 0; --i) {
    Node& n = nodes_[i];
    const bool has_lo = !glo[i].empty();
    const bool has_hi = !ghi[i].empty();
    if (!has_lo && !has_hi) continue;

    switch (n.op) {
      case Op::ConstC:
      case Op::Param:
        break;
      case Op::Add:
        acc(glo[n.in[0]], glo[i]);
        acc(glo[n.in[1]], glo[i]);
        break;
      case Op::Sub:
        acc(glo[n.in[0]], glo[i]);
        acc_neg(glo[n.in[1]], glo[i]);
        break;
      case Op::Hadamard:
        acc_mul(glo[n.in[0]], glo[i], nodes_[n.in[1]].lo);
        acc_mul(glo[n.in[1]], glo[i], nodes_[n.in[0]].lo);
        break;
      case Op::MatMul: {
        const Tensor& a = nodes_[n.in[0]].lo;
        const Tensor& b = nodes_[n.in[1]].lo;
        const Tensor& g = glo[i];
        Tensor bt = transpose(b);
        Tensor da(a.rows, a.cols);
        kern::active().matmul(g.data(), bt.data(), da.data(), g.rows, g.cols,
                              bt.cols);
        acc(glo[n.in[0]], da);
        Tensor at = transpose(a);
        Tensor db(b.rows, b.cols);
        kern::active().matmul(at.data(), g.data(), db.data(), at.rows,
                              at.cols, g.cols);
        acc(glo[n.in[1]], db);
        break;
      }
      case Op::AddColBcast: {
        const Tensor& g = glo[i];
        acc(glo[n.in[0]], g);
        Tensor& gb = grab(glo[n.in[1]], g.rows, 1);
        for (int r = 0; r < g.rows; ++r) {
          double s = 0.0;
          for (int j = 0; j < g.cols; ++j) s += g(r, j);
          gb(r, 0) += s;
        }
        break;
      }
      case Op::Activate: {
        const Tensor& g = glo[i];
        Tensor& gx = grab(glo[n.in[0]], g.rows, g.cols);
        for (size_t e = 0; e < g.size(); ++e)
          gx[e] += g[e] * interval::activation_grad_from_output(n.act, n.lo[e]);
        break;
      }
      case Op::AssembleRows: {
        const Tensor& g = glo[i];
        for (size_t r = 0; r < n.rows.size(); ++r) {
          const RowSrc& src = n.rows[r];
          if (src.node < 0) continue;
          Tensor& gx = grab(glo[src.node], 1, g.cols);
          const double* grow = g.row_ptr(static_cast<int>(r));
          for (int j = 0; j < g.cols; ++j) gx(0, j) += grow[j];
        }
        break;
      }
      case Op::Lift:
        if (has_lo) acc(glo[n.in[0]], glo[i]);
        if (has_hi) acc(glo[n.in[0]], ghi[i]);
        break;
      case Op::MakeInterval:
        if (has_lo) {
          acc(glo[n.in[0]], glo[i]);
          acc_neg(glo[n.in[1]], glo[i]);
        }
        if (has_hi) {
          acc(glo[n.in[0]], ghi[i]);
          acc(glo[n.in[2]], ghi[i]);
        }
        break;
      case Op::IvAdd:
        if (has_lo) {
          acc(glo[n.in[0]], glo[i]);
          acc(glo[n.in[1]], glo[i]);
        }
        if (has_hi) {
          acc(ghi[n.in[0]], ghi[i]);
          acc(ghi[n.in[1]], ghi[i]);
        }
        break;
      case Op::IvHadamard: {
        const Node& a = nodes_[n.in[0]];
        const Node& b = nodes_[n.in[1]];
        Tensor& gal = grab(glo[n.in[0]], a.lo.rows, a.lo.cols);
        Tensor& gah = grab(ghi[n.in[0]], a.lo.rows, a.lo.cols);
        Tensor& gbl = grab(glo[n.in[1]], b.lo.rows, b.lo.cols);
        Tensor& gbh = grab(ghi[n.in[1]], b.lo.rows, b.lo.cols);
        for (size_t e = 0; e < n.lo.size(); ++e) {
          const double av[2] = {a.lo[e], a.hi[e]};
          const double bv[2] = {b.lo[e], b.hi[e]};
          const auto sel =
              interval::mul_extrema(av[0], av[1], bv[0], bv[1]);
          if (has_lo && glo[i][e] != 0.0) {
            const double g = glo[i][e];
            const int ea = sel.argmin >> 1;
            const int eb = sel.argmin & 1;
            (ea ? gah : gal)[e] += g * bv[eb];
            (eb ? gbh : gbl)[e] += g * av[ea];
          }
          if (has_hi && ghi[i][e] != 0.0) {
            const double g = ghi[i][e];
            const int ea = sel.argmax >> 1;
            const int eb = sel.argmax & 1;
            (ea ? gah : gal)[e] += g * bv[eb];
            (eb ? gbh : gbl)[e] += g * av[ea];
          }
        }
        break;
      }
      case Op::IvMatMul: {
        const Node& a = nodes_[n.in[0]];
        const Node& b = nodes_[n.in[1]];
        const int m = a.lo.rows, kk = a.lo.cols, nn = b.lo.cols;
        Tensor& gal = grab(glo[n.in[0]], m, kk);
        Tensor& gah = grab(ghi[n.in[0]], m, kk);
        Tensor& gbl = grab(glo[n.in[1]], kk, nn);
        Tensor& gbh = grab(ghi[n.in[1]], kk, nn);
        for (int r = 0; r < m; ++r) {
          for (int l = 0; l < kk; ++l) {
            const double av[2] = {a.lo(r, l), a.hi(r, l)};
            double dal = 0.0, dah = 0.0;
            for (int j = 0; j < nn; ++j) {
              const double bv[2] = {b.lo(l, j), b.hi(l, j)};
              const auto sel =
                  interval::mul_extrema(av[0], av[1], bv[0], bv[1]);
              if (has_lo) {
                const double g = glo[i](r, j);
                if (g != 0.0) {
                  const int ea = sel.argmin >> 1;
                  const int eb = sel.argmin & 1;
                  (ea ? dah : dal) += g * bv[eb];
                  (eb ? gbh : gbl)(l, j) += g * av[ea];
                }
              }
              if (has_hi) {
                const double g = ghi[i](r, j);
                if (g != 0.0) {
                  const int ea = sel.argmax >> 1;
                  const int eb = sel.argmax & 1;
                  (ea ? dah : dal) += g * bv[eb];
                  (eb ? gbh : gbl)(l, j) += g * av[ea];
                }
              }
            }
            gal(r, l) += dal;
            gah(r, l) += dah;
          }
        }
        break;
      }
      case Op::IvActivate: {
        const Node& a = nodes_[n.in[0]];
        if (has_lo) {
          Tensor& gx = grab(glo[n.in[0]], a.lo.rows, a.lo.cols);
          for (size_t e = 0; e < n.lo.size(); ++e)
            gx[e] += glo[i][e] *
                     interval::activation_grad_from_output(n.act, n.lo[e]);
        }
        if (has_hi) {
          Tensor& gx = grab(ghi[n.in[0]], a.lo.rows, a.lo.cols);
          for (size_t e = 0; e < n.hi.size(); ++e)
            gx[e] += ghi[i][e] *
                     interval::activation_grad_from_output(n.act, n.hi[e]);
        }
        break;
      }
      case Op::IvAddColBcast: {
        const Node& b = nodes_[n.in[1]];
        if (has_lo) {
          const Tensor& g = glo[i];
          acc(glo[n.in[0]], g);
          Tensor& gb = grab(glo[n.in[1]], b.lo.rows, 1);
          for (int r = 0; r < g.rows; ++r) {
            double s = 0.0;
            for (int j = 0; j < g.cols; ++j) s += g(r, j);
            gb(r, 0) += s;
          }
        }
        if (has_hi) {
          const Tensor& g = ghi[i];
          acc(ghi[n.in[0]], g);
          Tensor& gb = grab(ghi[n.in[1]], b.lo.rows, 1);
          for (int r = 0; r < g.rows; ++r) {
            double s = 0.0;
            for (int j = 0; j < g.cols; ++j) s += g(r, j);
            gb(r, 0) += s;
          }
        }
        break;
      }
      case Op::SplitLo:
        acc(glo[n.in[0]], glo[i]);
        break;
      case Op::SplitHi:
        acc(ghi[n.in[0]], glo[i]);
        break;
      case Op::Abs: {
        const Tensor& x = nodes_[n.in[0]].lo;
        const Tensor& g = glo[i];
        Tensor& gx = grab(glo[n.in[0]], x.rows, x.cols);
        for (size_t e = 0; e < x.size(); ++e) {
          const double s = x[e] > 0.0 ? 1.0 : (x[e] < 0.0 ? -1.0 : 0.0);
          gx[e] += g[e] * s;
        }
        break;
      }
      case Op::Relu: {
        const Tensor& x = nodes_[n.in[0]].lo;
        const Tensor& g = glo[i];
        Tensor& gx = grab(glo[n.in[0]], x.rows, x.cols);
        for (size_t e = 0; e < x.size(); ++e)
          if (x[e] > 0.0) gx[e] += g[e];
        break;
      }
      case Op::MseLoss: {
        const double g = glo[i](0, 0) * n.inv_count * 2.0;
        for (size_t r = 0; r < n.in.size(); ++r) {
          const Tensor& pred = nodes_[n.in[r]].lo;
          const double* trow = n.cdata.row_ptr(static_cast<int>(r));
          Tensor& gp = grab(glo[n.in[r]], 1, pred.cols);
          for (int j = 0; j < pred.cols; ++j)
            gp(0, j) += g * (pred(0, j) - trow[j]);
        }
        break;
      }
      case Op::RqrwLoss: {
        const double g = glo[i](0, 0) * n.inv_count;
        for (size_t r = 0; r < n.in.size(); ++r) {
          const Node& pi = nodes_[n.in[r]];
          const double* trow = n.cdata.row_ptr(static_cast<int>(r));
          Tensor& gl = grab(glo[n.in[r]], 1, pi.lo.cols);
          Tensor& gh = grab(ghi[n.in[r]], 1, pi.lo.cols);
          for (int j = 0; j < pi.lo.cols; ++j) {
            const double t = trow[j];
            const double lo = pi.lo(0, j);
            const double hi = pi.hi(0, j);
            const double kappa = (t - lo) * (t - hi);
            const double c = kappa >= 0.0 ? n.alpha : n.alpha - 1.0;
            const double w = hi - lo;
            gl(0, j) += g * (-c * (t - hi) - n.lambda * w);
            gh(0, j) += g * (-c * (t - lo) + n.lambda * w);
          }
        }
        break;
      }
    }
  }

  std::vector<Tensor> grads(param_shapes_.size());
  for (size_t p = 0; p < param_shapes_.size(); ++p)
    grads[p] = Tensor(param_shapes_[p].first, param_shapes_[p].second);
  for (int i = 0; i <= loss_id; ++i) {
    const Node& n = nodes_[i];
    if (n.op == Op::Param && !glo[i].empty()) {
      Tensor& g = grads[n.param];
      for (size_t e = 0; e < g.size(); ++e) g[e] += glo[i][e];
    }
  }
  return grads;
}

bool Tape::replay_matches() const {
  std::vector<Node> copy = nodes_;
  // compute() reads inputs through nodes_, so replay through a scratch tape.
  Tape scratch;
  scratch.nodes_ = nodes_;
  for (size_t i = 0; i < copy.size(); ++i) {
    Node& n = scratch.nodes_[i];
    if (n.op == Op::ConstC || n.op == Op::Param) continue;
    n.lo = Tensor();
    n.hi = Tensor();
    scratch.compute(n);
    if (!bits_equal(n.lo, nodes_[i].lo)) return false;
    if (n.interval && !bits_equal(n.hi, nodes_[i].hi)) return false;
  }
  return true;
}

}  // namespace ivsid::ad
