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

#include "ivsid/uq.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "ivsid/train.hpp"

namespace ivsid::uq {

using ivmodel::DeltaParams;
using model::ModelParams;

double rqr_loss(double yhat, double lower, double upper, double alpha) {
  const double kappa = (yhat - lower) * (yhat - upper);
  return kappa >= 0.0 ? alpha * kappa : (alpha - 1.0) * kappa;
}

double width_loss(double lower, double upper) {
  const double w = upper - lower;
  return w * w / 2.0;
}

double rqrw_objective(const Tensor& lower, const Tensor& upper,
                      const Tensor& targets, double alpha, double lambda) {
  require_same_shape(lower, upper, "rqrw_objective");
  require_same_shape(lower, targets, "rqrw_objective");
  double sum = 0.0;
  for (size_t i = 0; i < lower.size(); ++i)
    sum += rqr_loss(targets[i], lower[i], upper[i], alpha) +
           lambda * width_loss(lower[i], upper[i]);
  return sum / static_cast<double>(lower.size());
}

void UQTrainConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("uq: alpha must lie strictly inside (0,1)");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("uq: lambda must be finite and nonnegative");
  if (!(r_h >= 0.0 && r_h <= 1.0) || !(r_o >= 0.0 && r_o <= 1.0))
    throw std::invalid_argument("uq: uncertainty rates must lie in [0,1]");
  if (epochs < 0) throw std::invalid_argument("uq: epochs must be >= 0");
  if (batch < 1) throw std::invalid_argument("uq: batch must be >= 1");
}

DeltaParams init_delta(const ModelParams& crisp, double r_h, double r_o,
                       ivmodel::TrickKind trick, bool freeze_recurrent) {
  if (!(r_h >= 0.0 && r_h <= 1.0) || !(r_o >= 0.0 && r_o <= 1.0))
    throw std::invalid_argument("init_delta: rates must lie in [0,1]");
  DeltaParams d;
  d.trick = trick;
  model::for_each_param(crisp, [&](const std::string& name, const Tensor& t,
                                   bool out, bool rec) {
    const double r = (freeze_recurrent && rec) ? 0.0 : (out ? r_o : r_h);
    Tensor raw(t.rows, t.cols);
    for (size_t e = 0; e < t.size(); ++e) raw[e] = std::fabs(t[e]) * r;
    d.names.push_back(name);
    d.raw_lo.push_back(raw);
    d.raw_hi.push_back(std::move(raw));
  });
  return d;
}

namespace {

struct ValStats {
  double obj = 0.0;
  double picp = 0.0;
  double pinaw = 0.0;
};

// Forward-only interval pass over precomputed centers, accumulating the
// objective and coverage metrics on the predicted positions.
ValStats eval_interval(const ModelParams& crisp, const DeltaParams& delta,
                       const model::RolloutCenters& centers,
                       const data::WindowedBatch& wb, double alpha,
                       double lambda, int chunk) {
  const int b = wb.count();
  const int n = wb.window();
  const int w = centers.warmup;

  double target_min = wb.y[0];
  double target_max = wb.y[0];
  for (size_t i = 1; i < wb.y.size(); ++i) {
    target_min = std::min(target_min, wb.y[i]);
    target_max = std::max(target_max, wb.y[i]);
  }

  double loss_sum = 0.0;
  double width_sum = 0.0;
  long long inside = 0;
  for (int at = 0; at < b; at += chunk) {
    const int bs = std::min(chunk, b - at);
    std::vector<int> cols(bs);
    for (int i = 0; i < bs; ++i) cols[i] = at + i;

    ad::Tape tape;
    const auto tm = ivmodel::tape_interval_params(tape, crisp, delta);
    const auto ys =
        ivmodel::build_interval_steps(tape, tm, crisp, centers, cols);
    for (size_t idx = 0; idx < ys.size(); ++idx) {
      const Tensor& lo = tape.value(ys[idx]);
      const Tensor& hi = tape.value_hi(ys[idx]);
      const int k = w + static_cast<int>(idx);
      for (int j = 0; j < bs; ++j) {
        const double t = wb.y(cols[j], k);
        loss_sum += rqr_loss(t, lo(0, j), hi(0, j), alpha) +
                    lambda * width_loss(lo(0, j), hi(0, j));
        width_sum += hi(0, j) - lo(0, j);
        if (lo(0, j) <= t && t <= hi(0, j)) ++inside;
      }
    }
  }
  const double count = static_cast<double>(b) * (n - w);
  ValStats s;
  s.obj = loss_sum / (static_cast<double>(b) * n);
  s.picp = 100.0 * static_cast<double>(inside) / count;
  s.pinaw = 100.0 * (width_sum / count) / (target_max - target_min);
  return s;
}

}  // namespace

UQResult train_inn(const ModelParams& crisp,
                   const data::WindowedBatch& train_wb,
                   const data::WindowedBatch& val_wb, const UQTrainConfig& cfg,
                   std::ostream* log) {
  cfg.validate();
  DeltaParams delta =
      init_delta(crisp, cfg.r_h, cfg.r_o, cfg.trick, cfg.freeze_recurrent);

  // Crisp trajectories, regressors and states are independent of the radii;
  // compute them once.
  const auto centers = model::crisp_rollout(crisp, train_wb, true);
  const auto centers_val = model::crisp_rollout(crisp, val_wb, true);
  const int b = train_wb.count();
  const int n = train_wb.window();
  const int w = centers.warmup;

  std::vector<bool> recurrent;
  model::for_each_param(crisp, [&](const std::string&, const Tensor&, bool,
                                   bool rec) { recurrent.push_back(rec); });
  std::vector<Tensor*> tensors;
  for (size_t i = 0; i < delta.raw_lo.size(); ++i) {
    tensors.push_back(&delta.raw_lo[i]);
    tensors.push_back(&delta.raw_hi[i]);
  }

  Adam adam(cfg.adam);
  Rng rng(cfg.seed);
  UQResult res;
  res.best_val = std::numeric_limits<double>::infinity();
  res.delta = delta;

  const auto t0 = std::chrono::steady_clock::now();
  auto emit = [&](const UQEpochRow& row) {
    res.history.push_back(row);
    if (log != nullptr) {
      *log << "{\"epoch\":" << row.epoch << ",\"train_objective\":"
           << row.train_obj << ",\"val_objective\":" << row.val_obj
           << ",\"picp\":" << row.picp << ",\"pinaw\":" << row.pinaw
           << ",\"wall_ms\":" << row.wall_ms << "}\n";
    }
  };

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto order = rng.permutation(b);
    double train_sum = 0.0;
    for (int at = 0; at < b; at += cfg.batch) {
      const int bs = std::min(cfg.batch, b - at);
      std::vector<int> cols(order.begin() + at, order.begin() + at + bs);

      ad::Tape tape;
      const auto tm = ivmodel::tape_interval_params(tape, crisp, delta);
      const auto ys =
          ivmodel::build_interval_steps(tape, tm, crisp, centers, cols);

      Tensor targets(n - w, bs);
      for (int k = w; k < n; ++k)
        for (int j = 0; j < bs; ++j)
          targets(k - w, j) = train_wb.y(cols[j], k);
      const int loss =
          tape.rqrw_loss(ys, std::move(targets), cfg.alpha, cfg.lambda,
                         1.0 / (static_cast<double>(bs) * n));
      const double loss_v = tape.scalar(loss);
      if (!std::isfinite(loss_v))
        throw train::TrainingDiverged(
            epoch, "interval training diverged (non-finite loss) at epoch " +
                       std::to_string(epoch));
      train_sum += loss_v * bs;

      auto grads = tape.backward(loss);
      if (cfg.freeze_recurrent) {
        for (size_t i = 0; i < recurrent.size(); ++i)
          if (recurrent[i]) {
            grads[2 * i].fill(0.0);
            grads[2 * i + 1].fill(0.0);
          }
      }
      adam.step(tensors, grads);
    }

    const ValStats vs = eval_interval(crisp, delta, centers_val, val_wb,
                                      cfg.alpha, cfg.lambda, 128);
    if (!std::isfinite(vs.obj))
      throw train::TrainingDiverged(
          epoch,
          "interval training diverged (non-finite validation loss) at epoch " +
              std::to_string(epoch));
    const double wall_ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - t0)
            .count();
    emit({epoch, train_sum / b, vs.obj, vs.picp, vs.pinaw, wall_ms});
    if (vs.obj < res.best_val) {
      res.best_val = vs.obj;
      res.best_epoch = epoch;
      res.delta = delta;
    }
  }
  return res;
}

}  // namespace ivsid::uq
