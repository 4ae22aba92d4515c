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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ivsid/train.hpp"
#include "ivsid/uq.hpp"
#include "testutil.hpp"

using namespace ivsid;
using data::RegressorSpec;
using interval::Activation;
using ivmodel::TrickKind;
using model::ModelParams;

namespace {

data::SeriesDataset noisy_ar1(int k, uint64_t seed, double noise_w) {
  Rng rng(seed);
  data::SeriesDataset ds;
  double y = 0.0;
  for (int i = 0; i < k; ++i) {
    const double u = rng.uniform(-1.0, 1.0);
    y = 0.9 * y + 0.1 * u + rng.uniform(-noise_w, noise_w);
    ds.u.push_back(u);
    ds.y.push_back(y);
  }
  return ds;
}

std::string param_bits(const ModelParams& p) {
  std::string s;
  model::for_each_param(p, [&](const std::string&, const Tensor& t, bool,
                               bool) {
    s.append(reinterpret_cast<const char*>(t.data()),
             t.size() * sizeof(double));
  });
  return s;
}

}  // namespace

TEST_CASE("coverage loss hand cases") {
  // inside the band
  CHECK(uq::rqr_loss(1.0, 0.5, 1.5, 0.9) ==
        doctest::Approx(0.025).epsilon(1e-12));
  // above the band
  CHECK(uq::rqr_loss(2.0, 0.5, 1.5, 0.9) ==
        doctest::Approx(0.675).epsilon(1e-12));
  // exactly on a bound
  CHECK(uq::rqr_loss(1.5, 0.5, 1.5, 0.9) == 0.0);
  CHECK(uq::rqr_loss(0.5, 0.5, 1.5, 0.9) == 0.0);
}

TEST_CASE("coverage loss is continuous across the boundary") {
  const double alpha = 0.9;
  for (double eps : {1e-3, 1e-6, 1e-9}) {
    const double inside = uq::rqr_loss(1.5 - eps, 0.5, 1.5, alpha);
    const double outside = uq::rqr_loss(1.5 + eps, 0.5, 1.5, alpha);
    CHECK(std::fabs(inside) < 2 * eps);
    CHECK(std::fabs(outside) < 2 * eps);
  }
}

TEST_CASE("coverage loss is nonnegative") {
  Rng rng(1);
  for (int rep = 0; rep < 5000; ++rep) {
    const auto iv = testutil::random_interval(rng);
    const double y = rng.uniform(-4, 4);
    CHECK(uq::rqr_loss(y, iv.lo, iv.hi, rng.uniform(0.01, 0.99)) >= 0.0);
  }
}

TEST_CASE("width penalty is half the squared width") {
  CHECK(uq::width_loss(0.0, 1.0) == 0.5);
  CHECK(uq::width_loss(2.0, 2.0) == 0.0);
  CHECK(uq::width_loss(-1.0, 1.0) == 2.0);
}

TEST_CASE("objective aggregates elementwise losses") {
  SUBCASE("uniform interior slack") {
    // every target sits so that kappa = -c
    const int n = 6;
    Tensor lower(1, n), upper(1, n), target(1, n);
    for (int i = 0; i < n; ++i) {
      lower[i] = -1.0;
      upper[i] = 1.0;
      target[i] = 0.0;  // kappa = (0+1)(0-1) = -1
    }
    const double got = uq::rqrw_objective(lower, upper, target, 0.9, 0.0);
    CHECK(got == doctest::Approx(0.1).epsilon(1e-12));
  }
  SUBCASE("degenerate bands on the targets cost nothing") {
    Tensor t(2, 3, {1, 2, 3, 4, 5, 6});
    CHECK(uq::rqrw_objective(t, t, t, 0.9, 0.7) == 0.0);
  }
  SUBCASE("random batch equals a scalar reference loop") {
    Rng rng(2);
    Tensor lower(4, 7), upper(4, 7), target(4, 7);
    for (size_t i = 0; i < lower.size(); ++i) {
      const auto iv = testutil::random_interval(rng);
      lower[i] = iv.lo;
      upper[i] = iv.hi;
      target[i] = rng.uniform(-4, 4);
    }
    const double alpha = 0.85, lambda = 0.4;
    double want = 0.0;
    for (size_t i = 0; i < lower.size(); ++i) {
      const double kappa = (target[i] - lower[i]) * (target[i] - upper[i]);
      want += (kappa >= 0 ? alpha * kappa : (alpha - 1.0) * kappa) +
              lambda * (upper[i] - lower[i]) * (upper[i] - lower[i]) / 2.0;
    }
    want /= static_cast<double>(lower.size());
    CHECK(uq::rqrw_objective(lower, upper, target, alpha, lambda) ==
          doctest::Approx(want).epsilon(1e-14));
  }
  SUBCASE("shape mismatches are rejected") {
    Tensor a(2, 2), b(2, 3);
    CHECK_THROWS_AS(uq::rqrw_objective(a, a, b, 0.9, 0.1),
                    std::invalid_argument);
  }
}

TEST_CASE("objective matches the fused tape loss node") {
  Rng rng(3);
  const int n = 9;
  ad::Tape tape;
  Tensor lo1(1, n), hi1(1, n), lo2(1, n), hi2(1, n), targets(2, n);
  for (int i = 0; i < n; ++i) {
    auto a = testutil::random_interval(rng);
    auto b = testutil::random_interval(rng);
    lo1[i] = a.lo;
    hi1[i] = a.hi;
    lo2[i] = b.lo;
    hi2[i] = b.hi;
    targets(0, i) = rng.uniform(-3, 3);
    targets(1, i) = rng.uniform(-3, 3);
  }
  // feed fixed intervals through constant+lift-free construction
  const int r1 = tape.make_interval(tape.constant(lo1),
                                    tape.constant(Tensor(1, n)),
                                    tape.constant([&] {
                                      Tensor d(1, n);
                                      for (int i = 0; i < n; ++i)
                                        d[i] = hi1[i] - lo1[i];
                                      return d;
                                    }()));
  const int r2 = tape.make_interval(tape.constant(lo2),
                                    tape.constant(Tensor(1, n)),
                                    tape.constant([&] {
                                      Tensor d(1, n);
                                      for (int i = 0; i < n; ++i)
                                        d[i] = hi2[i] - lo2[i];
                                      return d;
                                    }()));
  const double alpha = 0.9, lambda = 0.3;
  const int loss =
      tape.rqrw_loss({r1, r2}, targets, alpha, lambda, 1.0 / (2 * n));

  Tensor lower(2, n), upper(2, n);
  for (int i = 0; i < n; ++i) {
    lower(0, i) = lo1[i];
    lower(1, i) = lo2[i];
    upper(0, i) = tape.value_hi(r1)(0, i);
    upper(1, i) = tape.value_hi(r2)(0, i);
  }
  CHECK(tape.scalar(loss) ==
        doctest::Approx(uq::rqrw_objective(lower, upper, targets, alpha,
                                           lambda))
            .epsilon(1e-14));
}

TEST_CASE("radius initialization scales with the crisp magnitudes") {
  Rng rng(4);
  ModelParams p = model::make_node(RegressorSpec{0, 0, 1}, {3},
                                   Activation::Tanh, rng);
  p.dense[0].W(1, 0) = 0.4;

  SUBCASE("hidden rate scales hidden tensors") {
    const auto d = uq::init_delta(p, 0.2, 1.0, TrickKind::Abs);
    const auto m = ivmodel::wrap(p, d);
    CHECK(m.dense[0].W.hi(1, 0) - 0.4 == doctest::Approx(0.08).epsilon(1e-14));
    CHECK(0.4 - m.dense[0].W.lo(1, 0) == doctest::Approx(0.08).epsilon(1e-14));
  }
  SUBCASE("zero rates collapse to the crisp model") {
    const auto d = uq::init_delta(p, 0.0, 0.0, TrickKind::Abs);
    const auto m = ivmodel::wrap(p, d);
    ivmodel::for_each_iv_param(m, [&](const std::string&,
                                      const ivmodel::IntervalMatrix& im) {
      for (size_t e = 0; e < im.lo.size(); ++e) CHECK(im.lo[e] == im.hi[e]);
    });
  }
  SUBCASE("unit output rate doubles the output weights' span") {
    const auto d = uq::init_delta(p, 0.2, 1.0, TrickKind::Abs);
    const auto m = ivmodel::wrap(p, d);
    const Tensor& wn = p.dense.back().W;
    for (int j = 0; j < wn.cols; ++j) {
      CHECK(m.dense.back().W.hi(0, j) - wn(0, j) ==
            doctest::Approx(std::fabs(wn(0, j))).epsilon(1e-14));
    }
  }
  SUBCASE("both tricks start from identical effective radii") {
    const auto da = uq::init_delta(p, 0.3, 0.7, TrickKind::Abs);
    const auto dr = uq::init_delta(p, 0.3, 0.7, TrickKind::Relu);
    const auto ma = ivmodel::wrap(p, da);
    const auto mr = ivmodel::wrap(p, dr);
    CHECK(ma.dense[0].W.lo(1, 0) == mr.dense[0].W.lo(1, 0));
    CHECK(ma.dense.back().b.hi(0, 0) == mr.dense.back().b.hi(0, 0));
  }
}

TEST_CASE("full radius gradients match finite differences on a small model") {
  Rng rng(5);
  ModelParams p = model::make_node(RegressorSpec{0, 0, 1}, {4},
                                   Activation::Tanh, rng);
  const auto ds = noisy_ar1(30, 6, 0.05);
  const auto wb = data::window(ds, 8);
  auto delta = uq::init_delta(p, 0.3, 0.5, TrickKind::Abs);
  const auto centers = model::crisp_rollout(p, wb, true);
  std::vector<int> cols;
  for (int i = 0; i < wb.count(); ++i) cols.push_back(i);

  const double alpha = 0.9, lambda = 0.2;
  auto eval = [&](const ivmodel::DeltaParams& d) {
    ad::Tape tape;
    const auto tm = ivmodel::tape_interval_params(tape, p, d);
    const auto ys = ivmodel::build_interval_steps(tape, tm, p, centers, cols);
    Tensor targets(static_cast<int>(ys.size()), wb.count());
    for (size_t r = 0; r < ys.size(); ++r)
      for (int m = 0; m < wb.count(); ++m)
        targets(static_cast<int>(r), m) =
            wb.y(m, centers.warmup + static_cast<int>(r));
    const int loss = tape.rqrw_loss(
        ys, std::move(targets), alpha, lambda,
        1.0 / (static_cast<double>(wb.count()) * wb.window()));
    return std::pair<ad::Tape, int>(std::move(tape), loss);
  };

  auto [tape, loss] = eval(delta);
  const auto grads = tape.backward(loss);

  const double h = 1e-6;
  double worst = 0.0;
  for (size_t ti = 0; ti < delta.raw_lo.size(); ++ti) {
    for (auto* side : {&delta.raw_lo, &delta.raw_hi}) {
      Tensor& raw = (*side)[ti];
      const int pid = static_cast<int>(2 * ti) + (side == &delta.raw_hi);
      for (size_t e = 0; e < raw.size(); ++e) {
        const double keep = raw[e];
        raw[e] = keep + h;
        auto up = eval(delta);
        const double fu = up.first.scalar(up.second);
        raw[e] = keep - h;
        auto dn = eval(delta);
        const double fd_ = dn.first.scalar(dn.second);
        raw[e] = keep;
        const double fd = (fu - fd_) / (2 * h);
        const double g = grads[pid][e];
        const double denom = std::max({std::fabs(fd), std::fabs(g), 1e-3});
        worst = std::max(worst, std::fabs(fd - g) / denom);
      }
    }
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("radius training never touches the crisp parameters") {
  Rng rng(7);
  ModelParams p = model::make_node(RegressorSpec{0, 0, 1}, {4},
                                   Activation::Tanh, rng);
  const auto ds = noisy_ar1(80, 8, 0.05);
  const auto parts = data::split(ds, {60, 20, 20});
  const auto train_wb = data::window(parts[0], 8);
  const auto val_wb = data::window(parts[1], 8);

  const std::string before = param_bits(p);
  uq::UQTrainConfig cfg;
  cfg.alpha = 0.9;
  cfg.epochs = 5;
  cfg.batch = 16;
  cfg.seed = 9;
  uq::train_inn(p, train_wb, val_wb, cfg);
  CHECK(param_bits(p) == before);
}

TEST_CASE("frozen recurrent radii stay at initialization") {
  Rng rng(10);
  ModelParams p = model::make_lstm(RegressorSpec{0, 0, 1}, {3}, rng);
  const auto ds = noisy_ar1(60, 11, 0.05);
  const auto parts = data::split(ds, {60, 20, 20});
  const auto train_wb = data::window(parts[0], 8);
  const auto val_wb = data::window(parts[1], 8);

  uq::UQTrainConfig cfg;
  cfg.alpha = 0.9;
  cfg.epochs = 4;
  cfg.batch = 16;
  cfg.seed = 12;
  cfg.freeze_recurrent = true;
  const auto res = uq::train_inn(p, train_wb, val_wb, cfg);

  size_t i = 0;
  bool any_moved = false;
  model::for_each_param(p, [&](const std::string&, const Tensor&, bool,
                               bool rec) {
    for (size_t e = 0; e < res.delta.raw_lo[i].size(); ++e) {
      if (rec) {
        CHECK(res.delta.raw_lo[i][e] == 0.0);
        CHECK(res.delta.raw_hi[i][e] == 0.0);
      } else if (res.delta.raw_lo[i][e] != 0.0) {
        any_moved = true;
      }
    }
    ++i;
  });
  CHECK(any_moved);
}

TEST_CASE("a dominant width penalty collapses the bands") {
  Rng rng(13);
  ModelParams p = model::make_node(RegressorSpec{0, 0, 1}, {4},
                                   Activation::Tanh, rng);
  const auto ds = noisy_ar1(100, 14, 0.05);
  const auto parts = data::split(ds, {60, 20, 20});
  const auto train_wb = data::window(parts[0], 8);
  const auto val_wb = data::window(parts[1], 8);

  auto mean_width = [&](const ivmodel::DeltaParams& d) {
    const auto pib = ivmodel::interval_forward_batch(p, d, val_wb);
    double sum = 0;
    long long n = 0;
    for (int m = 0; m < val_wb.count(); ++m)
      for (int k = pib.warmup; k < val_wb.window(); ++k) {
        sum += pib.hi(m, k) - pib.lo(m, k);
        ++n;
      }
    return sum / n;
  };

  const double w0 = mean_width(uq::init_delta(p, 0.5, 0.5, TrickKind::Abs));

  uq::UQTrainConfig cfg;
  cfg.alpha = 0.9;
  cfg.lambda = 1e3;
  cfg.epochs = 60;
  cfg.batch = 32;
  cfg.r_h = 0.5;
  cfg.r_o = 0.5;
  cfg.seed = 15;
  cfg.adam.lr = 1e-2;
  const auto res = uq::train_inn(p, train_wb, val_wb, cfg);
  const double w1 = mean_width(res.delta);
  CHECK(w1 < 0.1 * w0);
}

TEST_CASE("zero epochs with zero rates return the degenerate initialization") {
  Rng rng(16);
  ModelParams p = model::make_node(RegressorSpec{0, 0, 1}, {3},
                                   Activation::Tanh, rng);
  const auto ds = noisy_ar1(60, 17, 0.05);
  const auto parts = data::split(ds, {60, 20, 20});
  const auto train_wb = data::window(parts[0], 8);
  const auto val_wb = data::window(parts[1], 8);

  uq::UQTrainConfig cfg;
  cfg.alpha = 0.9;
  cfg.epochs = 0;
  cfg.r_h = 0.0;
  cfg.r_o = 0.0;
  const auto res = uq::train_inn(p, train_wb, val_wb, cfg);
  const auto pib = ivmodel::interval_forward_batch(p, res.delta, val_wb);
  for (int m = 0; m < val_wb.count(); ++m)
    for (int k = 0; k < val_wb.window(); ++k)
      CHECK(pib.lo(m, k) == pib.hi(m, k));
}

TEST_CASE("config validation rejects out-of-range settings") {
  uq::UQTrainConfig cfg;
  cfg.alpha = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.alpha = 0.9;
  cfg.lambda = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.lambda = 0.1;
  cfg.r_h = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("epoch log lines are valid single-line json records") {
  Rng rng(18);
  ModelParams p = model::make_node(RegressorSpec{0, 0, 1}, {3},
                                   Activation::Tanh, rng);
  const auto ds = noisy_ar1(60, 19, 0.05);
  const auto parts = data::split(ds, {60, 20, 20});
  const auto train_wb = data::window(parts[0], 8);
  const auto val_wb = data::window(parts[1], 8);

  uq::UQTrainConfig cfg;
  cfg.alpha = 0.9;
  cfg.epochs = 3;
  cfg.batch = 16;
  std::ostringstream log;
  uq::train_inn(p, train_wb, val_wb, cfg, &log);
  int lines = 0;
  std::string line;
  std::istringstream in(log.str());
  while (std::getline(in, line)) {
    ++lines;
    CHECK(line.find("\"epoch\":") != std::string::npos);
    CHECK(line.find("\"train_objective\":") != std::string::npos);
    CHECK(line.find("\"val_objective\":") != std::string::npos);
    CHECK(line.find("\"picp\":") != std::string::npos);
    CHECK(line.find("\"pinaw\":") != std::string::npos);
    CHECK(line.find("\"wall_ms\":") != std::string::npos);
  }
  CHECK(lines == 3);
}
