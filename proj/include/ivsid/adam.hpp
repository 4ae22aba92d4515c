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

#ifndef IVSID_ADAM_HPP
#define IVSID_ADAM_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ivsid/tensor.hpp"

namespace ivsid {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Moment accumulators mirror parameter shapes;
// the step counter only moves forward.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  const AdamConfig& config() const { return cfg_; }
  int64_t steps() const { return t_; }

  void step(std::vector<Tensor*>& params, const std::vector<Tensor>& grads) {
    if (params.size() != grads.size())
      throw std::invalid_argument("adam: parameter/gradient count mismatch");
    if (m_.empty()) {
      m_.resize(params.size());
      v_.resize(params.size());
      for (size_t p = 0; p < params.size(); ++p) {
        m_[p] = Tensor(params[p]->rows, params[p]->cols);
        v_[p] = Tensor(params[p]->rows, params[p]->cols);
      }
    }
    if (m_.size() != params.size())
      throw std::invalid_argument("adam: parameter count changed");
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (size_t p = 0; p < params.size(); ++p) {
      Tensor& w = *params[p];
      const Tensor& g = grads[p];
      require_same_shape(w, g, "adam");
      require_same_shape(w, m_[p], "adam state");
      for (size_t i = 0; i < w.size(); ++i) {
        m_[p][i] = cfg_.beta1 * m_[p][i] + (1.0 - cfg_.beta1) * g[i];
        v_[p][i] = cfg_.beta2 * v_[p][i] + (1.0 - cfg_.beta2) * g[i] * g[i];
        const double mhat = m_[p][i] / bc1;
        const double vhat = v_[p][i] / bc2;
        w[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
      }
    }
  }

 private:
  AdamConfig cfg_;
  int64_t t_ = 0;
  std::vector<Tensor> m_, v_;
};

}  // namespace ivsid

#endif  // IVSID_ADAM_HPP
