/*
 * Copyright 2026 The TabAdv Authors.
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

#include "tabadv/learners/mlp.h"

#include <cmath>

#include "absl/strings/str_cat.h"

namespace tabadv {
namespace {

double Activate(const DenseLayer& l, double z) {
  switch (l.activation) {
    case Activation::kIdentity:
      return z;
    case Activation::kRelu:
      return z > 0.0 ? z : 0.0;
    case Activation::kPrelu:
      return z > 0.0 ? z : l.prelu_slope * z;
  }
  return z;
}

double ActivationDerivative(const DenseLayer& l, double z) {
  switch (l.activation) {
    case Activation::kIdentity:
      return 1.0;
    case Activation::kRelu:
      return z > 0.0 ? 1.0 : 0.0;
    case Activation::kPrelu:
      return z > 0.0 ? 1.0 : l.prelu_slope;
  }
  return 1.0;
}

}  // namespace

absl::string_view ActivationName(Activation a) {
  switch (a) {
    case Activation::kIdentity:
      return "identity";
    case Activation::kRelu:
      return "relu";
    case Activation::kPrelu:
      return "prelu";
  }
  return "unknown";
}

absl::StatusOr<Activation> ParseActivation(absl::string_view name) {
  if (name == "identity" || name == "linear") return Activation::kIdentity;
  if (name == "relu") return Activation::kRelu;
  if (name == "prelu") return Activation::kPrelu;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown activation \"", name, "\""));
}

Mlp Mlp::Create(int in, std::span<const int> widths,
                std::span<const Activation> activations, Rng& rng) {
  std::vector<DenseLayer> layers;
  int prev = in;
  for (size_t i = 0; i < widths.size(); ++i) {
    DenseLayer l;
    l.in = prev;
    l.out = widths[i];
    l.activation = activations[i];
    const double limit = std::sqrt(6.0 / (l.in + l.out));
    std::uniform_real_distribution<double> u(-limit, limit);
    l.weights.resize(static_cast<size_t>(l.in) * l.out);
    for (double& w : l.weights) w = u(rng);
    l.bias.assign(l.out, 0.0);
    layers.push_back(std::move(l));
    prev = widths[i];
  }
  return Mlp(std::move(layers));
}

Vec Mlp::Forward(std::span<const double> x) const {
  Vec cur(x.begin(), x.end());
  for (const DenseLayer& l : layers_) {
    Vec next(l.out);
    for (int o = 0; o < l.out; ++o) {
      const double* w = &l.weights[static_cast<size_t>(o) * l.in];
      double z = l.bias[o];
      for (int i = 0; i < l.in; ++i) z += w[i] * cur[i];
      next[o] = Activate(l, z);
    }
    cur = std::move(next);
  }
  return cur;
}

Vec Mlp::Forward(std::span<const double> x, Cache* cache, Rng* rng) const {
  cache->inputs.assign(layers_.size(), {});
  cache->pre.assign(layers_.size(), {});
  cache->masks.assign(layers_.size(), {});
  Vec cur(x.begin(), x.end());
  for (size_t li = 0; li < layers_.size(); ++li) {
    const DenseLayer& l = layers_[li];
    cache->inputs[li] = cur;
    Vec pre(l.out);
    Vec next(l.out);
    for (int o = 0; o < l.out; ++o) {
      const double* w = &l.weights[static_cast<size_t>(o) * l.in];
      double z = l.bias[o];
      for (int i = 0; i < l.in; ++i) z += w[i] * cur[i];
      pre[o] = z;
      next[o] = Activate(l, z);
    }
    if (rng != nullptr && l.dropout > 0.0) {
      Vec mask(l.out);
      std::bernoulli_distribution keep(1.0 - l.dropout);
      for (int o = 0; o < l.out; ++o) {
        mask[o] = keep(*rng) ? 1.0 / (1.0 - l.dropout) : 0.0;
        next[o] *= mask[o];
      }
      cache->masks[li] = std::move(mask);
    }
    cache->pre[li] = std::move(pre);
    cur = std::move(next);
  }
  return cur;
}

Vec Mlp::Backward(const Cache& cache, std::span<const double> d_out,
                  ParamGrads* grads) const {
  Vec delta(d_out.begin(), d_out.end());
  for (size_t li = layers_.size(); li-- > 0;) {
    const DenseLayer& l = layers_[li];
    const Vec& pre = cache.pre[li];
    const Vec& input = cache.inputs[li];
    if (!cache.masks[li].empty()) {
      for (int o = 0; o < l.out; ++o) delta[o] *= cache.masks[li][o];
    }
    Vec dz(l.out);
    for (int o = 0; o < l.out; ++o) {
      dz[o] = delta[o] * ActivationDerivative(l, pre[o]);
    }
    if (grads != nullptr) {
      Vec& dw = (*grads)[3 * li];
      Vec& db = (*grads)[3 * li + 1];
      Vec& dslope = (*grads)[3 * li + 2];
      for (int o = 0; o < l.out; ++o) {
        double* row = &dw[static_cast<size_t>(o) * l.in];
        for (int i = 0; i < l.in; ++i) row[i] += dz[o] * input[i];
        db[o] += dz[o];
        if (l.activation == Activation::kPrelu && pre[o] <= 0.0) {
          dslope[0] += delta[o] * pre[o];
        }
      }
    }
    Vec d_in(l.in, 0.0);
    for (int o = 0; o < l.out; ++o) {
      const double* w = &l.weights[static_cast<size_t>(o) * l.in];
      for (int i = 0; i < l.in; ++i) d_in[i] += w[i] * dz[o];
    }
    delta = std::move(d_in);
  }
  return delta;
}

std::vector<std::span<double>> Mlp::Parameters() {
  std::vector<std::span<double>> out;
  for (DenseLayer& l : layers_) {
    out.emplace_back(l.weights);
    out.emplace_back(l.bias);
    if (l.activation == Activation::kPrelu) {
      out.emplace_back(&l.prelu_slope, 1);
    } else {
      out.emplace_back();
    }
  }
  return out;
}

ParamGrads Mlp::ZeroGrads() const {
  ParamGrads g;
  for (const DenseLayer& l : layers_) {
    g.emplace_back(l.weights.size(), 0.0);
    g.emplace_back(l.bias.size(), 0.0);
    g.emplace_back(l.activation == Activation::kPrelu ? 1 : 0, 0.0);
  }
  return g;
}

void Adam::Step(std::vector<std::span<double>> params,
                const ParamGrads& grads) {
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.size(), 0.0);
      v_.emplace_back(p.size(), 0.0);
    }
  }
  ++step_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  for (size_t k = 0; k < params.size(); ++k) {
    std::span<double> p = params[k];
    for (size_t i = 0; i < p.size(); ++i) {
      const double g = grads[k][i] + weight_decay_ * p[i];
      m_[k][i] = beta1_ * m_[k][i] + (1.0 - beta1_) * g;
      v_[k][i] = beta2_ * v_[k][i] + (1.0 - beta2_) * g * g;
      p[i] -= lr_ * (m_[k][i] / c1) / (std::sqrt(v_[k][i] / c2) + epsilon_);
    }
  }
}

Vec Adam::Delta(std::span<const double> grad) {
  if (m_.empty()) {
    m_.emplace_back(grad.size(), 0.0);
    v_.emplace_back(grad.size(), 0.0);
  }
  ++step_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  Vec delta(grad.size());
  for (size_t i = 0; i < grad.size(); ++i) {
    const double g = grad[i];
    m_[0][i] = beta1_ * m_[0][i] + (1.0 - beta1_) * g;
    v_[0][i] = beta2_ * v_[0][i] + (1.0 - beta2_) * g * g;
    delta[i] = -lr_ * (m_[0][i] / c1) / (std::sqrt(v_[0][i] / c2) + epsilon_);
  }
  return delta;
}

Standardizer Standardizer::Fit(const std::vector<Vec>& rows) {
  const size_t d = rows.empty() ? 0 : rows[0].size();
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 1.0);
  if (rows.empty()) return s;
  const double n = static_cast<double>(rows.size());
  for (const Vec& r : rows) {
    for (size_t j = 0; j < d; ++j) s.mean[j] += r[j] / n;
  }
  for (size_t j = 0; j < d; ++j) {
    double var = 0.0;
    for (const Vec& r : rows) var += (r[j] - s.mean[j]) * (r[j] - s.mean[j]);
    const double sd = std::sqrt(var / n);
    s.scale[j] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

Standardizer Standardizer::Identity(int width) {
  return Standardizer{Vec(width, 0.0), Vec(width, 1.0)};
}

Vec Standardizer::Apply(std::span<const double> x) const {
  Vec out(x.size());
  for (size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) / scale[j];
  return out;
}

}  // namespace tabadv
