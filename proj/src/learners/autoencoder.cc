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

#include "tabadv/learners/autoencoder.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tabadv/common/status_macros.h"

namespace tabadv {

double MeanSquaredDeviation(std::span<const double> a,
                            std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return a.empty() ? 0.0 : s / static_cast<double>(a.size());
}

AeNet AeNet::Create(int width, Rng& rng) {
  const int widths[] = {kHiddenWidth, width};
  const Activation acts[] = {Activation::kRelu, Activation::kIdentity};
  return AeNet(Standardizer::Identity(width),
               Mlp::Create(width, widths, acts, rng));
}

Vec AeNet::Reconstruct(std::span<const double> x) const {
  return net_.Forward(scaler_.Apply(x));
}

double AeNet::ReconstructionError(std::span<const double> x) const {
  const Vec z = scaler_.Apply(x);
  return MeanSquaredDeviation(net_.Forward(z), z);
}

absl::StatusOr<AeNet> FitAutoencoder(const std::vector<Vec>& rows,
                                     const TrainConfig& cfg) {
  RETURN_IF_ERROR(ValidateTrainConfig(cfg));
  if (rows.size() < 2) {
    return absl::InvalidArgumentError("empty input: need at least 2 rows");
  }
  const int d = static_cast<int>(rows[0].size());
  Rng rng(cfg.seed);
  AeNet ae = AeNet::Create(d, rng);
  ae.scaler_ = Standardizer::Fit(rows);
  std::vector<Vec> scaled(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) scaled[i] = ae.scaler_.Apply(rows[i]);

  Adam adam(cfg.learning_rate, cfg.weight_decay);
  std::vector<size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  Mlp::Cache cache;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const size_t end = std::min(order.size(), start + cfg.batch_size);
      ParamGrads grads = ae.net_.ZeroGrads();
      for (size_t b = start; b < end; ++b) {
        const Vec& z = scaled[order[b]];
        const Vec out = ae.net_.Forward(z, &cache, nullptr);
        Vec d_out(d);
        for (int j = 0; j < d; ++j) d_out[j] = 2.0 * (out[j] - z[j]) / d;
        ae.net_.Backward(cache, d_out, &grads);
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      for (Vec& g : grads) {
        for (double& v : g) v *= inv;
      }
      adam.Step(ae.net_.Parameters(), grads);
    }
  }
  for (const auto& p : ae.net_.Parameters()) {
    if (!AllFinite(p)) return absl::InternalError("autoencoder diverged");
  }
  return ae;
}

}  // namespace tabadv
