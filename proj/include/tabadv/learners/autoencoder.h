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

#ifndef TABADV_LEARNERS_AUTOENCODER_H_
#define TABADV_LEARNERS_AUTOENCODER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "tabadv/common/vec.h"
#include "tabadv/learners/mlp.h"
#include "tabadv/learners/train_config.h"

namespace tabadv {

// Mean of squared coordinate differences.
double MeanSquaredDeviation(std::span<const double> a,
                            std::span<const double> b);

// Symmetric autoencoder: width -> 64 (ReLU) -> width, on standardized input.
class AeNet {
 public:
  static constexpr int kHiddenWidth = 64;

  AeNet() = default;
  AeNet(Standardizer scaler, Mlp net)
      : scaler_(std::move(scaler)), net_(std::move(net)) {}

  static AeNet Create(int width, Rng& rng);

  int width() const { return net_.in_width(); }
  // Reconstruction in standardized coordinates.
  Vec Reconstruct(std::span<const double> x) const;
  // MSE between the standardized input and its reconstruction.
  double ReconstructionError(std::span<const double> x) const;

  const Standardizer& scaler() const { return scaler_; }
  const Mlp& net() const { return net_; }

 private:
  friend absl::StatusOr<AeNet> FitAutoencoder(const std::vector<Vec>&,
                                              const TrainConfig&);
  Standardizer scaler_;
  Mlp net_;
};

// Defaults used for anomaly detectors.
inline TrainConfig AutoencoderTrainConfig(uint64_t seed = 0) {
  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.weight_decay = 1e-8;
  cfg.epochs = 10;
  cfg.batch_size = 32;
  cfg.validation_fraction = 0.0;
  cfg.seed = seed;
  return cfg;
}

// Adam on the MSE objective for exactly cfg.epochs epochs (no early stop).
absl::StatusOr<AeNet> FitAutoencoder(const std::vector<Vec>& rows,
                                     const TrainConfig& cfg);

}  // namespace tabadv

#endif  // TABADV_LEARNERS_AUTOENCODER_H_
