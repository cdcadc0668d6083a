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

#ifndef TABADV_LEARNERS_TRAIN_CONFIG_H_
#define TABADV_LEARNERS_TRAIN_CONFIG_H_

#include <cstdint>

#include "absl/status/status.h"

namespace tabadv {

struct TrainConfig {
  int epochs = 70;
  double learning_rate = 1e-2;
  double weight_decay = 0.0;
  // Epochs without validation improvement before stopping. 0 and 1 both stop
  // at the first non-improving epoch.
  int patience = 2;
  uint64_t seed = 0;
  int batch_size = 32;
  // Held-out share of the training rows used for early stopping.
  double validation_fraction = 0.1;
};

inline absl::Status ValidateTrainConfig(const TrainConfig& cfg) {
  if (cfg.epochs < 1) return absl::InvalidArgumentError("epochs must be >= 1");
  if (cfg.patience < 0) {
    return absl::InvalidArgumentError("patience must be >= 0");
  }
  if (cfg.batch_size < 1) {
    return absl::InvalidArgumentError("batch_size must be >= 1");
  }
  if (!(cfg.learning_rate > 0.0) || cfg.weight_decay < 0.0) {
    return absl::InvalidArgumentError("invalid optimizer settings");
  }
  if (!(cfg.validation_fraction >= 0.0 && cfg.validation_fraction < 1.0)) {
    return absl::InvalidArgumentError("validation_fraction must be in [0, 1)");
  }
  return absl::OkStatus();
}

}  // namespace tabadv

#endif  // TABADV_LEARNERS_TRAIN_CONFIG_H_
