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


#ifndef TABADV_CSAD_DETECTORS_H_
#define TABADV_CSAD_DETECTORS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "tabadv/common/mode.h"
#include "tabadv/common/vec.h"
#include "tabadv/csad/isolation_forest.h"
#include "tabadv/learners/autoencoder.h"
#include "tabadv/learners/train_config.h"
#include "tabadv/schema/schema.h"

namespace tabadv {

enum class DetectorKind { kIsolationForest, kAutoencoder };

absl::string_view DetectorKindName(DetectorKind kind);
absl::StatusOr<DetectorKind> ParseDetectorKind(absl::string_view name);

// mean + 2 * population std.
absl::StatusOr<double> AeThreshold(std::span<const double> validation_errors);

// Score threshold flagging round(target_fpr * n) of the benign scores
// (strictly greater is anomalous). With target 0 it lies just above the max.
absl::StatusOr<double> CalibrateIfThreshold(std::span<const double> scores,
                                            double target_fpr);

// Fraction of values strictly above `threshold`.
double FlaggedFraction(std::span<const double> values, double threshold);

// One fitted detector. Larger scores are more anomalous; a sample is flagged
// when its score is strictly greater than the threshold.
struct Detector {
  DetectorKind kind = DetectorKind::kAutoencoder;
  std::optional<AeNet> ae;
  std::optional<IsolationForest> forest;
  double threshold = 0.0;
  // Scores on the held-out benign validation rows.
  Vec validation_scores;
  double validation_fpr = 0.0;

  double Score(std::span<const double> x) const;
  bool IsAnomalous(std::span<const double> x) const {
    return Score(x) > threshold;
  }
};

struct BankConfig {
  int min_samples = 20;
  // Held-out share of each detector's benign rows (threshold calibration).
  double validation_fraction = 0.2;
  TrainConfig ae = AutoencoderTrainConfig();
  IsolationForestParams forest;
  // Per-detector IF target FPRs, e.g. the matching AE bank's validation
  // FPRs. When empty every detector uses `default_if_fpr`.
  std::vector<double> if_target_fpr;
  double default_if_fpr = 0.05;
  uint64_t seed = 0;
};

class DetectorBank {
 public:
  DetectorBank() = default;
  DetectorBank(DetectionMode mode, DetectorKind kind,
               std::vector<Detector> detectors)
      : mode_(mode), kind_(kind), detectors_(std::move(detectors)) {}

  DetectionMode mode() const { return mode_; }
  DetectorKind kind() const { return kind_; }
  const std::vector<Detector>& detectors() const { return detectors_; }
  std::vector<double> ValidationFprs() const;

  // Routes to the predicted class's detector in csad mode.
  absl::StatusOr<bool> IsAnomalous(std::span<const double> x,
                                   int predicted_class) const;
  absl::StatusOr<double> DetectionRate(const std::vector<Vec>& samples,
                                       std::span<const int> classes) const;

 private:
  DetectionMode mode_ = DetectionMode::kCsad;
  DetectorKind kind_ = DetectorKind::kAutoencoder;
  std::vector<Detector> detectors_;
};

// Benign rows of each class (csad) or all rows (standard), split into a
// training part and a seeded validation part. The split is the same for
// both detector kinds, so AE and IF banks share their validation rows.
absl::StatusOr<DetectorBank> FitBank(const Dataset& benign, DetectorKind kind,
                                     DetectionMode mode, const BankConfig& cfg);

}  // namespace tabadv

#endif  // TABADV_CSAD_DETECTORS_H_
