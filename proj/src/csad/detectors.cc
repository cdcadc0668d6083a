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


#include "tabadv/csad/detectors.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "tabadv/common/random.h"
#include "tabadv/common/status_macros.h"

namespace tabadv {
namespace {

struct Split {
  std::vector<Vec> train;
  std::vector<Vec> validation;
};

absl::StatusOr<Split> SplitRows(const std::vector<Vec>& rows, double fraction,
                                uint64_t seed) {
  std::vector<size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const size_t n_val = std::max<size_t>(
      2, static_cast<size_t>(std::llround(fraction * rows.size())));
  if (n_val + 2 > rows.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("too few rows (", rows.size(), ") to split"));
  }
  Split s;
  for (size_t i = 0; i < order.size(); ++i) {
    (i < n_val ? s.validation : s.train).push_back(rows[order[i]]);
  }
  return s;
}

absl::StatusOr<Detector> FitDetector(const std::vector<Vec>& rows,
                                     DetectorKind kind, const BankConfig& cfg,
                                     uint64_t index, double if_target) {
  ASSIGN_OR_RETURN(Split split,
                   SplitRows(rows, cfg.validation_fraction,
                             DeriveSeed(cfg.seed, "bank-split", index)));
  Detector det;
  det.kind = kind;
  if (kind == DetectorKind::kAutoencoder) {
    TrainConfig ae_cfg = cfg.ae;
    ae_cfg.seed = DeriveSeed(cfg.seed, "bank-ae", index);
    ASSIGN_OR_RETURN(AeNet ae, FitAutoencoder(split.train, ae_cfg));
    det.ae = std::move(ae);
  } else {
    IsolationForestParams p = cfg.forest;
    p.seed = DeriveSeed(cfg.seed, "bank-if", index);
    ASSIGN_OR_RETURN(IsolationForest f, FitIsolationForest(split.train, p));
    det.forest = std::move(f);
  }
  for (const Vec& v : split.validation) {
    det.validation_scores.push_back(det.Score(v));
  }
  if (kind == DetectorKind::kAutoencoder) {
    ASSIGN_OR_RETURN(det.threshold, AeThreshold(det.validation_scores));
  } else {
    ASSIGN_OR_RETURN(det.threshold,
                     CalibrateIfThreshold(det.validation_scores, if_target));
  }
  det.validation_fpr = FlaggedFraction(det.validation_scores, det.threshold);
  return det;
}

}  // namespace

absl::string_view DetectorKindName(DetectorKind kind) {
  return kind == DetectorKind::kAutoencoder ? "ae" : "if";
}

absl::StatusOr<DetectorKind> ParseDetectorKind(absl::string_view name) {
  if (name == "ae") return DetectorKind::kAutoencoder;
  if (name == "if") return DetectorKind::kIsolationForest;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown detector kind '", name, "'"));
}

absl::StatusOr<double> AeThreshold(std::span<const double> validation_errors) {
  const size_t n = validation_errors.size();
  if (n < 2) {
    return absl::InvalidArgumentError(
        "AE threshold needs at least 2 validation errors");
  }
  double mean = 0.0;
  for (const double e : validation_errors) mean += e;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (const double e : validation_errors) var += (e - mean) * (e - mean);
  var /= static_cast<double>(n);
  return mean + 2.0 * std::sqrt(var);
}

absl::StatusOr<double> CalibrateIfThreshold(std::span<const double> scores,
                                            double target_fpr) {
  if (scores.empty()) return absl::InvalidArgumentError("empty validation");
  if (!(target_fpr >= 0.0 && target_fpr < 1.0)) {
    return absl::InvalidArgumentError("target_fpr must be in [0, 1)");
  }
  Vec sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const size_t m = static_cast<size_t>(
      std::llround(target_fpr * static_cast<double>(sorted.size())));
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (m == 0) return std::nextafter(sorted.front(), kInf);
  if (m >= sorted.size()) return std::nextafter(sorted.back(), -kInf);
  return sorted[m];
}

double FlaggedFraction(std::span<const double> values, double threshold) {
  if (values.empty()) return 0.0;
  const auto flagged = std::count_if(values.begin(), values.end(),
                                     [&](double v) { return v > threshold; });
  return static_cast<double>(flagged) / static_cast<double>(values.size());
}

double Detector::Score(std::span<const double> x) const {
  return kind == DetectorKind::kAutoencoder ? ae->ReconstructionError(x)
                                            : forest->Score(x);
}

std::vector<double> DetectorBank::ValidationFprs() const {
  std::vector<double> out;
  for (const Detector& d : detectors_) out.push_back(d.validation_fpr);
  return out;
}

absl::StatusOr<bool> DetectorBank::IsAnomalous(std::span<const double> x,
                                               int predicted_class) const {
  if (mode_ == DetectionMode::kStandard) {
    return detectors_.front().IsAnomalous(x);
  }
  if (predicted_class < 0 ||
      predicted_class >= static_cast<int>(detectors_.size())) {
    return absl::InvalidArgumentError(
        absl::StrCat("invalid predicted class ", predicted_class));
  }
  return detectors_[predicted_class].IsAnomalous(x);
}

absl::StatusOr<double> DetectorBank::DetectionRate(
    const std::vector<Vec>& samples, std::span<const int> classes) const {
  if (samples.empty()) return absl::InvalidArgumentError("empty sample set");
  if (samples.size() != classes.size()) {
    return absl::InvalidArgumentError("samples and classes length mismatch");
  }
  size_t flagged = 0;
  for (size_t i = 0; i < samples.size(); ++i) {
    ASSIGN_OR_RETURN(const bool a, IsAnomalous(samples[i], classes[i]));
    flagged += a ? 1 : 0;
  }
  return static_cast<double>(flagged) / static_cast<double>(samples.size());
}

absl::StatusOr<DetectorBank> FitBank(const Dataset& benign, DetectorKind kind,
                                     DetectionMode mode,
                                     const BankConfig& cfg) {
  std::vector<std::vector<Vec>> groups;
  if (mode == DetectionMode::kCsad) {
    for (int c = 0; c < benign.schema.n_classes; ++c) {
      groups.push_back(benign.RowsOfClass(c));
      if (static_cast<int>(groups.back().size()) < cfg.min_samples) {
        return absl::FailedPreconditionError(absl::StrCat(
            "class ", c, " has ", groups.back().size(),
            " benign rows, fewer than min_samples ", cfg.min_samples));
      }
    }
  } else {
    groups.push_back(benign.rows);
    if (static_cast<int>(benign.size()) < cfg.min_samples) {
      return absl::FailedPreconditionError(absl::StrCat(
          "only ", benign.size(), " benign rows, fewer than min_samples ",
          cfg.min_samples));
    }
  }
  if (!cfg.if_target_fpr.empty() && cfg.if_target_fpr.size() != groups.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("expected ", groups.size(), " IF target FPRs, got ",
                     cfg.if_target_fpr.size()));
  }
  std::vector<Detector> detectors;
  for (size_t g = 0; g < groups.size(); ++g) {
    // Pooled detectors use an index no class can take.
    const uint64_t index =
        mode == DetectionMode::kCsad ? g : static_cast<uint64_t>(1) << 32;
    const double target =
        cfg.if_target_fpr.empty() ? cfg.default_if_fpr : cfg.if_target_fpr[g];
    auto det = FitDetector(groups[g], kind, cfg, index, target);
    if (!det.ok()) {
      return absl::Status(det.status().code(),
                          absl::StrCat("detector ", g, ": ",
                                       det.status().message()));
    }
    detectors.push_back(*std::move(det));
  }
  return DetectorBank(mode, kind, std::move(detectors));
}

}  // namespace tabadv
