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

#ifndef TABADV_LEARNERS_SURROGATE_H_
#define TABADV_LEARNERS_SURROGATE_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "tabadv/common/vec.h"
#include "tabadv/learners/classifier.h"
#include "tabadv/learners/mlp.h"
#include "tabadv/learners/train_config.h"

namespace tabadv {

// Embedding sub-model: standardized input -> hidden layers -> 16-wide linear
// embedding. Classification sub-model: dense(16 -> head_width) with dropout,
// then a single logit.
struct SurrogateArch {
  std::vector<int> embed_hidden = {256};
  Activation activation = Activation::kRelu;
  int embedding_width = 16;
  int head_width = 16;
  double dropout = 0.1;
};

struct TrainReport {
  int epochs_run = 0;
  int best_epoch = 0;
  double best_validation_loss = 0.0;
};

class SurrogateModel : public Classifier {
 public:
  static constexpr int kEmbeddingWidth = 16;

  SurrogateModel() = default;

  static absl::StatusOr<SurrogateModel> Create(int num_features,
                                               const SurrogateArch& arch,
                                               uint64_t seed);
  // Assembles a model from parts, checking layer shapes.
  static absl::StatusOr<SurrogateModel> FromParts(Standardizer scaler,
                                                  Mlp embed, Mlp head);

  int num_features() const override { return embed_.in_width(); }
  double Proba(std::span<const double> x) const override;
  double Logit(std::span<const double> x) const;

  // Embedding of a raw (unstandardized) sample. Deterministic.
  Vec Embed(std::span<const double> x) const;
  absl::StatusOr<Vec> ForwardEmbed(std::span<const double> x) const;

  // -BCE(M(x_adv), y) + alpha * ||embed(x_adv) - embed(x)||_2
  absl::StatusOr<double> AdvLoss(std::span<const double> x_adv,
                                 std::span<const double> x, int y,
                                 double alpha) const;
  // Exact gradient of AdvLoss w.r.t. x_adv. The distance term contributes
  // zero where the two embeddings coincide.
  absl::StatusOr<Vec> GradInput(std::span<const double> x_adv,
                                std::span<const double> x, int y,
                                double alpha) const;

  const Standardizer& scaler() const { return scaler_; }
  const Mlp& embed() const { return embed_; }
  const Mlp& head() const { return head_; }
  Mlp& mutable_embed() { return embed_; }
  Mlp& mutable_head() { return head_; }

 private:
  friend absl::StatusOr<SurrogateModel> TrainSurrogate(
      const std::vector<Vec>&, std::span<const int>, const SurrogateArch&,
      const TrainConfig&, TrainReport*);

  Standardizer scaler_;
  Mlp embed_;
  Mlp head_;
};

// Binary cross-entropy training with Adam and early stopping on a seeded
// validation split; the parameters of the best validation epoch are returned.
absl::StatusOr<SurrogateModel> TrainSurrogate(const std::vector<Vec>& rows,
                                              std::span<const int> labels,
                                              const SurrogateArch& arch,
                                              const TrainConfig& cfg,
                                              TrainReport* report = nullptr);

// softplus(z) - y * z, i.e. BCE(sigmoid(z), y).
double BceWithLogit(double logit, int y);

}  // namespace tabadv

#endif  // TABADV_LEARNERS_SURROGATE_H_
