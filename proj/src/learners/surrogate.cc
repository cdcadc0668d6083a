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

#include "tabadv/learners/surrogate.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "tabadv/common/status_macros.h"
#include "tabadv/learners/tree.h"

namespace tabadv {
namespace {

absl::Status CheckSample(std::span<const double> x, int width) {
  if (static_cast<int>(x.size()) != width) {
    return absl::InvalidArgumentError(absl::StrCat(
        "dimension mismatch: got ", x.size(), ", expected ", width));
  }
  if (!AllFinite(x)) return absl::InvalidArgumentError("non-finite input");
  return absl::OkStatus();
}

absl::Status CheckChain(const Mlp& net, int in) {
  int prev = in;
  for (const DenseLayer& l : net.layers()) {
    if (l.in != prev || l.out < 1 ||
        l.weights.size() != static_cast<size_t>(l.in) * l.out ||
        l.bias.size() != static_cast<size_t>(l.out)) {
      return absl::InvalidArgumentError("inconsistent layer dimensions");
    }
    prev = l.out;
  }
  return absl::OkStatus();
}

}  // namespace

double BceWithLogit(double logit, int y) {
  const double softplus = logit > 0 ? logit + std::log1p(std::exp(-logit))
                                    : std::log1p(std::exp(logit));
  return softplus - y * logit;
}

absl::StatusOr<SurrogateModel> SurrogateModel::Create(
    int num_features, const SurrogateArch& arch, uint64_t seed) {
  if (num_features < 1) {
    return absl::InvalidArgumentError("num_features must be >= 1");
  }
  if (arch.embedding_width != kEmbeddingWidth) {
    return absl::InvalidArgumentError(
        absl::StrCat("embedding width must be ", kEmbeddingWidth, ", got ",
                     arch.embedding_width));
  }
  if (arch.head_width < 1 || !(arch.dropout >= 0.0 && arch.dropout < 1.0)) {
    return absl::InvalidArgumentError("invalid classification head");
  }
  for (const int w : arch.embed_hidden) {
    if (w < 1) return absl::InvalidArgumentError("hidden width must be >= 1");
  }
  Rng rng(seed);
  std::vector<int> widths = arch.embed_hidden;
  widths.push_back(kEmbeddingWidth);
  std::vector<Activation> acts(arch.embed_hidden.size(), arch.activation);
  acts.push_back(Activation::kIdentity);

  SurrogateModel m;
  m.scaler_ = Standardizer::Identity(num_features);
  m.embed_ = Mlp::Create(num_features, widths, acts, rng);
  const int head_widths[] = {arch.head_width, 1};
  const Activation head_acts[] = {arch.activation, Activation::kIdentity};
  m.head_ = Mlp::Create(kEmbeddingWidth, head_widths, head_acts, rng);
  m.head_.mutable_layers()[0].dropout = arch.dropout;
  return m;
}

absl::StatusOr<SurrogateModel> SurrogateModel::FromParts(Standardizer scaler,
                                                         Mlp embed, Mlp head) {
  if (embed.layers().empty() || head.layers().empty()) {
    return absl::InvalidArgumentError("empty network");
  }
  RETURN_IF_ERROR(CheckChain(embed, embed.in_width()));
  RETURN_IF_ERROR(CheckChain(head, embed.out_width()));
  if (embed.out_width() != kEmbeddingWidth) {
    return absl::InvalidArgumentError("embedding width must be 16");
  }
  if (head.out_width() != 1) {
    return absl::InvalidArgumentError("head must produce one logit");
  }
  if (scaler.mean.size() != static_cast<size_t>(embed.in_width()) ||
      scaler.scale.size() != scaler.mean.size()) {
    return absl::InvalidArgumentError("scaler width mismatch");
  }
  SurrogateModel m;
  m.scaler_ = std::move(scaler);
  m.embed_ = std::move(embed);
  m.head_ = std::move(head);
  return m;
}

Vec SurrogateModel::Embed(std::span<const double> x) const {
  return embed_.Forward(scaler_.Apply(x));
}

absl::StatusOr<Vec> SurrogateModel::ForwardEmbed(
    std::span<const double> x) const {
  RETURN_IF_ERROR(CheckSample(x, num_features()));
  return Embed(x);
}

double SurrogateModel::Logit(std::span<const double> x) const {
  return head_.Forward(Embed(x))[0];
}

double SurrogateModel::Proba(std::span<const double> x) const {
  return Sigmoid(Logit(x));
}

absl::StatusOr<double> SurrogateModel::AdvLoss(std::span<const double> x_adv,
                                               std::span<const double> x,
                                               int y, double alpha) const {
  RETURN_IF_ERROR(CheckSample(x_adv, num_features()));
  RETURN_IF_ERROR(CheckSample(x, num_features()));
  const Vec e_adv = Embed(x_adv);
  const Vec e = Embed(x);
  const double logit = head_.Forward(e_adv)[0];
  const double loss = -BceWithLogit(logit, y) + alpha * Distance(e_adv, e);
  if (!std::isfinite(loss)) {
    return absl::InternalError("non-finite adversarial loss");
  }
  return loss;
}

absl::StatusOr<Vec> SurrogateModel::GradInput(std::span<const double> x_adv,
                                              std::span<const double> x, int y,
                                              double alpha) const {
  RETURN_IF_ERROR(CheckSample(x_adv, num_features()));
  RETURN_IF_ERROR(CheckSample(x, num_features()));
  Mlp::Cache embed_cache;
  Mlp::Cache head_cache;
  const Vec e_adv = embed_.Forward(scaler_.Apply(x_adv), &embed_cache, nullptr);
  const Vec e = Embed(x);
  const double logit = head_.Forward(e_adv, &head_cache, nullptr)[0];

  // d(-BCE)/d(logit) = y - sigmoid(logit).
  const double d_logit[] = {y - Sigmoid(logit)};
  Vec d_emb = head_.Backward(head_cache, d_logit, nullptr);
  const double dist = Distance(e_adv, e);
  if (dist > 0.0 && alpha != 0.0) {
    for (size_t k = 0; k < d_emb.size(); ++k) {
      d_emb[k] += alpha * (e_adv[k] - e[k]) / dist;
    }
  }
  Vec grad = embed_.Backward(embed_cache, d_emb, nullptr);
  for (size_t j = 0; j < grad.size(); ++j) grad[j] /= scaler_.scale[j];
  if (!AllFinite(grad)) {
    return absl::InternalError("non-finite gradient");
  }
  return grad;
}

absl::StatusOr<SurrogateModel> TrainSurrogate(const std::vector<Vec>& rows,
                                              std::span<const int> labels,
                                              const SurrogateArch& arch,
                                              const TrainConfig& cfg,
                                              TrainReport* report) {
  RETURN_IF_ERROR(ValidateTrainConfig(cfg));
  if (rows.empty()) return absl::InvalidArgumentError("empty training set");
  if (rows.size() != labels.size()) {
    return absl::InvalidArgumentError("row/label count mismatch");
  }
  for (const int l : labels) {
    if (l != 0 && l != 1) {
      return absl::InvalidArgumentError("labels must be 0 or 1");
    }
  }
  const int d = static_cast<int>(rows[0].size());
  ASSIGN_OR_RETURN(SurrogateModel model,
                   SurrogateModel::Create(d, arch, cfg.seed));
  model.scaler_ = Standardizer::Fit(rows);

  Rng rng(cfg.seed ^ 0x5eedULL);
  std::vector<size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  size_t n_val = static_cast<size_t>(
      std::llround(cfg.validation_fraction * static_cast<double>(rows.size())));
  if (cfg.validation_fraction > 0.0 && n_val == 0 && rows.size() >= 2) n_val = 1;
  std::vector<size_t> val(order.begin(), order.begin() + n_val);
  std::vector<size_t> train(order.begin() + n_val, order.end());
  if (val.empty()) val = train;

  std::vector<Vec> scaled(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    scaled[i] = model.scaler_.Apply(rows[i]);
  }
  auto validation_loss = [&]() {
    double s = 0.0;
    for (const size_t i : val) {
      s += BceWithLogit(model.head_.Forward(model.embed_.Forward(scaled[i]))[0],
                        labels[i]);
    }
    return s / static_cast<double>(val.size());
  };

  Adam adam(cfg.learning_rate, cfg.weight_decay);
  SurrogateModel best = model;
  double best_loss = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  int wait = 0;
  int epoch = 0;
  Mlp::Cache embed_cache, head_cache;
  for (epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(train.begin(), train.end(), rng);
    for (size_t start = 0; start < train.size(); start += cfg.batch_size) {
      const size_t end = std::min(train.size(), start + cfg.batch_size);
      ParamGrads g_embed = model.embed_.ZeroGrads();
      ParamGrads g_head = model.head_.ZeroGrads();
      for (size_t b = start; b < end; ++b) {
        const size_t i = train[b];
        const Vec e = model.embed_.Forward(scaled[i], &embed_cache, nullptr);
        const double logit = model.head_.Forward(e, &head_cache, &rng)[0];
        const double d_logit[] = {Sigmoid(logit) - labels[i]};
        const Vec d_emb = model.head_.Backward(head_cache, d_logit, &g_head);
        model.embed_.Backward(embed_cache, d_emb, &g_embed);
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      std::vector<std::span<double>> params = model.embed_.Parameters();
      for (auto p : model.head_.Parameters()) params.push_back(p);
      ParamGrads grads = std::move(g_embed);
      for (Vec& g : g_head) grads.push_back(std::move(g));
      for (Vec& g : grads) {
        for (double& v : g) v *= inv;
      }
      adam.Step(std::move(params), grads);
    }
    const double loss = validation_loss();
    if (!std::isfinite(loss)) {
      return absl::InternalError(
          absl::StrCat("divergence: non-finite loss at epoch ", epoch));
    }
    if (loss < best_loss) {
      best_loss = loss;
      best_epoch = epoch;
      best = model;
      wait = 0;
    } else if (++wait >= cfg.patience) {
      break;
    }
  }
  if (report != nullptr) {
    report->epochs_run = std::min(epoch, cfg.epochs);
    report->best_epoch = best_epoch;
    report->best_validation_loss = best_loss;
  }
  return best;
}

}  // namespace tabadv
