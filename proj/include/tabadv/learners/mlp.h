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

#ifndef TABADV_LEARNERS_MLP_H_
#define TABADV_LEARNERS_MLP_H_

#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "tabadv/common/random.h"
#include "tabadv/common/vec.h"

namespace tabadv {

enum class Activation { kIdentity, kRelu, kPrelu };

absl::string_view ActivationName(Activation a);
absl::StatusOr<Activation> ParseActivation(absl::string_view name);

struct DenseLayer {
  int in = 0;
  int out = 0;
  Activation activation = Activation::kIdentity;
  Vec weights;  // out x in, row-major.
  Vec bias;     // out
  // Learnable negative-side slope, only used by kPrelu.
  double prelu_slope = 0.25;
  // Inverted dropout applied to this layer's output while training.
  double dropout = 0.0;
};

// Per-layer parameter gradients, shaped like Mlp::Parameters().
using ParamGrads = std::vector<Vec>;

// Stack of dense layers with hand-written reverse mode.
class Mlp {
 public:
  struct Cache {
    std::vector<Vec> inputs;  // Input to each layer.
    std::vector<Vec> pre;     // Pre-activation of each layer.
    std::vector<Vec> masks;   // Dropout masks (empty when inactive).
  };

  Mlp() = default;
  explicit Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {}

  // Glorot-uniform weights, zero biases.
  static Mlp Create(int in, std::span<const int> widths,
                    std::span<const Activation> activations, Rng& rng);

  int in_width() const { return layers_.empty() ? 0 : layers_.front().in; }
  int out_width() const { return layers_.empty() ? 0 : layers_.back().out; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }

  // Inference forward pass (dropout inactive).
  Vec Forward(std::span<const double> x) const;
  // Training forward pass. Dropout is sampled from `rng` when non-null.
  Vec Forward(std::span<const double> x, Cache* cache, Rng* rng) const;
  // Accumulates parameter gradients into `grads` (if non-null) and returns
  // d(loss)/d(input).
  Vec Backward(const Cache& cache, std::span<const double> d_out,
               ParamGrads* grads) const;

  // Mutable views over every parameter: weights, bias, slope per layer.
  std::vector<std::span<double>> Parameters();
  ParamGrads ZeroGrads() const;

 private:
  std::vector<DenseLayer> layers_;
};

// Adam. Weight decay is added to the gradient (L2 penalty style).
class Adam {
 public:
  Adam(double learning_rate, double weight_decay = 0.0, double beta1 = 0.9,
       double beta2 = 0.999, double epsilon = 1e-7)
      : lr_(learning_rate),
        weight_decay_(weight_decay),
        beta1_(beta1),
        beta2_(beta2),
        epsilon_(epsilon) {}

  // Updates params in place from grads (same shapes).
  void Step(std::vector<std::span<double>> params, const ParamGrads& grads);

  // Returns the update for a single vector without applying it; keeps state.
  Vec Delta(std::span<const double> grad);

 private:
  double lr_;
  double weight_decay_;
  double beta1_;
  double beta2_;
  double epsilon_;
  long step_ = 0;
  std::vector<Vec> m_;
  std::vector<Vec> v_;
};

// Per-feature affine scaling (x - mean) / scale; constant columns get scale 1.
struct Standardizer {
  Vec mean;
  Vec scale;

  static Standardizer Fit(const std::vector<Vec>& rows);
  static Standardizer Identity(int width);
  Vec Apply(std::span<const double> x) const;
};

}  // namespace tabadv

#endif  // TABADV_LEARNERS_MLP_H_
