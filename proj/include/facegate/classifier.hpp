//
// Copyright 2026 The Facegate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "facegate/features.hpp"

namespace facegate::classifier {

using features::FeatureMask;
using features::FeatureVector;
using features::Scaler;

inline constexpr std::size_t kHiddenUnits = 128;
inline constexpr std::size_t kClasses = 2;

// Output slot order: 0 = subject, 1 = bystander (the positive class).
enum class Label : int { kSubject = 0, kBystander = 1 };

std::string_view to_string(Label label);
Label parse_label(std::string_view text);  // "subject" / "bystander"

struct TrainConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t batch_size = 64;
  std::size_t epochs = 50;
  double dropout_rate = 0.5;
  std::uint64_t seed = 0;

  void validate() const;  // throws kConfigError
};

// Two fully connected layers: input -> 128 (ReLU, dropout) -> 2 (log-softmax).
// Weight matrices are row-major: w1 is kHiddenUnits x input_dim, w2 is
// kClasses x kHiddenUnits.
struct MlpModel {
  static constexpr std::uint32_t kFormatVersion = 1;

  FeatureMask mask = FeatureMask::kFFFM;
  std::size_t input_dim = 0;
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  std::vector<double> b2;
  double dropout_rate = 0.0;
  Scaler scaler;  // applied by predict(); identity when mean/scale are empty

  void validate() const;  // shapes consistent with mask, parameters finite
  bool operator==(const MlpModel& other) const;
};

struct LabeledExample {
  FeatureVector features;
  Label label = Label::kSubject;
  std::string face_id;
  std::string image_id;
};

using LogProbs = std::array<double, kClasses>;

// Inverted dropout: each hidden unit survives with probability 1 - rate and
// survivors are scaled by 1 / (1 - rate).
class DropoutSampler {
 public:
  DropoutSampler(double rate, std::uint64_t seed) : rate_(rate), rng_(seed) {}
  void sample(std::span<double> mask);
  double rate() const { return rate_; }

 private:
  double rate_;
  std::mt19937_64 rng_;
};

// He-normal w1, Glorot-normal w2, zero biases; fully determined by
// config.seed.
MlpModel init_model(FeatureMask mask, const TrainConfig& config);

// Hidden activations after ReLU (and dropout when a sampler is given).
std::vector<double> hidden_activations(const MlpModel& model, std::span<const double> x,
                                       DropoutSampler* dropout = nullptr);

// x must already be scaled. Throws kShapeMismatch on a length mismatch.
LogProbs forward(const MlpModel& model, std::span<const double> x,
                 DropoutSampler* dropout = nullptr);

double nll_loss(const LogProbs& log_probs, Label label);

struct Gradients {
  std::vector<double> w1, b1, w2, b2;
};

struct BackwardResult {
  double mean_loss = 0.0;
  Gradients grads;  // gradient of the mean loss
};

// Reverse-mode gradients of the mean NLL over a batch of scaled inputs.
// Without a sampler the pass is exact for the dropout-free network.
BackwardResult backward(const MlpModel& model, std::span<const std::vector<double>> xs,
                        std::span<const Label> labels, DropoutSampler* dropout = nullptr);

struct TrainResult {
  MlpModel model;
  std::vector<double> loss_history;  // mean training loss per epoch
};

// Mini-batch SGD with momentum. The scaler is fit on the dataset first and
// stored in the returned model. Throws kEmptyDataset, kShapeMismatch and
// kDivergence (non-finite loss, naming the epoch).
TrainResult train(std::span<const LabeledExample> dataset, const TrainConfig& config);

struct Prediction {
  Label label = Label::kBystander;
  double bystander_probability = 0.5;
};

// Raw (unscaled) features. Ties go to the bystander class.
Prediction predict(const MlpModel& model, std::span<const double> raw);
Prediction predict(const MlpModel& model, const FeatureVector& raw);

// Parallel over examples; output order matches input order.
std::vector<Prediction> predict_batch(const MlpModel& model, std::span<const FeatureVector> raw);

// Binary container, layout in docs/model_format.md. Loading throws
// kFormatError (truncated, bad magic, checksum mismatch) or
// kUnsupportedVersion.
void save_model(const MlpModel& model, std::ostream& out);
void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(std::istream& in);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace facegate::classifier
