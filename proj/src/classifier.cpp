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

#include "facegate/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "facegate/error.hpp"
#include "facegate/seed.hpp"

namespace facegate::classifier {

namespace {

struct Pass {
  std::vector<double> pre;     // W1 x + b1
  std::vector<double> hidden;  // ReLU(pre) * dropout multiplier
  std::vector<double> multiplier;
  std::array<double, kClasses> logits{};
  LogProbs log_probs{};
};

void check_input(const MlpModel& model, std::span<const double> x) {
  if (x.size() != model.input_dim) {
    throw Error(ErrorCode::kShapeMismatch, "model expects " + std::to_string(model.input_dim) +
                                               " inputs, got " + std::to_string(x.size()));
  }
}

Pass run_forward(const MlpModel& model, std::span<const double> x, DropoutSampler* dropout) {
  check_input(model, x);
  const std::size_t d = model.input_dim;
  Pass p;
  p.pre.resize(kHiddenUnits);
  p.hidden.resize(kHiddenUnits);
  for (std::size_t j = 0; j < kHiddenUnits; ++j) {
    const double* row = model.w1.data() + j * d;
    double acc = model.b1[j];
    for (std::size_t k = 0; k < d; ++k) acc += row[k] * x[k];
    p.pre[j] = acc;
    p.hidden[j] = acc > 0.0 ? acc : 0.0;
  }
  if (dropout) {
    p.multiplier.resize(kHiddenUnits);
    dropout->sample(p.multiplier);
    for (std::size_t j = 0; j < kHiddenUnits; ++j) p.hidden[j] *= p.multiplier[j];
  }
  for (std::size_t c = 0; c < kClasses; ++c) {
    const double* row = model.w2.data() + c * kHiddenUnits;
    double acc = model.b2[c];
    for (std::size_t j = 0; j < kHiddenUnits; ++j) acc += row[j] * p.hidden[j];
    p.logits[c] = acc;
  }
  const double m = std::max(p.logits[0], p.logits[1]);
  const double lse = m + std::log(std::exp(p.logits[0] - m) + std::exp(p.logits[1] - m));
  for (std::size_t c = 0; c < kClasses; ++c) p.log_probs[c] = p.logits[c] - lse;
  return p;
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

std::string_view to_string(Label label) {
  return label == Label::kBystander ? "bystander" : "subject";
}

Label parse_label(std::string_view text) {
  if (text == "bystander") return Label::kBystander;
  if (text == "subject") return Label::kSubject;
  throw Error(ErrorCode::kFormatError, "unknown label '" + std::string(text) + "'");
}

void TrainConfig::validate() const {
  // A zero learning rate is accepted: it is the "no update" probe.
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::kConfigError, "learning_rate must be a finite value >= 0");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw Error(ErrorCode::kConfigError, "momentum must be in [0, 1)");
  }
  if (batch_size < 1) throw Error(ErrorCode::kConfigError, "batch_size must be >= 1");
  if (epochs < 1) throw Error(ErrorCode::kConfigError, "epochs must be >= 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw Error(ErrorCode::kConfigError, "dropout_rate must be in [0, 1)");
  }
}

void MlpModel::validate() const {
  const std::size_t d = features::input_dim(mask);
  if (input_dim != d || w1.size() != kHiddenUnits * d || b1.size() != kHiddenUnits ||
      w2.size() != kClasses * kHiddenUnits || b2.size() != kClasses) {
    throw Error(ErrorCode::kShapeMismatch, "model parameter shapes do not match mask " +
                                               std::string(features::to_string(mask)));
  }
  if (!scaler.mean.empty() && (scaler.mean.size() != d || scaler.scale.size() != d)) {
    throw Error(ErrorCode::kShapeMismatch, "scaler dimension does not match the model input");
  }
  if (!all_finite(w1) || !all_finite(b1) || !all_finite(w2) || !all_finite(b2)) {
    throw Error(ErrorCode::kDivergence, "model holds non-finite parameters");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw Error(ErrorCode::kFormatError, "dropout_rate outside [0, 1)");
  }
}

bool MlpModel::operator==(const MlpModel& o) const {
  return mask == o.mask && input_dim == o.input_dim && w1 == o.w1 && b1 == o.b1 && w2 == o.w2 &&
         b2 == o.b2 && dropout_rate == o.dropout_rate && scaler.mean == o.scaler.mean &&
         scaler.scale == o.scaler.scale;
}

void DropoutSampler::sample(std::span<double> mask) {
  if (rate_ <= 0.0) {
    std::fill(mask.begin(), mask.end(), 1.0);
    return;
  }
  std::bernoulli_distribution keep(1.0 - rate_);
  const double survivor = 1.0 / (1.0 - rate_);
  for (double& m : mask) m = keep(rng_) ? survivor : 0.0;
}

MlpModel init_model(FeatureMask mask, const TrainConfig& config) {
  config.validate();
  MlpModel m;
  m.mask = mask;
  m.input_dim = features::input_dim(mask);
  m.dropout_rate = config.dropout_rate;
  std::mt19937_64 rng(derive_seed(config.seed, "init"));
  std::normal_distribution<double> he(0.0, std::sqrt(2.0 / static_cast<double>(m.input_dim)));
  std::normal_distribution<double> xavier(0.0,
                                          std::sqrt(2.0 / static_cast<double>(kHiddenUnits + kClasses)));
  m.w1.resize(kHiddenUnits * m.input_dim);
  for (double& w : m.w1) w = he(rng);
  m.b1.assign(kHiddenUnits, 0.0);
  m.w2.resize(kClasses * kHiddenUnits);
  for (double& w : m.w2) w = xavier(rng);
  m.b2.assign(kClasses, 0.0);
  return m;
}

std::vector<double> hidden_activations(const MlpModel& model, std::span<const double> x,
                                       DropoutSampler* dropout) {
  return run_forward(model, x, dropout).hidden;
}

LogProbs forward(const MlpModel& model, std::span<const double> x, DropoutSampler* dropout) {
  return run_forward(model, x, dropout).log_probs;
}

double nll_loss(const LogProbs& log_probs, Label label) {
  return -log_probs[static_cast<std::size_t>(label)];
}

BackwardResult backward(const MlpModel& model, std::span<const std::vector<double>> xs,
                        std::span<const Label> labels, DropoutSampler* dropout) {
  if (xs.size() != labels.size()) {
    throw Error(ErrorCode::kShapeMismatch, "batch inputs and labels differ in length");
  }
  const std::size_t d = model.input_dim;
  BackwardResult r;
  Gradients& g = r.grads;
  g.w1.assign(model.w1.size(), 0.0);
  g.b1.assign(kHiddenUnits, 0.0);
  g.w2.assign(model.w2.size(), 0.0);
  g.b2.assign(kClasses, 0.0);
  if (xs.empty()) return r;

  std::vector<double> d_pre(kHiddenUnits);
  for (std::size_t n = 0; n < xs.size(); ++n) {
    const Pass p = run_forward(model, xs[n], dropout);
    const auto y = static_cast<std::size_t>(labels[n]);
    r.mean_loss += -p.log_probs[y];

    // d loss / d logits = softmax - onehot
    std::array<double, kClasses> d_logits{};
    for (std::size_t c = 0; c < kClasses; ++c) {
      d_logits[c] = std::exp(p.log_probs[c]) - (c == y ? 1.0 : 0.0);
      g.b2[c] += d_logits[c];
      double* gw2 = g.w2.data() + c * kHiddenUnits;
      for (std::size_t j = 0; j < kHiddenUnits; ++j) gw2[j] += d_logits[c] * p.hidden[j];
    }
    for (std::size_t j = 0; j < kHiddenUnits; ++j) {
      double d_hidden = 0.0;
      for (std::size_t c = 0; c < kClasses; ++c) {
        d_hidden += model.w2[c * kHiddenUnits + j] * d_logits[c];
      }
      if (!p.multiplier.empty()) d_hidden *= p.multiplier[j];
      d_pre[j] = p.pre[j] > 0.0 ? d_hidden : 0.0;
    }
    for (std::size_t j = 0; j < kHiddenUnits; ++j) {
      if (d_pre[j] == 0.0) continue;
      g.b1[j] += d_pre[j];
      double* gw1 = g.w1.data() + j * d;
      const auto& x = xs[n];
      for (std::size_t k = 0; k < d; ++k) gw1[k] += d_pre[j] * x[k];
    }
  }
  const double inv = 1.0 / static_cast<double>(xs.size());
  r.mean_loss *= inv;
  for (auto* v : {&g.w1, &g.b1, &g.w2, &g.b2}) {
    for (double& x : *v) x *= inv;
  }
  return r;
}

TrainResult train(std::span<const LabeledExample> dataset, const TrainConfig& config) {
  config.validate();
  if (dataset.empty()) throw Error(ErrorCode::kEmptyDataset, "training set is empty");
  const FeatureMask mask = dataset.front().features.mask;
  const std::size_t dim = features::input_dim(mask);
  for (const auto& ex : dataset) {
    if (ex.features.mask != mask || ex.features.values.size() != dim) {
      throw Error(ErrorCode::kShapeMismatch,
                  "example '" + ex.face_id + "' does not match mask " +
                      std::string(features::to_string(mask)));
    }
  }

  std::vector<std::vector<double>> raw;
  raw.reserve(dataset.size());
  for (const auto& ex : dataset) raw.push_back(ex.features.values);
  TrainResult result;
  result.model = init_model(mask, config);
  result.model.scaler = features::fit_scaler(std::span<const std::vector<double>>(raw));

  std::vector<std::vector<double>> xs;
  std::vector<Label> ys;
  xs.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    xs.push_back(result.model.scaler.apply(raw[i]));
    ys.push_back(dataset[i].label);
  }

  MlpModel& m = result.model;
  Gradients velocity{std::vector<double>(m.w1.size(), 0.0), std::vector<double>(m.b1.size(), 0.0),
                     std::vector<double>(m.w2.size(), 0.0), std::vector<double>(m.b2.size(), 0.0)};
  std::mt19937_64 shuffle_rng(derive_seed(config.seed, "shuffle"));
  DropoutSampler dropout(config.dropout_rate, derive_seed(config.seed, "dropout"));
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<std::vector<double>> batch_x;
  std::vector<Label> batch_y;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch_x.clear();
      batch_y.clear();
      for (std::size_t i = start; i < end; ++i) {
        batch_x.push_back(xs[order[i]]);
        batch_y.push_back(ys[order[i]]);
      }
      const BackwardResult br = backward(m, batch_x, batch_y, &dropout);
      loss_sum += br.mean_loss * static_cast<double>(end - start);

      auto step = [&](std::vector<double>& param, std::vector<double>& vel,
                      const std::vector<double>& grad) {
        for (std::size_t i = 0; i < param.size(); ++i) {
          vel[i] = config.momentum * vel[i] - config.learning_rate * grad[i];
          param[i] += vel[i];
        }
      };
      step(m.w1, velocity.w1, br.grads.w1);
      step(m.b1, velocity.b1, br.grads.b1);
      step(m.w2, velocity.w2, br.grads.w2);
      step(m.b2, velocity.b2, br.grads.b2);
    }
    const double epoch_loss = loss_sum / static_cast<double>(order.size());
    if (!std::isfinite(epoch_loss)) {
      throw Error(ErrorCode::kDivergence,
                  "training loss became non-finite in epoch " + std::to_string(epoch + 1));
    }
    result.loss_history.push_back(epoch_loss);
  }
  return result;
}

Prediction predict(const MlpModel& model, std::span<const double> raw) {
  check_input(model, raw);
  const LogProbs lp = model.scaler.mean.empty() ? forward(model, raw)
                                                : forward(model, model.scaler.apply(raw));
  Prediction p;
  p.label = lp[1] >= lp[0] ? Label::kBystander : Label::kSubject;
  p.bystander_probability = std::exp(lp[1]);
  return p;
}

Prediction predict(const MlpModel& model, const FeatureVector& raw) {
  return predict(model, std::span<const double>(raw.values));
}

std::vector<Prediction> predict_batch(const MlpModel& model, std::span<const FeatureVector> raw) {
  for (const auto& v : raw) check_input(model, v.values);
  std::vector<Prediction> out(raw.size());
  const auto n = static_cast<long long>(raw.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) out[i] = predict(model, raw[i]);
  return out;
}

}  // namespace facegate::classifier
