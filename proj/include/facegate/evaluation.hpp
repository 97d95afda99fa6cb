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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "facegate/classifier.hpp"

namespace facegate::evaluation {

using classifier::Label;

// Bystander is the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  ConfusionMatrix& operator+=(const ConfusionMatrix& o);
  bool operator==(const ConfusionMatrix&) const = default;
};

// Each metric is nullopt when its denominator is zero; never coerced to 0.
struct MetricsReport {
  std::optional<double> accuracy;
  std::optional<double> precision;
  std::optional<double> recall_tpr;  // recall and TPR are the same quantity
  std::optional<double> f1;
  std::optional<double> fpr;

  std::optional<double> tpr() const { return recall_tpr; }
};

// Throws kShapeMismatch when the sequences differ in length.
ConfusionMatrix confusion(std::span<const Label> predictions, std::span<const Label> labels);

// Throws kEmptyInput for an all-zero matrix.
MetricsReport metrics(const ConfusionMatrix& cm);

// ---------------------------------------------------------------------------
// Image-grouped partitions. Inputs are the image id of every example; outputs
// are example indices. All faces of one image land in the same part.

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

// round(0.8 n) / round(0.1 n) / remainder images. Throws kEmptyDataset.
Split split_80_10_10(std::span<const std::string> image_ids, std::uint64_t seed);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Images dealt round-robin after a seeded shuffle, so fold sizes (in images)
// differ by at most one. Throws kInvalidK unless 2 <= k <= #images.
std::vector<Fold> k_fold(std::span<const std::string> image_ids, std::size_t k,
                         std::uint64_t seed);

// Distinct image ids in first-appearance order.
std::vector<std::string> distinct_images(std::span<const std::string> image_ids);

// ---------------------------------------------------------------------------
// Subject-count stratification

enum class SubjectCountGroup { k1, k2, k3, k4, k5, k6To10, kOver10 };
inline constexpr std::array<SubjectCountGroup, 7> kSubjectCountGroups = {
    SubjectCountGroup::k1, SubjectCountGroup::k2,     SubjectCountGroup::k3,
    SubjectCountGroup::k4, SubjectCountGroup::k5,     SubjectCountGroup::k6To10,
    SubjectCountGroup::kOver10};

std::string_view to_string(SubjectCountGroup group);
// Requires subjects >= 1.
SubjectCountGroup bucket_for(std::size_t subjects);

struct FaceOutcome {
  std::string image_id;
  Label truth = Label::kSubject;
  Label predicted = Label::kSubject;
};

struct GroupResult {
  SubjectCountGroup group = SubjectCountGroup::k1;
  std::size_t images = 0;
  ConfusionMatrix cm;
  std::optional<MetricsReport> metrics;  // absent when the group is empty
};

struct StratifiedReport {
  std::vector<GroupResult> groups;  // one per SubjectCountGroup, in order
  std::vector<std::string> warnings;
};

// Images are bucketed by their ground-truth subject count; images without
// any ground-truth subject are excluded with a warning.
StratifiedReport stratify_by_subject_count(std::span<const FaceOutcome> outcomes);

// ---------------------------------------------------------------------------
// Agreement

struct KappaResult {
  std::optional<double> kappa;  // nullopt when chance agreement is 1 (undefined)
  double observed = 0.0;
  double expected = 0.0;
};

// Cohen's kappa over aligned category indices. Chance agreement from the
// product of the two raters' marginals. When expected agreement is 1, kappa
// is 1 if observed agreement is also 1 and undefined otherwise.
// Throws kShapeMismatch / kEmptyInput.
KappaResult cohen_kappa(std::span<const int> a, std::span<const int> b);
KappaResult cohen_kappa(std::span<const std::string> a, std::span<const std::string> b);

// Cohen's kappa from a square agreement table (rows: rater A, cols: rater B).
KappaResult cohen_kappa_table(const std::vector<std::vector<long long>>& table);

// Fleiss' kappa. ratings[i][j] = raters assigning item i to category j; every
// row must sum to the same n >= 2 (kShapeMismatch otherwise). Undefined when
// chance agreement is 1.
KappaResult fleiss_kappa(const std::vector<std::vector<long long>>& ratings);

}  // namespace facegate::evaluation
