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

#include "facegate/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <unordered_map>

#include "facegate/error.hpp"

namespace facegate::evaluation {

namespace {

using i128 = __int128;

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

// Example indices grouped per distinct image, in first-appearance order.
std::vector<std::vector<std::size_t>> group_by_image(std::span<const std::string> image_ids) {
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < image_ids.size(); ++i) {
    auto [it, inserted] = slot.try_emplace(image_ids[i], groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  return groups;
}

std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

void append_group(std::vector<std::size_t>& out, const std::vector<std::size_t>& group) {
  out.insert(out.end(), group.begin(), group.end());
}

// kappa = (num / den) where both sides are exact integers scaled by the same
// positive factor; p_o and p_e are reported separately.
KappaResult finish(i128 num, i128 den, double observed, double expected, bool perfect) {
  KappaResult r;
  r.observed = observed;
  r.expected = expected;
  if (den == 0) {
    if (perfect) r.kappa = 1.0;
    return r;
  }
  r.kappa = static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
  return r;
}

}  // namespace

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
  tp += o.tp;
  fp += o.fp;
  tn += o.tn;
  fn += o.fn;
  return *this;
}

ConfusionMatrix confusion(std::span<const Label> predictions, std::span<const Label> labels) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "predictions (" + std::to_string(predictions.size()) + ") and labels (" +
                    std::to_string(labels.size()) + ") differ in length");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool pred_pos = predictions[i] == Label::kBystander;
    const bool true_pos = labels[i] == Label::kBystander;
    if (pred_pos && true_pos) ++cm.tp;
    else if (pred_pos) ++cm.fp;
    else if (true_pos) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw Error(ErrorCode::kEmptyInput, "confusion matrix is empty");
  MetricsReport m;
  m.accuracy = ratio(cm.tp + cm.tn, cm.total());
  m.precision = ratio(cm.tp, cm.tp + cm.fp);
  m.recall_tpr = ratio(cm.tp, cm.tp + cm.fn);
  m.fpr = ratio(cm.fp, cm.fp + cm.tn);
  if (m.precision && m.recall_tpr && (*m.precision + *m.recall_tpr) > 0.0) {
    m.f1 = 2.0 * *m.precision * *m.recall_tpr / (*m.precision + *m.recall_tpr);
  }
  return m;
}

std::vector<std::string> distinct_images(std::span<const std::string> image_ids) {
  std::vector<std::string> out;
  for (const auto& g : group_by_image(image_ids)) out.push_back(image_ids[g.front()]);
  return out;
}

Split split_80_10_10(std::span<const std::string> image_ids, std::uint64_t seed) {
  const auto groups = group_by_image(image_ids);
  if (groups.empty()) throw Error(ErrorCode::kEmptyDataset, "cannot split an empty dataset");
  const std::size_t n = groups.size();
  const auto n_train = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(n)));
  const auto n_val = std::min(n - n_train,
                              static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(n))));
  const auto order = shuffled_order(n, seed);
  Split s;
  for (std::size_t i = 0; i < n; ++i) {
    auto& part = i < n_train ? s.train : (i < n_train + n_val ? s.validation : s.test);
    append_group(part, groups[order[i]]);
  }
  return s;
}

std::vector<Fold> k_fold(std::span<const std::string> image_ids, std::size_t k, std::uint64_t seed) {
  const auto groups = group_by_image(image_ids);
  if (k < 2 || k > groups.size()) {
    throw Error(ErrorCode::kInvalidK, "k=" + std::to_string(k) + " must be in [2, " +
                                          std::to_string(groups.size()) + "]");
  }
  const auto order = shuffled_order(groups.size(), seed);
  std::vector<std::size_t> fold_of(groups.size());
  for (std::size_t i = 0; i < order.size(); ++i) fold_of[order[i]] = i % k;
  std::vector<Fold> folds(k);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t f = 0; f < k; ++f) {
      append_group(f == fold_of[g] ? folds[f].test : folds[f].train, groups[g]);
    }
  }
  for (auto& f : folds) {
    std::sort(f.train.begin(), f.train.end());
    std::sort(f.test.begin(), f.test.end());
  }
  return folds;
}

std::string_view to_string(SubjectCountGroup group) {
  switch (group) {
    case SubjectCountGroup::k1: return "1";
    case SubjectCountGroup::k2: return "2";
    case SubjectCountGroup::k3: return "3";
    case SubjectCountGroup::k4: return "4";
    case SubjectCountGroup::k5: return "5";
    case SubjectCountGroup::k6To10: return "6-10";
    case SubjectCountGroup::kOver10: return ">10";
  }
  return "?";
}

SubjectCountGroup bucket_for(std::size_t subjects) {
  if (subjects == 0) throw Error(ErrorCode::kEmptyInput, "subject count must be >= 1");
  if (subjects <= 5) return static_cast<SubjectCountGroup>(subjects - 1);
  if (subjects <= 10) return SubjectCountGroup::k6To10;
  return SubjectCountGroup::kOver10;
}

StratifiedReport stratify_by_subject_count(std::span<const FaceOutcome> outcomes) {
  struct PerImage {
    std::size_t subjects = 0;
    ConfusionMatrix cm;
  };
  std::map<std::string, PerImage> images;
  for (const auto& o : outcomes) {
    PerImage& img = images[o.image_id];
    if (o.truth == Label::kSubject) ++img.subjects;
    const Label p[] = {o.predicted};
    const Label t[] = {o.truth};
    img.cm += confusion(p, t);
  }
  StratifiedReport report;
  for (auto g : kSubjectCountGroups) report.groups.push_back(GroupResult{g, 0, {}, std::nullopt});
  for (const auto& [id, img] : images) {
    if (img.subjects == 0) {
      report.warnings.push_back("image '" + id + "' has no ground-truth subject; excluded");
      continue;
    }
    GroupResult& g = report.groups[static_cast<std::size_t>(bucket_for(img.subjects))];
    ++g.images;
    g.cm += img.cm;
  }
  for (auto& g : report.groups) {
    if (g.cm.total() > 0) g.metrics = metrics(g.cm);
  }
  return report;
}

KappaResult cohen_kappa_table(const std::vector<std::vector<long long>>& table) {
  const std::size_t c = table.size();
  for (const auto& row : table) {
    if (row.size() != c) throw Error(ErrorCode::kShapeMismatch, "agreement table must be square");
    for (long long v : row) {
      if (v < 0) throw Error(ErrorCode::kValidationError, "agreement table has a negative count");
    }
  }
  i128 n = 0, agree = 0, chance = 0;  // chance = sum_k row_k * col_k
  for (std::size_t i = 0; i < c; ++i) {
    i128 row = 0, col = 0;
    for (std::size_t j = 0; j < c; ++j) {
      row += table[i][j];
      col += table[j][i];
    }
    n += row;
    agree += table[i][i];
    chance += row * col;
  }
  if (n == 0) throw Error(ErrorCode::kEmptyInput, "agreement table is empty");
  const double nn = static_cast<double>(n);
  const double p_o = static_cast<double>(agree) / nn;
  const double p_e = static_cast<double>(chance) / (nn * nn);
  // kappa = (n*agree - chance) / (n^2 - chance), evaluated in exact integers.
  return finish(n * agree - chance, n * n - chance, p_o, p_e, agree == n);
}

KappaResult cohen_kappa(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kShapeMismatch, "annotation sequences differ in length");
  }
  if (a.empty()) throw Error(ErrorCode::kEmptyInput, "annotation sequences are empty");
  std::map<int, std::size_t> index;
  for (int v : a) index.try_emplace(v, 0);
  for (int v : b) index.try_emplace(v, 0);
  std::size_t next = 0;
  for (auto& [v, i] : index) i = next++;
  std::vector<std::vector<long long>> table(index.size(), std::vector<long long>(index.size(), 0));
  for (std::size_t i = 0; i < a.size(); ++i) ++table[index[a[i]]][index[b[i]]];
  return cohen_kappa_table(table);
}

KappaResult cohen_kappa(std::span<const std::string> a, std::span<const std::string> b) {
  std::map<std::string, int> codes;
  for (const auto& v : a) codes.try_emplace(v, static_cast<int>(codes.size()));
  for (const auto& v : b) codes.try_emplace(v, static_cast<int>(codes.size()));
  std::vector<int> ia, ib;
  for (const auto& v : a) ia.push_back(codes[v]);
  for (const auto& v : b) ib.push_back(codes[v]);
  return cohen_kappa(std::span<const int>(ia), std::span<const int>(ib));
}

KappaResult fleiss_kappa(const std::vector<std::vector<long long>>& ratings) {
  if (ratings.empty()) throw Error(ErrorCode::kEmptyInput, "no rated items");
  const std::size_t cats = ratings.front().size();
  i128 raters = -1;
  std::vector<i128> column(cats, 0);
  i128 squares = 0;  // sum over items and categories of n_ij^2
  for (std::size_t i = 0; i < ratings.size(); ++i) {
    if (ratings[i].size() != cats) {
      throw Error(ErrorCode::kShapeMismatch, "item " + std::to_string(i) + " has " +
                                                 std::to_string(ratings[i].size()) +
                                                 " categories, expected " + std::to_string(cats));
    }
    i128 row = 0;
    for (std::size_t j = 0; j < cats; ++j) {
      const long long v = ratings[i][j];
      if (v < 0) throw Error(ErrorCode::kValidationError, "negative rating count");
      row += v;
      column[j] += v;
      squares += static_cast<i128>(v) * v;
    }
    if (raters < 0) raters = row;
    if (row != raters) {
      throw Error(ErrorCode::kShapeMismatch, "item " + std::to_string(i) +
                                                 " has a different number of raters");
    }
  }
  if (raters < 2) throw Error(ErrorCode::kShapeMismatch, "Fleiss' kappa needs at least 2 raters");
  const i128 total = static_cast<i128>(ratings.size()) * raters;  // N * n
  i128 col_sq = 0;
  for (i128 c : column) col_sq += c * c;
  // P_bar = (squares - total) / (total (n-1));  P_e = col_sq / total^2
  // kappa = ((squares - total) * total - col_sq (n-1)) / ((n-1) (total^2 - col_sq))
  const double td = static_cast<double>(total);
  const double p_bar = static_cast<double>(squares - total) / (td * static_cast<double>(raters - 1));
  const double p_e = static_cast<double>(col_sq) / (td * td);
  const i128 num = (squares - total) * total - col_sq * (raters - 1);
  const i128 den = (raters - 1) * (total * total - col_sq);
  KappaResult r = finish(num, den, p_bar, p_e, false);
  return r;
}

}  // namespace facegate::evaluation
