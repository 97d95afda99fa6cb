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

// train, predict, evaluate *, kappa
#include <iostream>
#include <memory>
#include <set>

#include "cli_common.hpp"
#include "facegate/annotation_service.hpp"
#include "facegate/classifier.hpp"
#include "facegate/dataset.hpp"
#include "facegate/evaluation.hpp"
#include "facegate/seed.hpp"

namespace facegate::cli {

namespace {

using classifier::Label;
using classifier::LabeledExample;
using features::FeatureMask;

struct DataOptions {
  std::string features;
  std::string labels;
};

struct TrainOptions {
  double lr = 0.01;
  double momentum = 0.9;
  std::size_t batch_size = 64;
  std::size_t epochs = 50;
  double dropout = 0.5;
};

void add_data_options(CLI::App* cmd, DataOptions& d) {
  cmd->add_option("--features", d.features, "Feature records")->required()->check(CLI::ExistingFile);
  cmd->add_option("--labels", d.labels, "Labels (overrides labels in the feature records)")
      ->check(CLI::ExistingFile);
}

void add_train_options(CLI::App* cmd, TrainOptions& t) {
  cmd->add_option("--lr", t.lr, "Learning rate")->check(CLI::NonNegativeNumber);
  cmd->add_option("--momentum", t.momentum, "Momentum")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--batch-size", t.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
  cmd->add_option("--epochs", t.epochs, "Epochs")->check(CLI::PositiveNumber);
  cmd->add_option("--dropout", t.dropout, "Dropout rate")->check(CLI::Range(0.0, 0.99));
}

std::vector<dataset::FaceRecord> load_records(const DataOptions& d) {
  auto records = dataset::load_feature_records(d.features);
  if (!d.labels.empty()) dataset::attach_labels(records, dataset::load_labels(d.labels));
  return records;
}

classifier::TrainConfig train_config(const TrainOptions& t, std::uint64_t seed) {
  classifier::TrainConfig c;
  c.learning_rate = t.lr;
  c.momentum = t.momentum;
  c.batch_size = t.batch_size;
  c.epochs = t.epochs;
  c.dropout_rate = t.dropout;
  c.seed = seed;
  c.validate();
  return c;
}

std::vector<LabeledExample> subset(const std::vector<LabeledExample>& all,
                                   const std::vector<std::size_t>& idx) {
  std::vector<LabeledExample> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(all[i]);
  return out;
}

std::vector<Label> predict_labels(const classifier::MlpModel& model,
                                  const std::vector<LabeledExample>& xs) {
  std::vector<features::FeatureVector> raw;
  raw.reserve(xs.size());
  for (const auto& x : xs) raw.push_back(x.features);
  std::vector<Label> out;
  for (const auto& p : classifier::predict_batch(model, raw)) out.push_back(p.label);
  return out;
}

evaluation::ConfusionMatrix score(const classifier::MlpModel& model,
                                  const std::vector<LabeledExample>& xs) {
  std::vector<Label> truth;
  for (const auto& x : xs) truth.push_back(x.label);
  return evaluation::confusion(predict_labels(model, xs), truth);
}

std::size_t image_count(const std::vector<LabeledExample>& xs) {
  std::set<std::string> ids;
  for (const auto& x : xs) ids.insert(x.image_id);
  return ids.size();
}

std::vector<std::string> metric_cells(const evaluation::MetricsReport& m) {
  return {fmt(m.accuracy), fmt(m.recall_tpr), fmt(m.precision), fmt(m.f1), fmt(m.fpr)};
}

const std::vector<std::string> kMetricHeader = {"Acc", "R/TPR", "P", "F1", "FPR"};

std::vector<FeatureMask> parse_masks(const std::string& list) {
  std::vector<FeatureMask> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const std::size_t comma = std::min(list.find(',', pos), list.size());
    const std::string item = list.substr(pos, comma - pos);
    if (!item.empty()) {
      try {
        out.push_back(features::parse_mask(item));
      } catch (const Error& e) {
        throw Error(ErrorCode::kConfigError, e.what());
      }
    }
    pos = comma + 1;
  }
  if (out.empty()) throw Error(ErrorCode::kConfigError, "no feature masks given");
  return out;
}

FeatureMask parse_one_mask(const std::string& text) {
  const auto masks = parse_masks(text);
  if (masks.size() != 1) throw Error(ErrorCode::kConfigError, "expected one feature mask");
  return masks.front();
}

// ---------------------------------------------------------------------------

struct TrainCmd {
  DataOptions data;
  TrainOptions train;
  std::string mask = "FF+FM";
  std::string out;
};

void run_train(const TrainCmd& o, const Context& ctx) {
  const FeatureMask mask = parse_one_mask(o.mask);
  const auto examples = dataset::to_examples(load_records(o.data), mask);
  const auto result =
      classifier::train(examples, train_config(o.train, derive_seed(ctx.seed, "train")));
  const fs::path out(o.out);
  fs::create_directories(out);
  classifier::save_model(result.model, out / "model.fgm");
  std::vector<Json> log;
  for (std::size_t e = 0; e < result.loss_history.size(); ++e) {
    log.push_back(Json{{"epoch", e + 1}, {"loss", result.loss_history[e]}});
  }
  write_jsonl(out / "train_log.jsonl", log);
  const auto cm = score(result.model, examples);
  const Json summary{{"faces", examples.size()},
                     {"images", image_count(examples)},
                     {"mask", std::string(features::to_string(mask))},
                     {"final_loss", result.loss_history.empty() ? Json(nullptr)
                                                                : Json(result.loss_history.back())},
                     {"training_confusion", to_json(cm)},
                     {"training_metrics", to_json(evaluation::metrics(cm))}};
  write_file(out / "train_summary.json", summary.dump(2) + "\n");
  write_stamp(out, ctx);
  std::cout << summary.dump() << '\n';
}

struct PredictCmd {
  std::string model;
  std::string features;
  std::string labels;
  std::string out;
};

void run_predict(const PredictCmd& o, const Context& ctx) {
  const auto model = classifier::load_model(o.model);
  auto records = dataset::load_feature_records(o.features);
  if (!o.labels.empty()) dataset::attach_labels(records, dataset::load_labels(o.labels));
  std::vector<features::FeatureVector> raw;
  raw.reserve(records.size());
  for (const auto& r : records) {
    raw.push_back(features::assemble_feature_vector(r.handcrafted, r.embedding, model.mask));
  }
  const auto preds = classifier::predict_batch(model, raw);
  std::vector<Json> lines{Json{{"schema", "facegate.predictions"}, {"version", 1}}};
  bool all_labelled = !records.empty();
  std::vector<Label> truth, predicted;
  for (std::size_t i = 0; i < records.size(); ++i) {
    lines.push_back(Json{{"image_id", records[i].image_id},
                         {"face_id", records[i].face_id},
                         {"label", std::string(classifier::to_string(preds[i].label))},
                         {"bystander_probability", preds[i].bystander_probability}});
    if (records[i].label) {
      truth.push_back(*records[i].label);
      predicted.push_back(preds[i].label);
    } else {
      all_labelled = false;
    }
  }
  const fs::path out(o.out);
  fs::create_directories(out);
  write_jsonl(out / "predictions.jsonl", lines);
  Json summary{{"faces", records.size()}, {"mask", std::string(features::to_string(model.mask))}};
  if (all_labelled) {
    const auto cm = evaluation::confusion(predicted, truth);
    summary["confusion"] = to_json(cm);
    summary["metrics"] = to_json(evaluation::metrics(cm));
    write_file(out / "metrics.json", summary.dump(2) + "\n");
  }
  write_stamp(out, ctx);
  std::cout << summary.dump() << '\n';
}

// ---------------------------------------------------------------------------

struct EvalCmd {
  DataOptions data;
  TrainOptions train;
  std::string mask = "FF+FM";
  std::string masks = "FF,FF+FM";
  std::size_t k = 10;
  std::string model;
  std::string out;
};

struct Prepared {
  std::vector<dataset::FaceRecord> records;
  std::vector<std::string> image_ids;  // per record
};

Prepared prepare(const EvalCmd& o) {
  Prepared p;
  p.records = load_records(o.data);
  for (const auto& r : p.records) p.image_ids.push_back(r.image_id);
  return p;
}

void run_holdout(const EvalCmd& o, const Context& ctx) {
  const FeatureMask mask = parse_one_mask(o.mask);
  const Prepared p = prepare(o);
  const auto examples = dataset::to_examples(p.records, mask);
  const auto split = evaluation::split_80_10_10(p.image_ids, derive_seed(ctx.seed, "split"));
  const auto model = classifier::train(subset(examples, split.train),
                                       train_config(o.train, derive_seed(ctx.seed, "train")))
                         .model;
  Table table{{"Split", "Images", "Faces"}, {}};
  table.header.insert(table.header.end(), kMetricHeader.begin(), kMetricHeader.end());
  std::vector<Json> lines;
  for (const auto& [name, idx] : {std::pair{"validation", &split.validation},
                                  std::pair{"test", &split.test}}) {
    const auto part = subset(examples, *idx);
    if (part.empty()) {
      warn(std::string(name) + " split is empty");
      continue;
    }
    const auto cm = score(model, part);
    const auto m = evaluation::metrics(cm);
    lines.push_back(Json{{"split", name},
                         {"mask", std::string(features::to_string(mask))},
                         {"images", image_count(part)},
                         {"faces", part.size()},
                         {"confusion", to_json(cm)},
                         {"metrics", to_json(m)}});
    std::vector<std::string> row{name, std::to_string(image_count(part)), std::to_string(part.size())};
    const auto cells = metric_cells(m);
    row.insert(row.end(), cells.begin(), cells.end());
    table.rows.push_back(row);
  }
  const fs::path out(o.out);
  write_jsonl(out / "metrics.jsonl", lines);
  write_table(out, "holdout", table);
  write_stamp(out, ctx);
  std::cout << table.text();
}

void run_kfold(const EvalCmd& o, const Context& ctx) {
  const FeatureMask mask = parse_one_mask(o.mask);
  const Prepared p = prepare(o);
  const auto examples = dataset::to_examples(p.records, mask);
  const auto folds = evaluation::k_fold(p.image_ids, o.k, derive_seed(ctx.seed, "kfold"));
  Table table{{"Fold", "Images", "Faces"}, {}};
  table.header.insert(table.header.end(), kMetricHeader.begin(), kMetricHeader.end());
  std::vector<Json> lines;
  evaluation::ConfusionMatrix pooled;
  std::vector<evaluation::MetricsReport> per_fold;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto train = subset(examples, folds[f].train);
    const auto test = subset(examples, folds[f].test);
    const auto model =
        classifier::train(train, train_config(o.train, derive_seed(ctx.seed, "train/fold" +
                                                                            std::to_string(f + 1))))
            .model;
    const auto cm = score(model, test);
    pooled += cm;
    const auto m = evaluation::metrics(cm);
    per_fold.push_back(m);
    lines.push_back(Json{{"fold", f + 1},
                         {"mask", std::string(features::to_string(mask))},
                         {"images", image_count(test)},
                         {"faces", test.size()},
                         {"confusion", to_json(cm)},
                         {"metrics", to_json(m)}});
    std::vector<std::string> row{std::to_string(f + 1), std::to_string(image_count(test)),
                                 std::to_string(test.size())};
    const auto cells = metric_cells(m);
    row.insert(row.end(), cells.begin(), cells.end());
    table.rows.push_back(row);
  }
  // Mean over folds where the metric is defined.
  auto mean = [&](std::optional<double> evaluation::MetricsReport::*field) -> std::optional<double> {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& m : per_fold) {
      if (m.*field) {
        sum += *(m.*field);
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  };
  const evaluation::MetricsReport avg{mean(&evaluation::MetricsReport::accuracy),
                                mean(&evaluation::MetricsReport::precision),
                                mean(&evaluation::MetricsReport::recall_tpr),
                                mean(&evaluation::MetricsReport::f1),
                                mean(&evaluation::MetricsReport::fpr)};
  const auto pooled_m = evaluation::metrics(pooled);
  lines.push_back(Json{{"fold", "mean"}, {"metrics", to_json(avg)}});
  lines.push_back(Json{{"fold", "pooled"}, {"confusion", to_json(pooled)}, {"metrics", to_json(pooled_m)}});
  for (const auto& [name, m] : {std::pair{"mean", &avg}, std::pair{"pooled", &pooled_m}}) {
    std::vector<std::string> row{name, std::to_string(image_count(examples)),
                                 std::to_string(examples.size())};
    const auto cells = metric_cells(*m);
    row.insert(row.end(), cells.begin(), cells.end());
    table.rows.push_back(row);
  }
  const fs::path out(o.out);
  write_jsonl(out / "metrics.jsonl", lines);
  write_table(out, "kfold", table);
  write_stamp(out, ctx);
  std::cout << table.text();
}

void run_ablate(const EvalCmd& o, const Context& ctx) {
  const Prepared p = prepare(o);
  const auto split = evaluation::split_80_10_10(p.image_ids, derive_seed(ctx.seed, "split"));
  Table table{{"Method"}, {}};
  table.header.insert(table.header.end(), kMetricHeader.begin(), kMetricHeader.end());
  std::vector<Json> lines;
  for (FeatureMask mask : {FeatureMask::kFM, FeatureMask::kFF, FeatureMask::kFFFM}) {
    const auto examples = dataset::to_examples(p.records, mask);
    const auto model = classifier::train(subset(examples, split.train),
                                         train_config(o.train, derive_seed(ctx.seed, "train")))
                           .model;
    const auto test = subset(examples, split.test);
    const auto cm = score(model, test);
    const auto m = evaluation::metrics(cm);
    const std::string name(features::to_string(mask));
    lines.push_back(Json{{"mask", name},
                         {"split", "test"},
                         {"images", image_count(test)},
                         {"faces", test.size()},
                         {"confusion", to_json(cm)},
                         {"metrics", to_json(m)}});
    std::vector<std::string> row{name};
    const auto cells = metric_cells(m);
    row.insert(row.end(), cells.begin(), cells.end());
    table.rows.push_back(row);
  }
  const fs::path out(o.out);
  write_jsonl(out / "metrics.jsonl", lines);
  write_table(out, "ablate", table);
  write_stamp(out, ctx);
  std::cout << table.text();
}

// Out-of-fold predictions per mask (or one trained model), grouped by the
// ground-truth subject count of each image.
void run_stratify(const EvalCmd& o, const Context& ctx) {
  const Prepared p = prepare(o);
  std::vector<std::pair<std::string, std::vector<Label>>> runs;
  std::vector<Label> truth;
  for (const auto& r : p.records) {
    if (!r.label) {
      throw Error(ErrorCode::kValidationError,
                  "face '" + r.face_id + "' of image '" + r.image_id + "' has no label");
    }
    truth.push_back(*r.label);
  }
  if (!o.model.empty()) {
    const auto model = classifier::load_model(o.model);
    runs.emplace_back(std::string(features::to_string(model.mask)),
                      predict_labels(model, dataset::to_examples(p.records, model.mask)));
  } else {
    const auto folds = evaluation::k_fold(p.image_ids, o.k, derive_seed(ctx.seed, "kfold"));
    for (FeatureMask mask : parse_masks(o.masks)) {
      const auto examples = dataset::to_examples(p.records, mask);
      std::vector<Label> predicted(examples.size());
      for (std::size_t f = 0; f < folds.size(); ++f) {
        const auto model =
            classifier::train(subset(examples, folds[f].train),
                              train_config(o.train, derive_seed(ctx.seed, "train/fold" +
                                                                            std::to_string(f + 1))))
                .model;
        const auto test = subset(examples, folds[f].test);
        const auto labels = predict_labels(model, test);
        for (std::size_t i = 0; i < test.size(); ++i) predicted[folds[f].test[i]] = labels[i];
      }
      runs.emplace_back(std::string(features::to_string(mask)), std::move(predicted));
    }
  }

  Table accuracy{{"Number of subjects"}, {}};
  for (auto g : evaluation::kSubjectCountGroups) accuracy.header.emplace_back(evaluation::to_string(g));
  Table detail{{"Mask", "Subjects", "Images", "Faces"}, {}};
  detail.header.insert(detail.header.end(), kMetricHeader.begin(), kMetricHeader.end());
  std::vector<Json> lines;
  std::set<std::string> warned;
  for (const auto& [name, predicted] : runs) {
    std::vector<evaluation::FaceOutcome> outcomes;
    for (std::size_t i = 0; i < p.records.size(); ++i) {
      outcomes.push_back(evaluation::FaceOutcome{p.records[i].image_id, truth[i], predicted[i]});
    }
    const auto report = evaluation::stratify_by_subject_count(outcomes);
    for (const auto& w : report.warnings) {
      if (warned.insert(w).second) warn(w);
    }
    std::vector<std::string> acc_row{name};
    for (const auto& g : report.groups) {
      const std::string group(evaluation::to_string(g.group));
      acc_row.push_back(g.metrics ? fmt(g.metrics->accuracy) : "-");
      Json line{{"mask", name},
                {"group", group},
                {"images", g.images},
                {"faces", g.cm.total()},
                {"confusion", to_json(g.cm)}};
      line["metrics"] = g.metrics ? to_json(*g.metrics) : Json(nullptr);
      lines.push_back(std::move(line));
      std::vector<std::string> row{name, group, std::to_string(g.images), std::to_string(g.cm.total())};
      if (g.metrics) {
        const auto cells = metric_cells(*g.metrics);
        row.insert(row.end(), cells.begin(), cells.end());
      } else {
        row.insert(row.end(), kMetricHeader.size(), "-");
      }
      detail.rows.push_back(row);
    }
    accuracy.rows.push_back(acc_row);
  }
  const fs::path out(o.out);
  write_jsonl(out / "metrics.jsonl", lines);
  write_table(out, "stratify", accuracy);
  write_table(out, "stratify_metrics", detail);
  write_stamp(out, ctx);
  std::cout << accuracy.text();
}

// ---------------------------------------------------------------------------

struct KappaCmd {
  std::string annotations;
  std::size_t n_annotators = 3;
  std::string labels_a;
  std::string labels_b;
  std::string out;
};

void run_kappa(const KappaCmd& o, const Context& ctx) {
  const fs::path out(o.out);
  Json result;
  Table table;
  if (!o.annotations.empty()) {
    const auto set = audit::load_annotations(o.annotations);
    std::vector<std::vector<audit::AnnotationRecord>> completed;
    std::size_t partial = 0;
    for (const auto& [task, by_annotator] : set.tasks) {
      if (by_annotator.size() == o.n_annotators) {
        completed.push_back(set.records_for(task));
      } else {
        ++partial;
      }
    }
    if (partial) warn(std::to_string(partial) + " tasks without exactly " +
                      std::to_string(o.n_annotators) + " codings were skipped");
    result = service::agreement_report(completed);
    table.header = {"Field", "Items", "Fleiss", "Cohen (mean over pairs)"};
    for (const auto& [field, r] : result["fields"].items()) {
      std::optional<double> fleiss;
      if (!r["fleiss"].is_null() && !r["fleiss"]["kappa"].is_null()) fleiss = r["fleiss"]["kappa"].get<double>();
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& pr : r["cohen"]) {
        if (!pr["kappa"].is_null()) {
          sum += pr["kappa"].get<double>();
          ++n;
        }
      }
      table.rows.push_back({field, std::to_string(r["items"].get<std::size_t>()), fmt(fleiss),
                            fmt(n ? std::optional<double>(sum / static_cast<double>(n)) : std::nullopt)});
    }
  } else if (!o.labels_a.empty() && !o.labels_b.empty()) {
    const auto a = dataset::load_labels(o.labels_a);
    const auto b = dataset::load_labels(o.labels_b);
    std::vector<int> va, vb;
    std::size_t only = 0;
    for (const auto& [key, label] : a) {
      const auto it = b.find(key);
      if (it == b.end()) {
        ++only;
        continue;
      }
      va.push_back(static_cast<int>(label));
      vb.push_back(static_cast<int>(it->second));
    }
    for (const auto& [key, label] : b) only += a.count(key) ? 0 : 1;
    if (only) warn(std::to_string(only) + " faces labelled by only one rater were skipped");
    if (va.empty()) throw Error(ErrorCode::kEmptyInput, "no faces labelled by both raters");
    const auto k = evaluation::cohen_kappa(std::span<const int>(va), std::span<const int>(vb));
    result = Json{{"items", va.size()},
                  {"kappa", to_json(k.kappa)},
                  {"observed", k.observed},
                  {"expected", k.expected}};
    table.header = {"Items", "Observed", "Expected", "Cohen"};
    table.rows.push_back({std::to_string(va.size()), fmt(k.observed), fmt(k.expected), fmt(k.kappa)});
  } else {
    throw Error(ErrorCode::kConfigError, "give --annotations, or both --labels-a and --labels-b");
  }
  write_file(out / "kappa.json", result.dump(2) + "\n");
  write_table(out, "kappa", table);
  write_stamp(out, ctx);
  std::cout << table.text();
}

}  // namespace

void register_model_commands(CLI::App& app, Context& ctx) {
  auto* train = app.add_subcommand("train", "Train the subject/bystander classifier");
  auto to = std::make_shared<TrainCmd>();
  add_data_options(train, to->data);
  add_train_options(train, to->train);
  train->add_option("--mask", to->mask, "Feature mask: FF, FM or FF+FM");
  train->add_option("--out", to->out, "Output directory")->required();
  train->callback([to, &ctx] { ctx.run = [to, &ctx] { run_train(*to, ctx); }; });

  auto* predict = app.add_subcommand("predict", "Classify faces with a trained model");
  auto po = std::make_shared<PredictCmd>();
  predict->add_option("--model", po->model, "Model file")->required()->check(CLI::ExistingFile);
  predict->add_option("--features", po->features, "Feature records")
      ->required()
      ->check(CLI::ExistingFile);
  predict->add_option("--labels", po->labels, "Labels for scoring")->check(CLI::ExistingFile);
  predict->add_option("--out", po->out, "Output directory")->required();
  predict->callback([po, &ctx] { ctx.run = [po, &ctx] { run_predict(*po, ctx); }; });

  auto* evaluate = app.add_subcommand("evaluate", "Classifier experiments");
  evaluate->require_subcommand(1);
  struct Mode {
    const char* name;
    const char* help;
    void (*fn)(const EvalCmd&, const Context&);
  };
  for (const Mode& m : {Mode{"holdout", "80-10-10 image-grouped split", run_holdout},
                        Mode{"kfold", "Image-grouped k-fold cross-validation", run_kfold},
                        Mode{"stratify", "Metrics by number of subjects per image", run_stratify},
                        Mode{"ablate", "Compare the FM, FF and FF+FM masks", run_ablate}}) {
    auto* cmd = evaluate->add_subcommand(m.name, m.help);
    auto eo = std::make_shared<EvalCmd>();
    add_data_options(cmd, eo->data);
    add_train_options(cmd, eo->train);
    const std::string name = m.name;
    if (name == "holdout" || name == "kfold") {
      cmd->add_option("--mask", eo->mask, "Feature mask: FF, FM or FF+FM");
    }
    if (name == "kfold" || name == "stratify") {
      cmd->add_option("--k", eo->k, "Number of folds")->check(CLI::PositiveNumber);
    }
    if (name == "stratify") {
      cmd->add_option("--masks", eo->masks, "Comma-separated masks");
      cmd->add_option("--model", eo->model, "Score a trained model instead of cross-validating")
          ->check(CLI::ExistingFile);
    }
    cmd->add_option("--out", eo->out, "Output directory")->required();
    auto fn = m.fn;
    cmd->callback([eo, fn, &ctx] { ctx.run = [eo, fn, &ctx] { fn(*eo, ctx); }; });
  }

  auto* kappa = app.add_subcommand("kappa", "Inter-annotator agreement");
  auto ko = std::make_shared<KappaCmd>();
  kappa->add_option("--annotations", ko->annotations, "Annotation records (Cohen and Fleiss per field)")
      ->check(CLI::ExistingFile);
  kappa->add_option("--n-annotators", ko->n_annotators, "Codings per completed task")
      ->check(CLI::PositiveNumber);
  kappa->add_option("--labels-a", ko->labels_a, "First rater's labels")->check(CLI::ExistingFile);
  kappa->add_option("--labels-b", ko->labels_b, "Second rater's labels")->check(CLI::ExistingFile);
  kappa->add_option("--out", ko->out, "Output directory")->required();
  kappa->callback([ko, &ctx] { ctx.run = [ko, &ctx] { run_kappa(*ko, ctx); }; });
}

}  // namespace facegate::cli
