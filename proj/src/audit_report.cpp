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

#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>

#include "facegate/audit.hpp"
#include "facegate/error.hpp"

namespace facegate::audit {

namespace {

constexpr const char* kSubject = "Subject";
constexpr const char* kBystander = "Bystander";
constexpr const char* kFriend = "Friend";
constexpr const char* kUploader = "Uploader";
constexpr const char* kBystanderStar = "Bystander*";

const std::vector<std::string> kLevelRows = {"No anonymization", "Partial anonymization",
                                             "Full anonymization"};
const std::vector<std::string> kCategoryCols = {kFriend, kBystanderStar, kUploader};
const std::vector<std::string> kLabelRows = {"Only subject", "Only bystander",
                                             "Subject & Bystander"};
const std::vector<std::string> kCategoryRows = {
    "Only friend",         "Only uploader",         "Only bystander*",
    "Friend & Uploader",   "Friend & Bystander*",   "Uploader & Bystander*",
    "Friend & Uploader & Bystander*"};
const std::vector<std::string> kCodeGroups = {
    "Only Friend",         "Friend & Uploader",
    "Only Bystander*",     "Bystander* & Uploader",
    "Friend & Bystander*", "Friend & Bystander* & Uploader"};
const std::vector<std::string> kManipulationCols = {"Bystander* Partial", "Bystander* Full",
                                                    "Friend Partial", "Friend Full"};
constexpr const char* kImageLevel = "Image Level";
constexpr const char* kUploaderLevel = "Uploader Level";

const std::string& level_row(AnonymizationLevel level) {
  return kLevelRows[static_cast<std::size_t>(level)];
}

const char* category_col(PersonCategory c) {
  switch (c) {
    case PersonCategory::kUploader: return kUploader;
    case PersonCategory::kFriend: return kFriend;
    case PersonCategory::kBystanderStar: return kBystanderStar;
  }
  return "?";
}

TripleCode code_of(AnonymizationLevel level) {
  const AnonymizationLevel one[] = {level};
  return encode_triple(one);
}

std::string capitalized(std::string_view s) {
  std::string out(s);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::uint64_t sum(const std::map<std::string, std::uint64_t>& m) {
  std::uint64_t n = 0;
  for (const auto& [k, v] : m) n += v;
  return n;
}

std::uint64_t column_sum(const Counts& c, const std::string& col) {
  std::uint64_t n = 0;
  for (const auto& [row, cols] : c) {
    if (auto it = cols.find(col); it != cols.end()) n += it->second;
  }
  return n;
}

std::uint64_t total(const Counts& c) {
  std::uint64_t n = 0;
  for (const auto& [row, cols] : c) n += sum(cols);
  return n;
}

std::uint64_t get(const std::map<std::string, std::uint64_t>& m, const std::string& key) {
  const auto it = m.find(key);
  return it == m.end() ? 0 : it->second;
}

std::uint64_t get(const Counts& c, const std::string& row, const std::string& col) {
  const auto it = c.find(row);
  return it == c.end() ? 0 : get(it->second, col);
}

}  // namespace

// ---------------------------------------------------------------------------

std::string TripleCode::str() const {
  return std::string{none ? '1' : '0', partial ? '1' : '0', full ? '1' : '0'};
}

TripleCode& TripleCode::operator|=(const TripleCode& o) {
  none = none || o.none;
  partial = partial || o.partial;
  full = full || o.full;
  return *this;
}

TripleCode encode_triple(std::span<const AnonymizationLevel> levels) {
  TripleCode code;
  for (AnonymizationLevel l : levels) {
    if (l == AnonymizationLevel::kNone) code.none = true;
    if (l == AnonymizationLevel::kPartial) code.partial = true;
    if (l == AnonymizationLevel::kFull) code.full = true;
  }
  return code;
}

std::string intention_label(const std::set<Intention>& intentions) {
  static constexpr Intention kOrder[] = {Intention::kPrivacy, Intention::kBeauty, Intention::kHumor,
                                         Intention::kInformation, Intention::kUnknown};
  std::vector<std::string> parts;
  for (Intention i : kOrder) {
    if (intentions.count(i)) parts.push_back(capitalized(to_string(i)));
  }
  return parts.empty() ? "(none)" : join(parts, " & ");
}

std::string parts_label(const std::set<Part>& parts) {
  std::vector<std::string> names;
  for (Part p : parts) {
    switch (p) {
      case Part::kWholeBody: names.push_back("body"); break;
      case Part::kWholeFace: names.push_back("face"); break;
      default: names.push_back(std::string(to_string(p)));
    }
  }
  if (names.empty()) return "(none)";
  names[0] = capitalized(names[0]);
  return join(names, ", ");
}

std::string methods_label(const std::set<Method>& methods) {
  std::vector<std::string> names;
  for (Method m : methods) names.push_back(std::string(to_string(m)));
  if (names.empty()) return "(none)";
  names[0] = capitalized(names[0]);
  return join(names, " & ");
}

// ---------------------------------------------------------------------------

namespace {

struct PresenceView {
  bool subject, bystander, friend_, uploader, bystander_star;
};

std::optional<std::string> label_row(const PresenceView& p) {
  if (p.subject && p.bystander) return kLabelRows[2];
  if (p.subject) return kLabelRows[0];
  if (p.bystander) return kLabelRows[1];
  return std::nullopt;
}

std::optional<std::string> category_row(const PresenceView& p) {
  const int mask = (p.friend_ ? 1 : 0) | (p.uploader ? 2 : 0) | (p.bystander_star ? 4 : 0);
  switch (mask) {
    case 1: return kCategoryRows[0];
    case 2: return kCategoryRows[1];
    case 4: return kCategoryRows[2];
    case 3: return kCategoryRows[3];
    case 5: return kCategoryRows[4];
    case 6: return kCategoryRows[5];
    case 7: return kCategoryRows[6];
  }
  return std::nullopt;
}

std::optional<std::string> code_group(const PresenceView& p) {
  if (p.friend_ && p.bystander_star) return kCodeGroups[p.uploader ? 5 : 4];
  if (p.friend_) return kCodeGroups[p.uploader ? 1 : 0];
  if (p.bystander_star) return kCodeGroups[p.uploader ? 3 : 2];
  return std::nullopt;
}

std::string code_row(const PresenceView& p, const TripleCode& f, const TripleCode& b) {
  return "(" + (p.friend_ ? f.str() : std::string("-")) + "," +
         (p.bystander_star ? b.str() : std::string("-")) + ")";
}

}  // namespace

void AuditAccumulator::Presence::merge(const Presence& o) {
  friend_ = friend_ || o.friend_;
  uploader = uploader || o.uploader;
  bystander_star = bystander_star || o.bystander_star;
  subject = subject || o.subject;
  bystander = bystander || o.bystander;
  friend_code |= o.friend_code;
  bystander_code |= o.bystander_code;
}

void AuditAccumulator::add(const AuditImage& image) {
  if (image.celebrity_only) {
    ++celebrity_dropped_;
    return;
  }
  for (const auto& f : image.faces) {
    if (!f.label || !f.category || !f.level) {
      throw Error(ErrorCode::kIncompleteFace, "face '" + f.face_id + "' in image '" +
                                                  image.image_id +
                                                  "' lacks a label, category or level");
    }
  }
  ++images_;
  Presence pres;
  for (const auto& f : image.faces) {
    const PersonCategory cat = *f.category;
    const AnonymizationLevel level = *f.level;
    const std::string col = category_col(cat);
    ++face_counts_[*f.label == Label::kSubject ? kSubject : kBystander];
    ++face_counts_[col];
    ++face_levels_[level_row(level)][col];
    if (auto pc = privacy_class(cat, level)) {
      ++privacy_classes_[std::to_string(static_cast<int>(*pc))];
    }
    (*f.label == Label::kSubject ? pres.subject : pres.bystander) = true;
    switch (cat) {
      case PersonCategory::kFriend:
        pres.friend_ = true;
        pres.friend_code |= code_of(level);
        break;
      case PersonCategory::kBystanderStar:
        pres.bystander_star = true;
        pres.bystander_code |= code_of(level);
        break;
      case PersonCategory::kUploader:
        pres.uploader = true;
        break;
    }
    if (f.coding && f.coding->manipulated()) {
      ++manipulated_faces_[col];
      ++intentions_[col][intention_label(f.coding->intentions)][level_row(level)];
      if (f.coding->intentions.count(Intention::kPrivacy) && level != AnonymizationLevel::kNone &&
          cat != PersonCategory::kUploader) {
        ++privacy_anonymized_faces_;
        const std::string mcol =
            col + (level == AnonymizationLevel::kPartial ? " Partial" : " Full");
        ++parts_[parts_label(f.coding->parts)][mcol];
        ++methods_[methods_label(f.coding->methods)][mcol];
      }
    }
  }
  const PresenceView view{pres.subject, pres.bystander, pres.friend_, pres.uploader,
                          pres.bystander_star};
  if (auto row = label_row(view)) ++image_composition_[*row];
  if (auto row = category_row(view)) ++image_composition_[*row];
  if (auto group = code_group(view)) {
    ++image_codes_[code_row(view, pres.friend_code, pres.bystander_code)][*group];
  }
  UploaderState& u = uploaders_[image.uploader_id];
  u.presence.merge(pres);
  if (!u.verified_account) u.verified_account = image.verified_account;
  if (!u.profile_type) u.profile_type = image.profile_type;
}

void AuditAccumulator::merge(const AuditAccumulator& o) {
  auto add_map = [](std::map<std::string, std::uint64_t>& into,
                    const std::map<std::string, std::uint64_t>& from) {
    for (const auto& [k, v] : from) into[k] += v;
  };
  auto add_counts = [&](Counts& into, const Counts& from) {
    for (const auto& [row, cols] : from) add_map(into[row], cols);
  };
  images_ += o.images_;
  celebrity_dropped_ += o.celebrity_dropped_;
  add_map(face_counts_, o.face_counts_);
  add_map(image_composition_, o.image_composition_);
  add_counts(face_levels_, o.face_levels_);
  add_map(privacy_classes_, o.privacy_classes_);
  add_counts(image_codes_, o.image_codes_);
  for (const auto& [cat, c] : o.intentions_) add_counts(intentions_[cat], c);
  add_counts(parts_, o.parts_);
  add_counts(methods_, o.methods_);
  add_map(manipulated_faces_, o.manipulated_faces_);
  privacy_anonymized_faces_ += o.privacy_anonymized_faces_;
  for (const auto& [id, state] : o.uploaders_) {
    UploaderState& u = uploaders_[id];
    u.presence.merge(state.presence);
    if (!u.verified_account) u.verified_account = state.verified_account;
    if (!u.profile_type) u.profile_type = state.profile_type;
  }
}

AuditReport AuditAccumulator::report(bool yates) const {
  AuditReport r;
  r.images = images_;
  r.celebrity_dropped = celebrity_dropped_;
  r.uploaders = uploaders_.size();
  r.face_counts = face_counts_;
  for (const char* k : {kSubject, kBystander, kFriend, kUploader, kBystanderStar}) {
    r.face_counts.try_emplace(k, 0);
  }
  for (const auto& [row, n] : image_composition_) r.composition[row][kImageLevel] = n;
  r.face_levels = face_levels_;
  r.privacy_classes = privacy_classes_;
  r.image_codes = image_codes_;
  r.intentions = intentions_;
  r.parts = parts_;
  r.methods = methods_;
  r.manipulated_faces = manipulated_faces_;
  r.privacy_anonymized_faces = privacy_anonymized_faces_;

  // Uploader-level rows and the contingency tables.
  struct Tally {
    std::map<std::string, std::array<std::uint64_t, 2>> account, profile;
  };
  std::map<std::string, Tally> tallies;  // category -> tables
  for (const auto& [id, u] : uploaders_) {
    const auto& p = u.presence;
    const PresenceView view{p.subject, p.bystander, p.friend_, p.uploader, p.bystander_star};
    if (auto row = label_row(view)) ++r.composition[*row][kUploaderLevel];
    if (auto row = category_row(view)) ++r.composition[*row][kUploaderLevel];
    if (auto group = code_group(view)) {
      ++r.uploader_codes[code_row(view, p.friend_code, p.bystander_code)][*group];
    }
    auto tally = [&](const char* cat, bool present, const TripleCode& code) {
      if (!present) return;
      const std::size_t col = (code.partial || code.full) ? 0 : 1;
      if (u.verified_account) {
        ++tallies[cat].account[*u.verified_account ? "verified" : "unverified"][col];
      }
      if (u.profile_type) ++tallies[cat].profile[*u.profile_type][col];
    };
    tally(kFriend, p.friend_, p.friend_code);
    tally(kBystanderStar, p.bystander_star, p.bystander_code);
  }
  for (const char* cat : {kFriend, kBystanderStar}) {
    for (const char* kind : {"account", "profile"}) {
      const auto& rows = std::string(kind) == "account" ? tallies[cat].account
                                                        : tallies[cat].profile;
      std::vector<std::vector<std::uint64_t>> table;
      std::vector<std::string> labels;
      for (const auto& [label, counts] : rows) {
        labels.push_back(label);
        table.push_back({counts[0], counts[1]});
      }
      ChiSquareResult res = chi_square(table, yates);
      res.name = std::string(cat) + "/" + kind;
      res.row_labels = labels;
      res.col_labels = {"anonymized", "not anonymized"};
      r.chi_square.push_back(std::move(res));
    }
  }
  return r;
}

// ---------------------------------------------------------------------------

ChiSquareResult chi_square(std::vector<std::vector<std::uint64_t>> table, bool yates) {
  ChiSquareResult res;
  res.table = table;
  const std::size_t cols = table.empty() ? 0 : table.front().size();
  for (const auto& row : table) {
    if (row.size() != cols) throw Error(ErrorCode::kShapeMismatch, "contingency table is ragged");
  }
  std::vector<double> row_sum, col_sum(cols, 0.0);
  std::vector<std::vector<double>> kept;
  for (const auto& row : table) {
    double s = 0.0;
    for (auto v : row) s += static_cast<double>(v);
    if (s == 0.0) continue;
    kept.emplace_back(row.begin(), row.end());
    row_sum.push_back(s);
    for (std::size_t j = 0; j < cols; ++j) col_sum[j] += static_cast<double>(row[j]);
  }
  std::vector<std::size_t> live_cols;
  for (std::size_t j = 0; j < cols; ++j) {
    if (col_sum[j] > 0.0) live_cols.push_back(j);
  }
  if (kept.size() < 2 || live_cols.size() < 2) return res;
  double n = 0.0;
  for (double s : row_sum) n += s;
  res.yates = yates && kept.size() == 2 && live_cols.size() == 2;
  double stat = 0.0;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    for (std::size_t j : live_cols) {
      const double expected = row_sum[i] * col_sum[j] / n;
      double diff = std::abs(kept[i][j] - expected);
      if (res.yates) diff = std::max(0.0, diff - 0.5);
      stat += diff * diff / expected;
    }
  }
  res.dof = static_cast<int>((kept.size() - 1) * (live_cols.size() - 1));
  res.statistic = stat;
  const boost::math::chi_squared dist(res.dof);
  res.p_value = boost::math::cdf(boost::math::complement(dist, stat));
  return res;
}

std::vector<std::string> conservation_violations(const AuditReport& r) {
  std::vector<std::string> bad;
  auto expect = [&](std::uint64_t a, std::uint64_t b, const std::string& what) {
    if (a != b) {
      bad.push_back(what + " (" + std::to_string(a) + " != " + std::to_string(b) + ")");
    }
  };
  const std::uint64_t faces = get(r.face_counts, kSubject) + get(r.face_counts, kBystander);
  expect(faces,
         get(r.face_counts, kFriend) + get(r.face_counts, kUploader) +
             get(r.face_counts, kBystanderStar),
         "label counts vs category counts");
  for (const auto& col : kCategoryCols) {
    expect(column_sum(r.face_levels, col), get(r.face_counts, col), "face levels column " + col);
  }
  expect(sum(r.privacy_classes), faces - get(r.face_levels, kLevelRows[0], kUploader),
         "privacy classes vs leakage-relevant faces");

  for (const char* level : {kImageLevel, kUploaderLevel}) {
    std::uint64_t by_label = 0, by_category = 0;
    for (const auto& row : kLabelRows) by_label += get(r.composition, row, level);
    for (const auto& row : kCategoryRows) by_category += get(r.composition, row, level);
    expect(by_label, by_category, std::string("composition ") + level);
  }
  // Code tables: each presence group sums to its composition row.
  const std::pair<std::string, std::string> group_rows[] = {
      {kCodeGroups[0], kCategoryRows[0]}, {kCodeGroups[1], kCategoryRows[3]},
      {kCodeGroups[2], kCategoryRows[2]}, {kCodeGroups[3], kCategoryRows[5]},
      {kCodeGroups[4], kCategoryRows[4]}, {kCodeGroups[5], kCategoryRows[6]}};
  for (const auto& [group, row] : group_rows) {
    expect(column_sum(r.image_codes, group), get(r.composition, row, kImageLevel),
           "image codes " + group);
    expect(column_sum(r.uploader_codes, group), get(r.composition, row, kUploaderLevel),
           "uploader codes " + group);
  }
  for (const auto& col : kCategoryCols) {
    const auto it = r.intentions.find(col);
    expect(it == r.intentions.end() ? 0 : total(it->second), get(r.manipulated_faces, col),
           "intentions " + col);
  }
  expect(total(r.parts), r.privacy_anonymized_faces, "parts table");
  expect(total(r.methods), r.privacy_anonymized_faces, "methods table");
  return bad;
}

// ---------------------------------------------------------------------------

namespace {

Json counts_json(const Counts& c) {
  Json j = Json::object();
  for (const auto& [row, cols] : c) j[row] = cols;
  return j;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

void write_counts_csv(const std::filesystem::path& path, const std::string& corner,
                      const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                      const Counts& c) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << csv_field(corner);
  for (const auto& col : cols) out << ',' << csv_field(col);
  out << '\n';
  for (const auto& row : rows) {
    out << csv_field(row);
    for (const auto& col : cols) out << ',' << get(c, row, col);
    out << '\n';
  }
}

std::vector<std::string> rows_of(const Counts& c) {
  std::vector<std::string> rows;
  for (const auto& [row, cols] : c) rows.push_back(row);
  return rows;
}

std::string file_slug(const std::string& category) {
  if (category == kBystanderStar) return "bystander_star";
  std::string s = category;
  for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

void text_table(std::ostringstream& os, const std::string& corner,
                const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                const Counts& c) {
  std::size_t w0 = corner.size();
  for (const auto& r : rows) w0 = std::max(w0, r.size());
  std::vector<std::size_t> w;
  for (const auto& col : cols) w.push_back(std::max<std::size_t>(col.size(), 6));
  auto pad = [](const std::string& s, std::size_t n, bool right) {
    const std::string fill(n > s.size() ? n - s.size() : 0, ' ');
    return right ? fill + s : s + fill;
  };
  os << "  " << pad(corner, w0, false);
  for (std::size_t j = 0; j < cols.size(); ++j) os << "  " << pad(cols[j], w[j], true);
  os << '\n';
  for (const auto& row : rows) {
    os << "  " << pad(row, w0, false);
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const auto n = get(c, row, cols[j]);
      os << "  " << pad(n ? std::to_string(n) : std::string(), w[j], true);
    }
    os << '\n';
  }
}

}  // namespace

Json to_json(const AuditReport& r) {
  Json j;
  j["images"] = r.images;
  j["celebrity_dropped"] = r.celebrity_dropped;
  j["uploaders"] = r.uploaders;
  j["face_counts"] = r.face_counts;
  j["composition"] = counts_json(r.composition);
  j["face_levels"] = counts_json(r.face_levels);
  j["privacy_classes"] = r.privacy_classes;
  j["image_codes"] = counts_json(r.image_codes);
  j["uploader_codes"] = counts_json(r.uploader_codes);
  Json intentions = Json::object();
  for (const auto& [cat, c] : r.intentions) intentions[cat] = counts_json(c);
  j["intentions"] = intentions;
  j["parts"] = counts_json(r.parts);
  j["methods"] = counts_json(r.methods);
  j["manipulated_faces"] = r.manipulated_faces;
  j["privacy_anonymized_faces"] = r.privacy_anonymized_faces;
  Json tests = Json::array();
  for (const auto& t : r.chi_square) {
    Json tj{{"name", t.name},
            {"rows", t.row_labels},
            {"cols", t.col_labels},
            {"table", t.table},
            {"dof", t.dof},
            {"yates", t.yates}};
    tj["statistic"] = t.statistic ? Json(*t.statistic) : Json(nullptr);
    tj["p_value"] = t.p_value ? Json(*t.p_value) : Json(nullptr);
    tests.push_back(std::move(tj));
  }
  j["chi_square"] = tests;
  return j;
}

std::string summary_text(const AuditReport& r) {
  std::ostringstream os;
  os << "Audit summary\n";
  os << "  images: " << r.images << "  uploaders: " << r.uploaders
     << "  celebrity images dropped: " << r.celebrity_dropped << "\n\n";
  os << "Faces\n";
  Counts fc;
  for (const auto& [k, v] : r.face_counts) fc["All faces"][k] = v;
  text_table(os, "", {"All faces"}, {kSubject, kBystander, kFriend, kUploader, kBystanderStar}, fc);
  os << "\nComposition\n";
  std::vector<std::string> comp_rows = kLabelRows;
  comp_rows.insert(comp_rows.end(), kCategoryRows.begin(), kCategoryRows.end());
  text_table(os, "", comp_rows, {kImageLevel, kUploaderLevel}, r.composition);
  os << "\nFace-level anonymization\n";
  text_table(os, "", kLevelRows, kCategoryCols, r.face_levels);
  os << "\nPrivacy classes: 1=" << get(r.privacy_classes, "1")
     << " 2=" << get(r.privacy_classes, "2") << " 3=" << get(r.privacy_classes, "3") << '\n';
  for (const auto& [title, codes] :
       {std::pair<const char*, const Counts*>{"Image-level codes", &r.image_codes},
        std::pair<const char*, const Counts*>{"Uploader-level codes", &r.uploader_codes}}) {
    os << '\n' << title << '\n';
    for (std::size_t g = 0; g < kCodeGroups.size(); g += 2) {
      const std::vector<std::string> cols = {kCodeGroups[g], kCodeGroups[g + 1]};
      std::vector<std::string> rows;
      for (const auto& [row, by_group] : *codes) {
        if (by_group.count(cols[0]) || by_group.count(cols[1])) rows.push_back(row);
      }
      if (!rows.empty()) text_table(os, "", rows, cols, *codes);
    }
  }
  for (const auto& [cat, c] : r.intentions) {
    os << "\nIntentions (" << cat << ")\n";
    text_table(os, "Intention", rows_of(c), kLevelRows, c);
  }
  if (!r.parts.empty()) {
    os << "\nManipulated parts (privacy intention)\n";
    text_table(os, "Part", rows_of(r.parts), kManipulationCols, r.parts);
    os << "\nManipulation methods (privacy intention)\n";
    text_table(os, "Method", rows_of(r.methods), kManipulationCols, r.methods);
  }
  os << "\nChi-square tests\n";
  for (const auto& t : r.chi_square) {
    os << "  " << t.name << ": ";
    if (t.statistic) {
      os << "chi2=" << fmt(*t.statistic) << " dof=" << t.dof << " p=" << fmt(*t.p_value)
         << (t.yates ? " (Yates)" : "") << '\n';
    } else {
      os << "not enough data\n";
    }
  }
  return os.str();
}

void export_report(const AuditReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "report.json", std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + (dir / "report.json").string());
    out << to_json(r).dump(2) << '\n';
  }
  Counts fc;
  for (const auto& [k, v] : r.face_counts) fc["All faces"][k] = v;
  write_counts_csv(dir / "face_counts.csv", "", {"All faces"},
                   {kSubject, kBystander, kFriend, kUploader, kBystanderStar}, fc);
  std::vector<std::string> comp_rows = kLabelRows;
  comp_rows.insert(comp_rows.end(), kCategoryRows.begin(), kCategoryRows.end());
  write_counts_csv(dir / "composition.csv", "", comp_rows, {kImageLevel, kUploaderLevel},
                   r.composition);
  write_counts_csv(dir / "face_levels.csv", "", kLevelRows, kCategoryCols, r.face_levels);
  Counts pc;
  for (const char* k : {"1", "2", "3"}) pc[k]["faces"] = get(r.privacy_classes, k);
  write_counts_csv(dir / "privacy_classes.csv", "Privacy class", {"1", "2", "3"}, {"faces"}, pc);
  write_counts_csv(dir / "image_codes.csv", "Code", rows_of(r.image_codes), kCodeGroups,
                   r.image_codes);
  write_counts_csv(dir / "uploader_codes.csv", "Code", rows_of(r.uploader_codes), kCodeGroups,
                   r.uploader_codes);
  for (const auto& cat : kCategoryCols) {
    const auto it = r.intentions.find(cat);
    const Counts empty;
    const Counts& c = it == r.intentions.end() ? empty : it->second;
    write_counts_csv(dir / ("intentions_" + file_slug(cat) + ".csv"), "Intention", rows_of(c),
                     kLevelRows, c);
  }
  write_counts_csv(dir / "parts.csv", "Part", rows_of(r.parts), kManipulationCols, r.parts);
  write_counts_csv(dir / "methods.csv", "Method", rows_of(r.methods), kManipulationCols,
                   r.methods);
  {
    std::ofstream out(dir / "chi_square.csv", std::ios::trunc);
    out << "test,statistic,dof,p_value,yates\n";
    for (const auto& t : r.chi_square) {
      out << csv_field(t.name) << ',' << (t.statistic ? fmt(*t.statistic, 6) : "") << ','
          << t.dof << ',' << (t.p_value ? fmt(*t.p_value, 6) : "") << ','
          << (t.yates ? "true" : "false") << '\n';
    }
  }
  std::ofstream out(dir / "summary.txt", std::ios::trunc);
  out << summary_text(r);
}

}  // namespace facegate::audit
