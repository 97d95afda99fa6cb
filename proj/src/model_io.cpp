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

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "facegate/classifier.hpp"
#include "facegate/error.hpp"
#include "facegate/seed.hpp"

namespace facegate::classifier {

namespace {

constexpr char kMagic[8] = {'F', 'A', 'C', 'E', 'G', 'A', 'T', 'E'};
constexpr std::size_t kHeaderBytes = 8 + 4 * 6 + 8;

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void f64s(const std::vector<double>& v) {
    for (double x : v) f64(x);
  }
  void raw(const char* p, std::size_t n) { bytes_.append(p, n); }
  const std::string& bytes() const { return bytes_; }

 private:
  std::string bytes_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte(pos_ + i)) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(byte(pos_ + i)) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::vector<double> f64s(std::size_t n) {
    need(8 * n);
    std::vector<double> v(n);
    for (double& x : v) x = f64();
    return v;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  unsigned char byte(std::size_t i) const { return static_cast<unsigned char>(bytes_[i]); }
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw Error(ErrorCode::kFormatError, "model file is truncated at byte " +
                                               std::to_string(bytes_.size()));
    }
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t mask_code(FeatureMask m) {
  switch (m) {
    case FeatureMask::kFF: return 0;
    case FeatureMask::kFM: return 1;
    case FeatureMask::kFFFM: return 2;
  }
  return 2;
}

}  // namespace

void save_model(const MlpModel& model, std::ostream& out) {
  model.validate();
  const std::size_t d = model.input_dim;
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(MlpModel::kFormatVersion);
  w.u32(mask_code(model.mask));
  w.u32(static_cast<std::uint32_t>(d));
  w.u32(static_cast<std::uint32_t>(kHiddenUnits));
  w.u32(static_cast<std::uint32_t>(kClasses));
  w.u32(model.scaler.mean.empty() ? 0 : 1);
  w.f64(model.dropout_rate);
  if (model.scaler.mean.empty()) {
    w.f64s(std::vector<double>(d, 0.0));
    w.f64s(std::vector<double>(d, 1.0));
  } else {
    w.f64s(model.scaler.mean);
    w.f64s(model.scaler.scale);
  }
  w.f64s(model.w1);
  w.f64s(model.b1);
  w.f64s(model.w2);
  w.f64s(model.b2);
  const std::uint64_t checksum = fnv1a(w.bytes());
  w.u64(checksum);
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw Error(ErrorCode::kIoError, "failed to write model");
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  save_model(model, out);
}

MlpModel load_model(std::istream& in) {
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < kHeaderBytes) {
    throw Error(ErrorCode::kFormatError, "model file is truncated (" +
                                             std::to_string(bytes.size()) + " bytes)");
  }
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw Error(ErrorCode::kFormatError, "not a facegate model file (bad magic)");
  }
  Reader r(std::string_view(bytes).substr(sizeof kMagic));
  const std::uint32_t version = r.u32();
  if (version > MlpModel::kFormatVersion || version == 0) {
    throw Error(ErrorCode::kUnsupportedVersion,
                "model format version " + std::to_string(version) + " is not supported (max " +
                    std::to_string(MlpModel::kFormatVersion) + ")");
  }
  const std::uint32_t mask = r.u32();
  const std::uint32_t d = r.u32();
  const std::uint32_t hidden = r.u32();
  const std::uint32_t classes = r.u32();
  const std::uint32_t has_scaler = r.u32();
  if (mask > 2 || hidden != kHiddenUnits || classes != kClasses || has_scaler > 1) {
    throw Error(ErrorCode::kFormatError, "model header holds invalid dimensions");
  }
  MlpModel m;
  m.mask = mask == 0 ? FeatureMask::kFF : (mask == 1 ? FeatureMask::kFM : FeatureMask::kFFFM);
  m.input_dim = d;
  if (d != features::input_dim(m.mask)) {
    throw Error(ErrorCode::kFormatError, "model input dimension does not match its mask");
  }
  m.dropout_rate = r.f64();
  m.scaler.mean = r.f64s(d);
  m.scaler.scale = r.f64s(d);
  if (!has_scaler) m.scaler = {};
  m.w1 = r.f64s(static_cast<std::size_t>(kHiddenUnits) * d);
  m.b1 = r.f64s(kHiddenUnits);
  m.w2 = r.f64s(kClasses * kHiddenUnits);
  m.b2 = r.f64s(kClasses);
  const std::size_t payload_end = sizeof kMagic + r.pos();
  const std::uint64_t stored = r.u64();
  if (r.remaining() != 0) {
    throw Error(ErrorCode::kFormatError, "model file has trailing bytes");
  }
  if (stored != fnv1a(std::string_view(bytes).substr(0, payload_end))) {
    throw Error(ErrorCode::kFormatError, "model file checksum mismatch (corrupted)");
  }
  m.validate();
  return m;
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return load_model(in);
}

}  // namespace facegate::classifier
