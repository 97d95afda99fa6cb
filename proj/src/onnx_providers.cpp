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

#include <mutex>

#include <opencv2/core.hpp>
#include <opencv2/dnn.hpp>
#include <opencv2/imgproc.hpp>

#include "facegate/error.hpp"
#include "facegate/providers.hpp"

namespace facegate::providers {

namespace detail {

class OnnxNet {
 public:
  OnnxNet(const std::filesystem::path& model, int input_size) : input_size_(input_size) {
    if (!std::filesystem::exists(model)) {
      throw Error(ErrorCode::kProviderError, "model file " + model.string() + " does not exist");
    }
    try {
      net_ = cv::dnn::readNetFromONNX(model.string());
    } catch (const cv::Exception& e) {
      throw Error(ErrorCode::kProviderError,
                  "cannot load ONNX model " + model.string() + ": " + e.what());
    }
    if (net_.empty()) {
      throw Error(ErrorCode::kProviderError, "ONNX model " + model.string() + " is empty");
    }
  }

  // Resizes the RGB crop to the square network input, normalizes with the
  // ImageNet statistics and returns the flattened first output.
  std::vector<float> run(const imaging::RgbImage& image, const imaging::RectRegion& crop) {
    const auto clipped = imaging::clip(crop, image.width, image.height);
    if (!clipped) throw Error(ErrorCode::kProviderError, "model input crop is empty");
    cv::Mat full(image.height, image.width, CV_8UC3, const_cast<std::uint8_t*>(image.rgb.data()));
    cv::Mat roi = full(cv::Rect(clipped->x, clipped->y, clipped->w, clipped->h));
    cv::Mat resized, scaled;
    cv::resize(roi, resized, cv::Size(input_size_, input_size_), 0, 0, cv::INTER_LINEAR);
    resized.convertTo(scaled, CV_32FC3, 1.0 / 255.0);
    cv::subtract(scaled, cv::Scalar(0.485, 0.456, 0.406), scaled);
    cv::divide(scaled, cv::Scalar(0.229, 0.224, 0.225), scaled);
    cv::Mat blob = cv::dnn::blobFromImage(scaled, 1.0, cv::Size(), cv::Scalar(), false, false);

    std::lock_guard lock(mutex_);
    cv::Mat out;
    try {
      net_.setInput(blob);
      out = net_.forward();
    } catch (const cv::Exception& e) {
      throw Error(ErrorCode::kProviderError, std::string("model inference failed: ") + e.what());
    }
    cv::Mat flat = out.reshape(1, 1);
    flat.convertTo(flat, CV_32F);
    return std::vector<float>(flat.begin<float>(), flat.end<float>());
  }

  int input_size() const { return input_size_; }

 private:
  cv::dnn::Net net_;
  int input_size_;
  std::mutex mutex_;
};

}  // namespace detail

namespace {

const imaging::RgbImage& require_image(const FaceContext& ctx) {
  if (!ctx.image) {
    throw Error(ErrorCode::kProviderError,
                "model provider needs image pixels for face '" + ctx.face.face_id + "'");
  }
  return *ctx.image;
}

}  // namespace

OnnxEmbeddingProvider::OnnxEmbeddingProvider(const std::filesystem::path& model, int input_size)
    : net_(std::make_unique<detail::OnnxNet>(model, input_size)) {}

OnnxEmbeddingProvider::~OnnxEmbeddingProvider() = default;

Embedding OnnxEmbeddingProvider::embed(const FaceContext& ctx) const {
  const auto out = net_->run(require_image(ctx), ctx.face.box);
  if (out.size() != features::kEmbeddingDim) {
    throw Error(ErrorCode::kProviderError, "embedding model produced " +
                                               std::to_string(out.size()) +
                                               " values, expected 512");
  }
  Embedding e;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!std::isfinite(out[i])) {
      throw Error(ErrorCode::kProviderError, "embedding model produced a non-finite value");
    }
    e.values[i] = out[i];
  }
  e.source = features::EmbeddingSource::kModel;
  return e;
}

OnnxPoseModel::OnnxPoseModel(const std::filesystem::path& model, int input_size)
    : net_(std::make_unique<detail::OnnxNet>(model, input_size)) {}

OnnxPoseModel::~OnnxPoseModel() = default;

HeadPose OnnxPoseModel::infer(const FaceContext& ctx) const {
  const auto out = net_->run(require_image(ctx), ctx.face.box);
  if (out.size() != 3) {
    throw Error(ErrorCode::kProviderError,
                "pose model produced " + std::to_string(out.size()) + " values, expected 3");
  }
  return {out[0], out[1], out[2]};
}

OnnxFaceDetector::OnnxFaceDetector(const std::filesystem::path& model, double threshold,
                                   int input_size)
    : net_(std::make_unique<detail::OnnxNet>(model, input_size)), threshold_(threshold) {}

OnnxFaceDetector::~OnnxFaceDetector() = default;

std::vector<FaceObservation> OnnxFaceDetector::detect(const imaging::RgbImage& image,
                                                      std::string_view image_id) const {
  constexpr std::size_t kRow = 9;
  const auto out = net_->run(image, {0, 0, image.width, image.height});
  if (out.size() % kRow != 0) {
    throw Error(ErrorCode::kProviderError,
                "detector output of " + std::to_string(out.size()) + " values is not rows of 9");
  }
  std::vector<FaceObservation> faces;
  const double w = image.width, h = image.height;
  for (std::size_t row = 0; row * kRow < out.size(); ++row) {
    const float* v = out.data() + row * kRow;
    if (v[4] < threshold_) continue;
    const double x1 = std::clamp<double>(v[0], 0.0, 1.0) * w;
    const double y1 = std::clamp<double>(v[1], 0.0, 1.0) * h;
    const double x2 = std::clamp<double>(v[2], 0.0, 1.0) * w;
    const double y2 = std::clamp<double>(v[3], 0.0, 1.0) * h;
    FaceObservation f;
    f.face_id = std::string(image_id) + "#" + std::to_string(faces.size());
    f.box = {static_cast<int>(std::lround(x1)), static_cast<int>(std::lround(y1)),
             std::max(1, static_cast<int>(std::lround(x2 - x1))),
             std::max(1, static_cast<int>(std::lround(y2 - y1)))};
    f.eye_left = features::Point{std::clamp<double>(v[5], 0.0, 1.0) * w,
                                 std::clamp<double>(v[6], 0.0, 1.0) * h};
    f.eye_right = features::Point{std::clamp<double>(v[7], 0.0, 1.0) * w,
                                  std::clamp<double>(v[8], 0.0, 1.0) * h};
    f.confidence = std::clamp<double>(v[4], 0.0, 1.0);
    f.detected = true;
    faces.push_back(std::move(f));
  }
  return faces;
}

}  // namespace facegate::providers
