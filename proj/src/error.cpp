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

#include "facegate/error.hpp"

namespace facegate {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidImage: return "InvalidImage";
    case ErrorCode::kMissingLandmark: return "MissingLandmark";
    case ErrorCode::kOutOfBounds: return "OutOfBounds";
    case ErrorCode::kUnknownFace: return "UnknownFace";
    case ErrorCode::kMissingEmbedding: return "MissingEmbedding";
    case ErrorCode::kMissingPose: return "MissingPose";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kDanglingReference: return "DanglingReference";
    case ErrorCode::kValidationError: return "ValidationError";
    case ErrorCode::kProviderError: return "ProviderError";
    case ErrorCode::kDegenerateVector: return "DegenerateVector";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kDivergence: return "DivergenceError";
    case ErrorCode::kUnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kInvalidK: return "InvalidK";
    case ErrorCode::kNotAFace: return "NotAFace";
    case ErrorCode::kInconsistentCoding: return "InconsistentCoding";
    case ErrorCode::kIncompleteFace: return "IncompleteFace";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace facegate
