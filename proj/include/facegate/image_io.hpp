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

#include <filesystem>

#include "facegate/imaging.hpp"

namespace facegate::imaging {

// PNG/JPEG decoding. Gray sources are expanded to three equal channels.
// Throws kIoError when the file is missing or cannot be decoded.
RgbImage read_rgb(const std::filesystem::path& path);
GrayImage read_gray(const std::filesystem::path& path);

// Lossless PNG at a fixed compression level (same input, same bytes).
void write_png(const std::filesystem::path& path, const GrayImage& image);

}  // namespace facegate::imaging
