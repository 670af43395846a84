// Copyright 2026 The xwalk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "xwalk/raster.hpp"

namespace xwalk {

/// Reads an 8-bit (or 16-bit) PNG or a binary PPM (P6). Gray inputs are
/// expanded to RGB, palettes are expanded, alpha is kept.
Raster load_image(const std::filesystem::path& path);

/// Writes 8-bit PNG, or PPM when the extension is .ppm. RGBA rasters cannot
/// be written as PPM.
void save_image(const Raster& r, const std::filesystem::path& path);

/// Single-channel PNG mask; nonzero samples are set.
BinaryMask load_mask(const std::filesystem::path& path);
void save_mask(const BinaryMask& m, const std::filesystem::path& path);

/// In-memory PNG codec used by the detector exchange protocol.
std::vector<std::uint8_t> encode_png(const Raster& r);
Raster decode_png(std::span<const std::uint8_t> bytes);

/// 16-bit PNG of samples in [0,1], quantized to 1/65535.
void save_png16(const Raster& r, const std::filesystem::path& path);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

}  // namespace xwalk
