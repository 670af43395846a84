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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace xwalk {

/// Row-major, channel-interleaved image with real-valued samples.
///
/// Scenes and art patterns keep every sample in [0,1]; perturbation deltas
/// reuse the same carrier with signed values. Pixel (x, y) is centred on the
/// integer coordinate and covers [x-0.5, x+0.5) x [y-0.5, y+0.5).
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, int channels, double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }
  std::size_t size() const { return data_.size(); }

  double& at(int x, int y, int c) { return data_[index(x, y, c)]; }
  double at(int x, int y, int c) const { return data_[index(x, y, c)]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  bool same_shape(const Raster& other) const {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  /// True when every sample is finite and inside [0,1].
  bool in_unit_range() const;

  bool operator==(const Raster& other) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

/// Per-channel value returned by sampling; only the first `channels` entries are meaningful.
struct Sample {
  std::array<double, 4> v{};
  int channels = 0;
};

/// Bilinear interpolation between the four nearest pixel centres.
/// Returns nullopt outside [0, w-1] x [0, h-1] (no border clamping).
std::optional<Sample> sample_bilinear(const Raster& r, double x, double y);

class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool fill = false)
      : width_(width), height_(height), bits_(static_cast<std::size_t>(width) * height, fill ? 1 : 0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool get(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int x, int y, bool on = true) { bits_[static_cast<std::size_t>(y) * width_ + x] = on ? 1 : 0; }
  std::size_t count() const;
  bool any() const { return count() > 0; }

  bool operator==(const BinaryMask& other) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Samples equal to zero in every channel become unset.
BinaryMask mask_from_raster(const Raster& r);

/// Clamp every sample into [0,1]; NaN becomes 0.
void clamp_unit(Raster& r);

/// Round every sample to the nearest multiple of 1/255.
Raster quantize8(const Raster& r);

}  // namespace xwalk
