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

#include "xwalk/raster.hpp"

#include <algorithm>
#include <cmath>

#include "xwalk/errors.hpp"

namespace xwalk {

namespace {
// Tolerance for coordinates that land on the border through rounding.
constexpr double kEdgeSlack = 1e-9;
}  // namespace

Raster::Raster(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  if (width < 1 || height < 1) throw ShapeError("raster dimensions must be positive");
  if (channels < 1 || channels > 4) throw ShapeError("raster must have 1 to 4 channels");
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

bool Raster::in_unit_range() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; });
}

std::optional<Sample> sample_bilinear(const Raster& r, double x, double y) {
  const double max_x = r.width() - 1;
  const double max_y = r.height() - 1;
  if (!(x >= -kEdgeSlack && x <= max_x + kEdgeSlack && y >= -kEdgeSlack && y <= max_y + kEdgeSlack)) {
    return std::nullopt;
  }
  x = std::clamp(x, 0.0, max_x);
  y = std::clamp(y, 0.0, max_y);
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, r.width() - 1);
  const int y1 = std::min(y0 + 1, r.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;

  Sample s;
  s.channels = r.channels();
  for (int c = 0; c < r.channels(); ++c) {
    const double a = r.at(x0, y0, c);
    const double b = r.at(x1, y0, c);
    const double d = r.at(x0, y1, c);
    const double e = r.at(x1, y1, c);
    const double top = a + fx * (b - a);
    const double bottom = d + fx * (e - d);
    s.v[c] = top + fy * (bottom - top);
  }
  return s;
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

BinaryMask mask_from_raster(const Raster& r) {
  BinaryMask m(r.width(), r.height());
  for (int y = 0; y < r.height(); ++y) {
    for (int x = 0; x < r.width(); ++x) {
      bool on = false;
      for (int c = 0; c < r.channels(); ++c) on = on || r.at(x, y, c) != 0.0;
      m.set(x, y, on);
    }
  }
  return m;
}

void clamp_unit(Raster& r) {
  for (double& v : r.data()) v = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
}

Raster quantize8(const Raster& r) {
  Raster out = r;
  for (double& v : out.data()) v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
  return out;
}

}  // namespace xwalk
