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

// Data-parallel inner loops. Every kernel has an OpenMP version used by the
// library and a plain serial version kept as the reference in tests and
// benchmarks. Both produce results independent of thread scheduling.

#include <vector>

#include "xwalk/geometry.hpp"
#include "xwalk/raster.hpp"

namespace xwalk::kernels {

/// Inverse-mapping warp: each set pixel of `region` samples the art at
/// H^-1 * (x, y). Output is RGBA with alpha 1 where the sample exists.
Raster warp_serial(const Raster& art, const Homography& h, int width, int height, const BinaryMask& region);
Raster warp_parallel(const Raster& art, const Homography& h, int width, int height, const BinaryMask& region);

/// Zero-mean padded template used for correlation scoring.
struct CorrelationTemplate {
  int width = 0;   // window width
  int height = 0;  // window height
  std::vector<double> zero_mean;  // width * height * 3, interleaved RGB
  double norm = 0.0;              // sqrt(sum of squares of zero_mean)
};

/// Row-major map of correlation scores, one per window position.
struct ScoreMap {
  int cols = 0;  // number of window positions along x
  int rows = 0;
  int stride = 1;
  std::vector<double> scores;
  double at(int col, int row) const { return scores[static_cast<std::size_t>(row) * cols + col]; }
};

/// Normalized cross-correlation between every window and the template.
/// Windows with (numerically) zero variance score 0.
ScoreMap ncc_serial(const Raster& image, const CorrelationTemplate& t, int stride);
ScoreMap ncc_parallel(const Raster& image, const CorrelationTemplate& t, int stride);

/// dst = alpha * src + (1 - alpha) * dst over the RGB channels of dst, where
/// alpha = src alpha * opacity. Alpha 1 copies src exactly.
void over_serial(Raster& dst, const Raster& src, int offset_x, int offset_y, double opacity = 1.0);
void over_parallel(Raster& dst, const Raster& src, int offset_x, int offset_y, double opacity = 1.0);

}  // namespace xwalk::kernels
