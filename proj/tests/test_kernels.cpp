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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "xwalk/detect.hpp"
#include "xwalk/errors.hpp"
#include "xwalk/geometry.hpp"
#include "xwalk/kernels.hpp"
#include "xwalk/scenegen.hpp"
#include "test_support.hpp"

namespace xwalk {
namespace {

// Pearson correlation of the flattened window with the flattened template.
double ncc_oracle(const Raster& img, const Raster& padded, int x0, int y0) {
  const int n = padded.width() * padded.height() * 3;
  double sw = 0, st = 0;
  for (int y = 0; y < padded.height(); ++y)
    for (int x = 0; x < padded.width(); ++x)
      for (int c = 0; c < 3; ++c) {
        sw += img.at(x0 + x, y0 + y, c);
        st += padded.at(x, y, c);
      }
  const double mw = sw / n, mt = st / n;
  double cov = 0, vw = 0, vt = 0;
  for (int y = 0; y < padded.height(); ++y)
    for (int x = 0; x < padded.width(); ++x)
      for (int c = 0; c < 3; ++c) {
        const double a = img.at(x0 + x, y0 + y, c) - mw;
        const double b = padded.at(x, y, c) - mt;
        cov += a * b;
        vw += a * a;
        vt += b * b;
      }
  if (vw <= 1e-12 * n) return 0.0;
  return cov / std::sqrt(vw * vt);
}

TEST(Ncc, MatchesOracleBothKernels) {
  std::mt19937_64 rng(21);
  const DetectorConfig cfg = tuned_detector_config();
  const auto t = correlation_template(cfg);
  const Raster padded = padded_template(cfg);
  const Raster img = testing::random_raster(40, 33, 3, rng);
  const auto s = kernels::ncc_serial(img, t, 1);
  const auto p = kernels::ncc_parallel(img, t, 1);
  ASSERT_EQ(s.cols, 40 - cfg.window_w + 1);
  ASSERT_EQ(s.rows, 33 - cfg.window_h + 1);
  for (int r = 0; r < s.rows; ++r)
    for (int c = 0; c < s.cols; ++c) {
      const double want = ncc_oracle(img, padded, c, r);
      ASSERT_NEAR(s.at(c, r), want, 1e-12);
      ASSERT_NEAR(p.at(c, r), want, 1e-9);
    }
}

TEST(Ncc, StrideAndRgbaInput) {
  std::mt19937_64 rng(22);
  const auto t = correlation_template(tuned_detector_config());
  const Raster img = testing::random_raster(50, 40, 4, rng);
  const auto s = kernels::ncc_serial(img, t, 3);
  const auto p = kernels::ncc_parallel(img, t, 3);
  ASSERT_EQ(s.scores.size(), p.scores.size());
  for (std::size_t i = 0; i < s.scores.size(); ++i) EXPECT_NEAR(s.scores[i], p.scores[i], 1e-9);
  EXPECT_THROW(kernels::ncc_parallel(img, t, 0), ShapeError);
  EXPECT_THROW(kernels::ncc_parallel(Raster(50, 40, 1), t, 1), ShapeError);
}

TEST(Ncc, SelfCorrelationIsOne) {
  const DetectorConfig cfg = tuned_detector_config();
  const auto t = correlation_template(cfg);
  const Raster padded = padded_template(cfg);
  const auto m = kernels::ncc_parallel(padded, t, 1);
  ASSERT_EQ(m.scores.size(), 1u);
  EXPECT_NEAR(m.scores[0], 1.0, 1e-12);
}

TEST(Ncc, FlatWindowScoresZero) {
  const auto t = correlation_template(tuned_detector_config());
  const auto m = kernels::ncc_parallel(Raster(30, 30, 3, 0.4), t, 1);
  for (double v : m.scores) EXPECT_EQ(v, 0.0);
}

TEST(Ncc, ImageSmallerThanWindow) {
  const auto t = correlation_template(tuned_detector_config());
  const auto m = kernels::ncc_parallel(Raster(5, 5, 3), t, 1);
  EXPECT_TRUE(m.scores.empty());
}

TEST(Warp, SerialEqualsParallel) {
  std::mt19937_64 rng(23);
  const Raster art = testing::random_raster(20, 10, 3, rng);
  const Polygon region{{{10.3, 5.1}, {90.7, 12.2}, {85.0, 60.9}, {4.4, 50.0}}};
  const Homography h = homography_from_correspondences(
      art_corners(20, 10), {region.vertices[0], region.vertices[1], region.vertices[2], region.vertices[3]});
  const BinaryMask mask = rasterize_polygon(region, 100, 70);
  EXPECT_EQ(kernels::warp_serial(art, h, 100, 70, mask), kernels::warp_parallel(art, h, 100, 70, mask));
}

TEST(Over, SerialEqualsParallelAndOracle) {
  std::mt19937_64 rng(24);
  const Raster base = testing::random_raster(30, 20, 3, rng);
  Raster src = testing::random_raster(10, 8, 4, rng);
  src.at(0, 0, 3) = 1.0;
  src.at(1, 0, 3) = 0.0;
  Raster a = base, b = base;
  kernels::over_serial(a, src, 5, 7, 0.8);
  kernels::over_parallel(b, src, 5, 7, 0.8);
  EXPECT_EQ(a, b);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 30; ++x)
      for (int c = 0; c < 3; ++c) {
        double want = base.at(x, y, c);
        if (x >= 5 && x < 15 && y >= 7 && y < 15) {
          const double al = src.at(x - 5, y - 7, 3) * 0.8;
          want = al * src.at(x - 5, y - 7, c) + (1 - al) * base.at(x, y, c);
        }
        EXPECT_NEAR(a.at(x, y, c), want, 1e-15);
      }
}

TEST(Over, OpaqueCopiesExactly) {
  std::mt19937_64 rng(25);
  Raster dst = testing::random_raster(8, 8, 3, rng);
  Raster src = testing::random_raster(3, 3, 4, rng);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 3; ++x) src.at(x, y, 3) = 1.0;
  kernels::over_parallel(dst, src, 2, 4, 1.0);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 3; ++x)
      for (int c = 0; c < 3; ++c) EXPECT_EQ(dst.at(2 + x, 4 + y, c), src.at(x, y, c));
}

TEST(Over, OutOfBoundsThrows) {
  Raster dst(8, 8, 3);
  EXPECT_THROW(kernels::over_serial(dst, Raster(3, 3, 4), 6, 0, 1.0), ShapeError);
  EXPECT_THROW(kernels::over_parallel(dst, Raster(3, 3, 4), -1, 0, 1.0), ShapeError);
}

}  // namespace
}  // namespace xwalk
