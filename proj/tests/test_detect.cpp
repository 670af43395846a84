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
#include "xwalk/scenegen.hpp"
#include "test_support.hpp"

namespace xwalk {
namespace {

// Context-coloured canvas with the padded template pasted at each window origin.
Raster canvas_with_templates(const DetectorConfig& cfg, int w, int h, const std::vector<std::pair<int, int>>& at) {
  Raster img(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = cfg.context[c];
  const Raster padded = padded_template(cfg);
  for (const auto& [x0, y0] : at)
    for (int y = 0; y < padded.height(); ++y)
      for (int x = 0; x < padded.width(); ++x)
        for (int c = 0; c < 3; ++c) img.at(x0 + x, y0 + y, c) = padded.at(x, y, c);
  return img;
}

TEST(Synthetic, ExactCopyFiresOnce) {
  const DetectorConfig cfg = tuned_detector_config();
  const Raster img = canvas_with_templates(cfg, 60, 50, {{20, 12}});
  const auto dets = synthetic_detect(img, cfg).detections;
  ASSERT_EQ(dets.size(), 1u);
  EXPECT_NEAR(dets[0].objectness, sigmoid(cfg.gain * (1.0 - cfg.threshold)), 1e-9);
  EXPECT_GT(dets[0].objectness, 0.9);
  EXPECT_EQ(dets[0].box, template_box(cfg, 20, 12));
}

TEST(Synthetic, UniformImageHasNoDetections) {
  DetectorConfig cfg = tuned_detector_config();
  cfg.gain = 10;
  cfg.threshold = 0.5;
  EXPECT_LT(sigmoid(-cfg.gain * cfg.threshold), kKeepObjectness);
  EXPECT_TRUE(synthetic_detect(Raster(40, 40, 3, 0.7), cfg).detections.empty());
}

TEST(Synthetic, TwoSeparatedCopies) {
  const DetectorConfig cfg = tuned_detector_config();
  const Raster img = canvas_with_templates(cfg, 90, 50, {{5, 5}, {50, 20}});
  const auto dets = synthetic_detect(img, cfg).detections;
  ASSERT_EQ(dets.size(), 2u);
}

TEST(Synthetic, SerialAndParallelAgree) {
  SceneGenConfig gen;
  const DetectorConfig cfg = tuned_detector_config();
  for (int i = 0; i < 5; ++i) {
    const Raster img = compose_scene(generate_scene(gen, i).scene, nullptr);
    const auto a = synthetic_detect(img, cfg).detections;
    const auto b = synthetic_detect_serial(img, cfg).detections;
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      EXPECT_EQ(a[k].box, b[k].box);
      EXPECT_NEAR(a[k].objectness, b[k].objectness, 1e-9);
    }
  }
}

TEST(Synthetic, TranslationCovariant) {
  const DetectorConfig cfg = tuned_detector_config();
  std::mt19937_64 rng(41);
  const Raster base = quantize8(canvas_with_templates(cfg, 50, 45, {{10, 8}}));
  Raster noisy = base;
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (double& v : noisy.data()) v = std::clamp(v + u(rng), 0.0, 1.0);
  const int dx = 7, dy = 4;
  Raster shifted(noisy.width() + dx, noisy.height() + dy, 3, 0.0);
  for (int y = 0; y < noisy.height(); ++y)
    for (int x = 0; x < noisy.width(); ++x)
      for (int c = 0; c < 3; ++c) shifted.at(x + dx, y + dy, c) = noisy.at(x, y, c);
  const auto a = synthetic_detect(noisy, cfg).detections;
  const auto b = synthetic_detect(shifted, cfg).detections;
  ASSERT_FALSE(a.empty());
  // Every original detection reappears shifted with the same objectness.
  for (const auto& d : a) {
    bool found = false;
    for (const auto& e : b)
      if (e.box == Box{d.box.x + dx, d.box.y + dy, d.box.w, d.box.h}) {
        found = true;
        EXPECT_NEAR(e.objectness, d.objectness, 1e-9);
      }
    EXPECT_TRUE(found);
  }
}

TEST(Synthetic, ScoreIsLipschitzInOnePixel) {
  const DetectorConfig cfg = tuned_detector_config();
  const auto t = correlation_template(cfg);
  std::mt19937_64 rng(42);
  const Raster img = testing::random_raster(cfg.window_w, cfg.window_h, 3, rng);
  const double n = static_cast<double>(t.zero_mean.size());
  const double base = kernels::ncc_serial(img, t, 1).scores[0];
  double var = 0, mean = 0;
  for (double v : img.data()) mean += v / n;
  for (double v : img.data()) var += (v - mean) * (v - mean);
  // A single-sample change of delta moves the window norm by at most delta,
  // so |d score| <= 2 delta / (|w - mean| - delta) bounds the change.
  for (double delta : {1e-3, 1e-2}) {
    Raster moved = img;
    moved.at(3, 5, 1) += delta;
    const double s = kernels::ncc_serial(moved, t, 1).scores[0];
    EXPECT_LE(std::abs(s - base), 2 * delta / (std::sqrt(var) - delta));
  }
}

TEST(Nms, StableAndSuppresses) {
  std::vector<Detection> dets{{{0, 0, 10, 10}, 0.8, std::nullopt},
                              {{1, 1, 10, 10}, 0.9, std::nullopt},
                              {{30, 30, 5, 5}, 0.8, std::nullopt},
                              {{2, 0, 10, 10}, 0.9, std::nullopt}};
  const auto kept = non_max_suppression(dets, 0.5);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].box, (Box{1, 1, 10, 10}));
  EXPECT_EQ(kept[1].box, (Box{30, 30, 5, 5}));
}

TEST(Nms, NoPairAboveThresholdOnScenes) {
  SceneGenConfig gen;
  DetectorConfig cfg = tuned_detector_config();
  cfg.threshold = 0.35;  // many proposals
  for (int i = 0; i < 3; ++i) {
    const auto dets = synthetic_detect(compose_scene(generate_scene(gen, i).scene, nullptr), cfg).detections;
    for (std::size_t a = 0; a < dets.size(); ++a)
      for (std::size_t b = a + 1; b < dets.size(); ++b) EXPECT_LE(iou(dets[a].box, dets[b].box), cfg.nms_iou);
    for (const auto& d : dets) EXPECT_TRUE(is_valid(d));
  }
}

TEST(Synthetic, MaxObjectnessMatchesDetect) {
  SceneGenConfig gen;
  SyntheticDetector det(tuned_detector_config());
  for (int i = 0; i < 5; ++i) {
    const Raster img = compose_scene(generate_scene(gen, i).scene, nullptr);
    double want = 0;
    for (const auto& d : det.detect(img)) want = std::max(want, d.objectness);
    EXPECT_EQ(det.max_objectness(img), want);
  }
}

TEST(Synthetic, UndersizedImage) {
  const DetectorConfig cfg = tuned_detector_config();
  const auto r = synthetic_detect(Raster(5, 5, 3), cfg);
  EXPECT_TRUE(r.undersized);
  EXPECT_TRUE(r.detections.empty());
}

TEST(DetectorConfig, Validation) {
  DetectorConfig cfg = tuned_detector_config();
  cfg.window_w = 3;
  EXPECT_THROW(validate(cfg), InputError);
  cfg = tuned_detector_config();
  cfg.nms_iou = 1.0;
  EXPECT_THROW(validate(cfg), InputError);
  const DetectorConfig o = apply_overrides(tuned_detector_config(), {{"gain", 9.0}, {"window", {15, 25}}});
  EXPECT_EQ(o.gain, 9.0);
  EXPECT_EQ(o.window_h, 25);
  EXPECT_THROW(apply_overrides(tuned_detector_config(), {{"stride", 0}}), InputError);
}

TEST(Detection, JsonRoundTripAndValidity) {
  const Detection d{{1.5, 2, 3, 4}, 0.25, std::vector<double>{0.9}};
  EXPECT_EQ(detection_from_json(to_json(d)), d);
  const Detection e{{1, 2, 3, 4}, 0.5, std::nullopt};
  EXPECT_EQ(detection_from_json(to_json(e)), e);
  EXPECT_FALSE(is_valid({{0, 0, 0, 1}, 0.5, std::nullopt}));
  EXPECT_FALSE(is_valid({{0, 0, 1, 1}, 1.5, std::nullopt}));
  EXPECT_FALSE(is_valid({{0, 0, 1, 1}, 0.5, std::vector<double>{-0.1}}));
  EXPECT_TRUE(is_valid(d));
}

}  // namespace
}  // namespace xwalk
