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

#include "xwalk/detect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xwalk/errors.hpp"

namespace xwalk {

namespace {

struct Candidate {
  double objectness;
  Box box;
};

template <class ScoreFn>
DetectResult detect_with(const Raster& image, const DetectorConfig& cfg, ScoreFn score_map) {
  validate(cfg);
  DetectResult result;
  if (image.width() < cfg.window_w || image.height() < cfg.window_h) {
    result.undersized = true;
    return result;
  }
  const kernels::ScoreMap map = score_map(image);
  std::vector<Detection> dets;
  for (int row = 0; row < map.rows; ++row) {
    for (int col = 0; col < map.cols; ++col) {
      const double obj = sigmoid(cfg.gain * (map.at(col, row) - cfg.threshold));
      if (obj > kKeepObjectness) dets.push_back({template_box(cfg, col * map.stride, row * map.stride), obj, std::nullopt});
    }
  }
  result.detections = non_max_suppression(std::move(dets), cfg.nms_iou);
  return result;
}

}  // namespace

bool is_valid(const Detection& d) {
  const auto& b = d.box;
  if (!std::isfinite(b.x) || !std::isfinite(b.y) || !std::isfinite(b.w) || !std::isfinite(b.h)) return false;
  if (!(b.w > 0 && b.h > 0)) return false;
  if (!(d.objectness >= 0.0 && d.objectness <= 1.0)) return false;
  if (d.class_scores) {
    for (double c : *d.class_scores)
      if (!(c >= 0.0 && c <= 1.0)) return false;
  }
  return true;
}

double Detector::max_objectness(const Raster& image) {
  double best = 0.0;
  for (const auto& d : detect(image)) best = std::max(best, d.objectness);
  return best;
}

void validate(const DetectorConfig& cfg) {
  if (cfg.pattern.empty() || cfg.pattern.channels() < 3) throw InputError("detector template must be RGB(A)");
  if (cfg.window_w < cfg.pattern.width() || cfg.window_h < cfg.pattern.height())
    throw InputError("detector window must be at least the template size");
  if (cfg.stride < 1) throw InputError("detector stride must be >= 1");
  if (!(cfg.nms_iou > 0.0 && cfg.nms_iou < 1.0)) throw InputError("nms_iou must lie in (0,1)");
  if (!(cfg.gain > 0.0)) throw InputError("detector gain must be positive");
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Raster padded_template(const DetectorConfig& cfg) {
  Raster out(cfg.window_w, cfg.window_h, 3);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = cfg.context[c];
  const int ox = (cfg.window_w - cfg.pattern.width()) / 2;
  const int oy = (cfg.window_h - cfg.pattern.height()) / 2;
  const bool alpha = cfg.pattern.channels() == 4;
  for (int y = 0; y < cfg.pattern.height(); ++y)
    for (int x = 0; x < cfg.pattern.width(); ++x) {
      const double a = alpha ? cfg.pattern.at(x, y, 3) : 1.0;
      for (int c = 0; c < 3; ++c)
        out.at(ox + x, oy + y, c) = a * cfg.pattern.at(x, y, c) + (1.0 - a) * cfg.context[c];
    }
  return out;
}

kernels::CorrelationTemplate correlation_template(const DetectorConfig& cfg) {
  validate(cfg);
  const Raster padded = padded_template(cfg);
  kernels::CorrelationTemplate t;
  t.width = cfg.window_w;
  t.height = cfg.window_h;
  const auto data = padded.data();
  const double mean = std::accumulate(data.begin(), data.end(), 0.0) / static_cast<double>(data.size());
  t.zero_mean.resize(data.size());
  double sq = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    t.zero_mean[i] = data[i] - mean;
    sq += t.zero_mean[i] * t.zero_mean[i];
  }
  t.norm = std::sqrt(sq);
  return t;
}

Box template_box(const DetectorConfig& cfg, int x0, int y0) {
  const int ox = (cfg.window_w - cfg.pattern.width()) / 2;
  const int oy = (cfg.window_h - cfg.pattern.height()) / 2;
  return {static_cast<double>(x0 + ox), static_cast<double>(y0 + oy), static_cast<double>(cfg.pattern.width()),
          static_cast<double>(cfg.pattern.height())};
}

std::vector<Detection> non_max_suppression(std::vector<Detection> dets, double iou_max) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].objectness > dets[b].objectness; });
  std::vector<Detection> kept;
  for (std::size_t i : order) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(),
                                        [&](const Detection& k) { return iou(k.box, dets[i].box) > iou_max; });
    if (!suppressed) kept.push_back(dets[i]);
  }
  return kept;
}

DetectResult synthetic_detect(const Raster& image, const DetectorConfig& cfg) {
  const auto t = correlation_template(cfg);
  return detect_with(image, cfg, [&](const Raster& img) { return kernels::ncc_parallel(img, t, cfg.stride); });
}

DetectResult synthetic_detect_serial(const Raster& image, const DetectorConfig& cfg) {
  const auto t = correlation_template(cfg);
  return detect_with(image, cfg, [&](const Raster& img) { return kernels::ncc_serial(img, t, cfg.stride); });
}

SyntheticDetector::SyntheticDetector(DetectorConfig cfg) : cfg_(std::move(cfg)), tmpl_(correlation_template(cfg_)) {}

std::vector<Detection> SyntheticDetector::detect(const Raster& image) {
  return detect_with(image, cfg_, [&](const Raster& img) { return kernels::ncc_parallel(img, tmpl_, cfg_.stride); })
      .detections;
}

double SyntheticDetector::max_objectness(const Raster& image) {
  // NMS never removes the strongest window, so the maximum over windows
  // above the keep level equals the maximum over the returned proposals.
  if (image.width() < cfg_.window_w || image.height() < cfg_.window_h) return 0.0;
  const kernels::ScoreMap map = kernels::ncc_parallel(image, tmpl_, cfg_.stride);
  double best = 0.0;
  for (double s : map.scores) {
    const double obj = sigmoid(cfg_.gain * (s - cfg_.threshold));
    if (obj > kKeepObjectness) best = std::max(best, obj);
  }
  return best;
}

nlohmann::json to_json(const Detection& d) {
  nlohmann::json j{{"x", d.box.x}, {"y", d.box.y}, {"w", d.box.w}, {"h", d.box.h}, {"objectness", d.objectness}};
  j["class_scores"] = d.class_scores ? nlohmann::json(*d.class_scores) : nlohmann::json(nullptr);
  return j;
}

Detection detection_from_json(const nlohmann::json& j) {
  Detection d;
  d.box = {j.at("x").get<double>(), j.at("y").get<double>(), j.at("w").get<double>(), j.at("h").get<double>()};
  d.objectness = j.at("objectness").get<double>();
  if (j.contains("class_scores") && !j.at("class_scores").is_null())
    d.class_scores = j.at("class_scores").get<std::vector<double>>();
  return d;
}

nlohmann::json to_json(const DetectorConfig& cfg) {
  return {{"template", cfg.template_name},
          {"template_size", {cfg.pattern.width(), cfg.pattern.height()}},
          {"window", {cfg.window_w, cfg.window_h}},
          {"stride", cfg.stride},
          {"gain", cfg.gain},
          {"threshold", cfg.threshold},
          {"nms_iou", cfg.nms_iou},
          {"context", cfg.context}};
}

DetectorConfig apply_overrides(DetectorConfig base, const nlohmann::json& j) {
  try {
    if (j.contains("window")) {
      base.window_w = j.at("window").at(0).get<int>();
      base.window_h = j.at("window").at(1).get<int>();
    }
    base.stride = j.value("stride", base.stride);
    base.gain = j.value("gain", base.gain);
    base.threshold = j.value("threshold", base.threshold);
    base.nms_iou = j.value("nms_iou", base.nms_iou);
    if (j.contains("context")) base.context = j.at("context").get<std::array<double, 3>>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("detector config: ") + e.what());
  }
  validate(base);
  return base;
}

}  // namespace xwalk
