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
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "xwalk/box.hpp"
#include "xwalk/kernels.hpp"
#include "xwalk/raster.hpp"

namespace xwalk {

/// One detector proposal. `objectness` is a probability (post-sigmoid).
struct Detection {
  Box box;
  double objectness = 0.0;
  std::optional<std::vector<double>> class_scores;
  bool operator==(const Detection&) const = default;
};

/// Positive finite size, objectness and class scores in [0,1].
bool is_valid(const Detection& d);

/// Anything that maps an image to proposals.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual std::vector<Detection> detect(const Raster& image) = 0;
  /// Highest objectness over the proposals; 0 when there are none.
  virtual double max_objectness(const Raster& image);
  /// True when detect() may run on several threads at once.
  virtual bool concurrent() const { return false; }
  virtual std::string name() const = 0;
};

/// Sliding-window correlation detector parameters.
struct DetectorConfig {
  std::string template_name = "pedestrian";
  Raster pattern;  // RGBA appearance template; alpha is the silhouette
  int window_w = 0;
  int window_h = 0;
  int stride = 1;
  double gain = 1.0;       // sigmoid slope s
  double threshold = 0.5;  // sigmoid centre tau
  double nms_iou = 0.5;
  std::array<double, 3> context{0.5, 0.5, 0.5};  // fill of the context ring and transparent template pixels
};

inline constexpr double kKeepObjectness = 0.01;

void validate(const DetectorConfig& cfg);

/// Template composited over the context colour and centred in the window.
Raster padded_template(const DetectorConfig& cfg);
kernels::CorrelationTemplate correlation_template(const DetectorConfig& cfg);

/// Box of the template sub-area for the window whose top-left is (x0, y0).
Box template_box(const DetectorConfig& cfg, int x0, int y0);

double sigmoid(double x);

struct DetectResult {
  std::vector<Detection> detections;
  bool undersized = false;  // image smaller than the window
};

/// Greedy non-maximum suppression; input order breaks objectness ties.
std::vector<Detection> non_max_suppression(std::vector<Detection> dets, double iou_max);

DetectResult synthetic_detect(const Raster& image, const DetectorConfig& cfg);

/// Same output as synthetic_detect, computed with the serial reference kernel.
DetectResult synthetic_detect_serial(const Raster& image, const DetectorConfig& cfg);

class SyntheticDetector : public Detector {
 public:
  explicit SyntheticDetector(DetectorConfig cfg);
  std::vector<Detection> detect(const Raster& image) override;
  double max_objectness(const Raster& image) override;
  bool concurrent() const override { return true; }
  std::string name() const override { return "synthetic"; }
  const DetectorConfig& config() const { return cfg_; }

 private:
  DetectorConfig cfg_;
  kernels::CorrelationTemplate tmpl_;
};

nlohmann::json to_json(const Detection& d);
Detection detection_from_json(const nlohmann::json& j);
/// Config summary for reports; the template is described, not embedded.
nlohmann::json to_json(const DetectorConfig& cfg);

/// Reads gain/threshold/stride/nms_iou/window overrides on top of `base`.
DetectorConfig apply_overrides(DetectorConfig base, const nlohmann::json& j);

}  // namespace xwalk
