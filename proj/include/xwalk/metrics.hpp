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

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "xwalk/box.hpp"
#include "xwalk/detect.hpp"

namespace xwalk {

/// Operating point used for FDR and the report's count block.
inline constexpr double kIouMatch = 0.5;
inline constexpr double kConfidenceFloor = 0.3;

struct Match {
  std::size_t detection = 0;
  std::size_t ground_truth = 0;
  double iou = 0.0;
};

struct MatchResult {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  std::vector<Match> matches;
};

/// Greedy matching. Only detections with objectness > conf_min take part,
/// in descending objectness (ties: lower index first); each takes the
/// unmatched ground truth with the highest IoU (ties: lower index) provided
/// IoU > iou_min.
MatchResult match(std::span<const Detection> dets, std::span<const Box> gts, double iou_min, double conf_min);

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
  double threshold = 0.0;
};

/// Points ordered by descending threshold, one per distinct objectness value.
struct PRCurve {
  std::vector<PrPoint> points;
};

enum class ApScheme { kAllPoints, k101Point };

std::string to_string(ApScheme s);
ApScheme ap_scheme_from_string(const std::string& s);

PRCurve pr_curve(std::span<const Detection> dets, std::span<const Box> gts, double iou_min);

/// Area under the monotone precision envelope.
double average_precision(const PRCurve& curve, ApScheme scheme = ApScheme::kAllPoints);
inline double ap50(const PRCurve& curve) { return average_precision(curve); }

struct F1Point {
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double threshold = 1.0;
};

/// Best F1 over every distinct objectness threshold; ties go to the higher
/// threshold. No detections gives (0, 0, 0, 1).
F1Point max_f1(std::span<const Detection> dets, std::span<const Box> gts, double iou_min);

/// FP / (FP + TP) at IoU > 0.5 and objectness > 0.3; 0 when nothing passes.
double fdr(std::span<const Detection> dets, std::span<const Box> gts);

struct MetricsReport {
  double max_f1 = 0.0;
  double precision_at_max_f1 = 0.0;
  double recall_at_max_f1 = 0.0;
  double threshold_at_max_f1 = 1.0;
  double ap50 = 0.0;
  double fdr = 0.0;
  MatchResult counts;  // pooled at the FDR operating point; matches omitted
  std::size_t images = 0;
  std::size_t detections = 0;
  std::size_t ground_truths = 0;
  ApScheme scheme = ApScheme::kAllPoints;
  bool empty_warning = false;
};

/// Pools detections across images (matching stays within each image).
MetricsReport evaluate_dataset(std::span<const std::vector<Detection>> detections,
                               std::span<const std::vector<Box>> ground_truths,
                               ApScheme scheme = ApScheme::kAllPoints);

/// Pooled PR curve and F1 sweep, exposed for reporting and tests.
PRCurve pooled_pr_curve(std::span<const std::vector<Detection>> detections,
                        std::span<const std::vector<Box>> ground_truths, double iou_min);

nlohmann::json to_json(const MetricsReport& r);

/// Detections/ground-truth interchange: a JSON list of per-image records.
struct ImageRecord {
  std::string image;
  std::vector<Detection> detections;
  std::vector<Box> ground_truth;
};

nlohmann::json to_json(std::span<const ImageRecord> records);
std::vector<ImageRecord> records_from_json(const nlohmann::json& j);

/// Aligned single-row text form: max-F1, precision, recall, AP@0.5, FDR.
std::string table_header();
std::string table_row(const std::string& label, const MetricsReport& r);

}  // namespace xwalk
