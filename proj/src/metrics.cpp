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

#include "xwalk/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "xwalk/errors.hpp"

namespace xwalk {

namespace {

// Detection indices sorted by descending objectness, stable on index.
std::vector<std::size_t> confidence_order(std::span<const Detection> dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].objectness > dets[b].objectness; });
  return order;
}

// Greedy pass over all detections. Because each detection only sees the
// choices of higher-confidence ones, the flags for any confidence cut are a
// prefix of this pass.
struct GreedyPass {
  std::vector<std::size_t> order;
  std::vector<int> matched_gt;  // per position in `order`, -1 when FP
  std::vector<double> match_iou;
};

GreedyPass greedy(std::span<const Detection> dets, std::span<const Box> gts, double iou_min) {
  GreedyPass g;
  g.order = confidence_order(dets);
  std::vector<bool> taken(gts.size(), false);
  for (std::size_t k : g.order) {
    int best = -1;
    double best_iou = 0.0;
    for (std::size_t j = 0; j < gts.size(); ++j) {
      if (taken[j]) continue;
      const double v = iou(dets[k].box, gts[j]);
      if (v > iou_min && (best < 0 || v > best_iou)) {
        best = static_cast<int>(j);
        best_iou = v;
      }
    }
    if (best >= 0) taken[best] = true;
    g.matched_gt.push_back(best);
    g.match_iou.push_back(best_iou);
  }
  return g;
}

struct Pooled {
  double objectness;
  bool tp;
};

std::vector<Pooled> pool(std::span<const std::vector<Detection>> dets, std::span<const std::vector<Box>> gts,
                         double iou_min, std::size_t* total_gt) {
  if (dets.size() != gts.size()) throw InputError("detections and ground truths cover different image counts");
  std::vector<Pooled> all;
  *total_gt = 0;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    *total_gt += gts[i].size();
    const GreedyPass g = greedy(dets[i], gts[i], iou_min);
    for (std::size_t p = 0; p < g.order.size(); ++p) all.push_back({dets[i][g.order[p]].objectness, g.matched_gt[p] >= 0});
  }
  std::stable_sort(all.begin(), all.end(), [](const Pooled& a, const Pooled& b) { return a.objectness > b.objectness; });
  return all;
}

PRCurve curve_from_pooled(const std::vector<Pooled>& all, std::size_t total_gt) {
  PRCurve curve;
  int tp = 0;
  int fp = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    (all[i].tp ? tp : fp) += 1;
    const bool last_at_threshold = i + 1 == all.size() || all[i + 1].objectness != all[i].objectness;
    if (!last_at_threshold) continue;
    const double recall = total_gt == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(total_gt);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    curve.points.push_back({recall, precision, all[i].objectness});
  }
  return curve;
}

F1Point best_f1(const PRCurve& curve) {
  F1Point best;
  bool any = false;
  for (const auto& p : curve.points) {
    const double f1 = p.precision + p.recall > 0 ? 2 * p.precision * p.recall / (p.precision + p.recall) : 0.0;
    // Points arrive by descending threshold, so strict > keeps the higher one on ties.
    if (!any || f1 > best.f1) {
      best = {f1, p.precision, p.recall, p.threshold};
      any = true;
    }
  }
  return best;
}

}  // namespace

MatchResult match(std::span<const Detection> dets, std::span<const Box> gts, double iou_min, double conf_min) {
  std::vector<Detection> kept;
  std::vector<std::size_t> index;
  for (std::size_t i = 0; i < dets.size(); ++i)
    if (dets[i].objectness > conf_min) {
      kept.push_back(dets[i]);
      index.push_back(i);
    }
  const GreedyPass g = greedy(kept, gts, iou_min);
  MatchResult r;
  for (std::size_t p = 0; p < g.order.size(); ++p) {
    if (g.matched_gt[p] >= 0) {
      r.matches.push_back({index[g.order[p]], static_cast<std::size_t>(g.matched_gt[p]), g.match_iou[p]});
      ++r.tp;
    } else {
      ++r.fp;
    }
  }
  r.fn = static_cast<int>(gts.size()) - r.tp;
  return r;
}

std::string to_string(ApScheme s) { return s == ApScheme::kAllPoints ? "all-points" : "101-point"; }

ApScheme ap_scheme_from_string(const std::string& s) {
  if (s == "all-points") return ApScheme::kAllPoints;
  if (s == "101-point") return ApScheme::k101Point;
  throw InputError("unknown AP interpolation scheme '" + s + "'");
}

PRCurve pr_curve(std::span<const Detection> dets, std::span<const Box> gts, double iou_min) {
  const std::vector<std::vector<Detection>> d{std::vector<Detection>(dets.begin(), dets.end())};
  const std::vector<std::vector<Box>> g{std::vector<Box>(gts.begin(), gts.end())};
  return pooled_pr_curve(d, g, iou_min);
}

PRCurve pooled_pr_curve(std::span<const std::vector<Detection>> detections,
                        std::span<const std::vector<Box>> ground_truths, double iou_min) {
  std::size_t total_gt = 0;
  const auto all = pool(detections, ground_truths, iou_min, &total_gt);
  return curve_from_pooled(all, total_gt);
}

double average_precision(const PRCurve& curve, ApScheme scheme) {
  const auto& pts = curve.points;
  if (pts.empty()) return 0.0;
  std::vector<double> envelope(pts.size());
  double running = 0.0;
  for (std::size_t i = pts.size(); i-- > 0;) {
    running = std::max(running, pts[i].precision);
    envelope[i] = running;
  }
  if (scheme == ApScheme::kAllPoints) {
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      ap += (pts[i].recall - prev_recall) * envelope[i];
      prev_recall = pts[i].recall;
    }
    return ap;
  }
  double sum = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double r = k / 100.0;
    // First point reaching recall r carries the envelope value for it.
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (pts[i].recall >= r) {
        sum += envelope[i];
        break;
      }
  }
  return sum / 101.0;
}

F1Point max_f1(std::span<const Detection> dets, std::span<const Box> gts, double iou_min) {
  return best_f1(pr_curve(dets, gts, iou_min));
}

double fdr(std::span<const Detection> dets, std::span<const Box> gts) {
  const MatchResult m = match(dets, gts, kIouMatch, kConfidenceFloor);
  return m.tp + m.fp == 0 ? 0.0 : static_cast<double>(m.fp) / static_cast<double>(m.fp + m.tp);
}

MetricsReport evaluate_dataset(std::span<const std::vector<Detection>> detections,
                               std::span<const std::vector<Box>> ground_truths, ApScheme scheme) {
  if (detections.size() != ground_truths.size())
    throw InputError("detections and ground truths cover different image counts");
  MetricsReport r;
  r.scheme = scheme;
  r.images = detections.size();
  for (const auto& d : detections) r.detections += d.size();
  for (const auto& g : ground_truths) r.ground_truths += g.size();
  if (r.images == 0) {
    r.empty_warning = true;
    return r;
  }
  const PRCurve curve = pooled_pr_curve(detections, ground_truths, kIouMatch);
  const F1Point f = best_f1(curve);
  r.max_f1 = f.f1;
  r.precision_at_max_f1 = f.precision;
  r.recall_at_max_f1 = f.recall;
  r.threshold_at_max_f1 = f.threshold;
  r.ap50 = average_precision(curve, scheme);
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const MatchResult m = match(detections[i], ground_truths[i], kIouMatch, kConfidenceFloor);
    r.counts.tp += m.tp;
    r.counts.fp += m.fp;
    r.counts.fn += m.fn;
  }
  const int passed = r.counts.tp + r.counts.fp;
  r.fdr = passed == 0 ? 0.0 : static_cast<double>(r.counts.fp) / passed;
  return r;
}

nlohmann::json to_json(const MetricsReport& r) {
  return {{"max_f1", r.max_f1},
          {"precision_at_max_f1", r.precision_at_max_f1},
          {"recall_at_max_f1", r.recall_at_max_f1},
          {"threshold_at_max_f1", r.threshold_at_max_f1},
          {"ap50", r.ap50},
          {"fdr", r.fdr},
          {"counts", {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"fn", r.counts.fn},
                      {"iou_min", kIouMatch}, {"conf_min", kConfidenceFloor}}},
          {"images", r.images},
          {"detections", r.detections},
          {"ground_truths", r.ground_truths},
          {"ap_interpolation", to_string(r.scheme)},
          {"empty_dataset_warning", r.empty_warning}};
}

nlohmann::json to_json(std::span<const ImageRecord> records) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& rec : records) {
    nlohmann::json dets = nlohmann::json::array();
    for (const auto& d : rec.detections) dets.push_back(to_json(d));
    nlohmann::json gts = nlohmann::json::array();
    for (const auto& b : rec.ground_truth) gts.push_back({{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}});
    out.push_back({{"image", rec.image}, {"detections", dets}, {"ground_truth", gts}});
  }
  return out;
}

std::vector<ImageRecord> records_from_json(const nlohmann::json& j) {
  std::vector<ImageRecord> out;
  try {
    for (const auto& rec : j) {
      ImageRecord r;
      r.image = rec.at("image").get<std::string>();
      for (const auto& d : rec.at("detections")) r.detections.push_back(detection_from_json(d));
      for (const auto& b : rec.at("ground_truth"))
        r.ground_truth.push_back({b.at("x").get<double>(), b.at("y").get<double>(), b.at("w").get<double>(), b.at("h").get<double>()});
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("detection records: ") + e.what());
  }
  return out;
}

std::string table_header() {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-24s %8s %9s %8s %8s %8s", "pattern", "max-F1", "precision", "recall", "AP@0.5",
                "FDR");
  return buf;
}

std::string table_row(const std::string& label, const MetricsReport& r) {
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-24s %8.3f %9.3f %8.3f %8.3f %8.3f", label.c_str(), r.max_f1,
                r.precision_at_max_f1, r.recall_at_max_f1, r.ap50, r.fdr);
  return buf;
}

}  // namespace xwalk
