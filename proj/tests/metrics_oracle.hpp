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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "xwalk/metrics.hpp"

// Recomputes every metric from scratch for each threshold. Boxes have integer
// corners so IoU is found by counting unit cells.
namespace xwalk::oracle {

struct Instance {
  std::vector<Detection> dets;
  std::vector<Box> gts;
};

inline Instance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nd(0, 6), ng(0, 4), pos(0, 8), size(1, 5), jitter(-1, 1), pick(0, 4);
  const double levels[] = {0.1, 0.3, 0.5, 0.7, 0.9};
  Instance in;
  const int n_gt = ng(rng);
  for (int i = 0; i < n_gt; ++i) in.gts.push_back({double(pos(rng)), double(pos(rng)), double(size(rng)), double(size(rng))});
  const int n_det = nd(rng);
  for (int i = 0; i < n_det; ++i) {
    Detection d;
    if (!in.gts.empty() && pick(rng) < 3) {
      const Box& g = in.gts[static_cast<std::size_t>(pos(rng)) % in.gts.size()];
      d.box = {g.x + jitter(rng), g.y + jitter(rng), std::max(1.0, g.w + jitter(rng)), std::max(1.0, g.h + jitter(rng))};
    } else {
      d.box = {double(pos(rng)), double(pos(rng)), double(size(rng)), double(size(rng))};
    }
    d.objectness = levels[pick(rng)];
    in.dets.push_back(d);
  }
  return in;
}

inline double cell_iou(const Box& a, const Box& b) {
  long inter = 0;
  long area_a = 0;
  long area_b = 0;
  for (int y = -4; y < 20; ++y)
    for (int x = -4; x < 20; ++x) {
      const bool in_a = x >= a.x && x < a.x + a.w && y >= a.y && y < a.y + a.h;
      const bool in_b = x >= b.x && x < b.x + b.w && y >= b.y && y < b.y + b.h;
      inter += in_a && in_b;
      area_a += in_a;
      area_b += in_b;
    }
  const long uni = area_a + area_b - inter;
  return uni == 0 ? 0.0 : double(inter) / double(uni);
}

struct OracleMatch {
  int tp = 0;
  int fp = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

// Detections with objectness >= t_incl (when inclusive) or > t (when not).
inline OracleMatch greedy(const Instance& in, double t, bool inclusive, double iou_min) {
  OracleMatch m;
  std::vector<bool> used(in.dets.size(), false);
  std::vector<bool> taken(in.gts.size(), false);
  for (;;) {
    int k = -1;
    for (std::size_t i = 0; i < in.dets.size(); ++i) {
      const double o = in.dets[i].objectness;
      if (used[i] || (inclusive ? o < t : o <= t)) continue;
      if (k < 0 || o > in.dets[k].objectness) k = static_cast<int>(i);
    }
    if (k < 0) break;
    used[k] = true;
    int best = -1;
    double best_v = -1;
    for (std::size_t j = 0; j < in.gts.size(); ++j) {
      if (taken[j]) continue;
      const double v = cell_iou(in.dets[k].box, in.gts[j]);
      if (v > iou_min && v > best_v) {
        best = static_cast<int>(j);
        best_v = v;
      }
    }
    if (best >= 0) {
      taken[best] = true;
      ++m.tp;
      m.pairs.emplace_back(k, best);
    } else {
      ++m.fp;
    }
  }
  return m;
}

inline std::vector<PrPoint> curve(const Instance& in, double iou_min) {
  std::set<double, std::greater<>> thresholds;
  for (const auto& d : in.dets) thresholds.insert(d.objectness);
  std::vector<PrPoint> pts;
  for (double t : thresholds) {
    const OracleMatch m = greedy(in, t, true, iou_min);
    const double r = in.gts.empty() ? 0.0 : double(m.tp) / double(in.gts.size());
    pts.push_back({r, double(m.tp) / double(m.tp + m.fp), t});
  }
  return pts;
}

// Midpoint rule on a grid whose cells never straddle a recall k / n_gt.
inline double dense_ap(const Instance& in, double iou_min) {
  const auto pts = curve(in, iou_min);
  if (in.gts.empty() || pts.empty()) return 0.0;
  const int cells = static_cast<int>(in.gts.size()) * 1000;
  double area = 0.0;
  for (int c = 0; c < cells; ++c) {
    const double r = (c + 0.5) / cells;
    double p = 0.0;
    for (const auto& q : pts)
      if (q.recall >= r) p = std::max(p, q.precision);
    area += p / cells;
  }
  return area;
}

inline F1Point best_f1(const Instance& in, double iou_min) {
  F1Point best;
  bool any = false;
  for (const auto& p : curve(in, iou_min)) {
    const double f1 = p.precision + p.recall > 0 ? 2 * p.precision * p.recall / (p.precision + p.recall) : 0.0;
    if (!any || f1 > best.f1) best = {f1, p.precision, p.recall, p.threshold};
    any = true;
  }
  return best;
}

inline double fdr(const Instance& in) {
  const OracleMatch m = greedy(in, 0.3, false, 0.5);
  return m.tp + m.fp == 0 ? 0.0 : double(m.fp) / double(m.tp + m.fp);
}

// Empty string when the library agrees with the oracle on `in`.
inline std::string compare(const Instance& in) {
  const MatchResult lib = match(in.dets, in.gts, 0.5, 0.3);
  const OracleMatch ora = greedy(in, 0.3, false, 0.5);
  if (lib.tp != ora.tp || lib.fp != ora.fp || lib.fn != int(in.gts.size()) - ora.tp) return "match counts";
  if (lib.matches.size() != ora.pairs.size()) return "match pairs";
  for (std::size_t i = 0; i < ora.pairs.size(); ++i)
    if (lib.matches[i].detection != ora.pairs[i].first || lib.matches[i].ground_truth != ora.pairs[i].second)
      return "match pairs";
  const PRCurve c = pr_curve(in.dets, in.gts, 0.5);
  const auto oc = curve(in, 0.5);
  if (c.points.size() != oc.size()) return "pr_curve length";
  for (std::size_t i = 0; i < oc.size(); ++i)
    if (c.points[i].recall != oc[i].recall || c.points[i].precision != oc[i].precision ||
        c.points[i].threshold != oc[i].threshold)
      return "pr_curve point";
  if (std::abs(ap50(c) - dense_ap(in, 0.5)) > 1e-6) return "ap50";
  const F1Point f = max_f1(in.dets, in.gts, 0.5);
  const F1Point of = best_f1(in, 0.5);
  if (f.f1 != of.f1 || f.precision != of.precision || f.recall != of.recall || f.threshold != of.threshold)
    return "max_f1";
  if (fdr(in) != xwalk::fdr(in.dets, in.gts)) return "fdr";
  return "";
}

}  // namespace xwalk::oracle
