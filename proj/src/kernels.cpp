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

#include "xwalk/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "xwalk/errors.hpp"

namespace xwalk::kernels {

namespace {

inline void warp_pixel(const Raster& art, const Homography& inv, int x, int y, Raster& out) {
  const auto& m = inv.m;
  const double w = m[6] * x + m[7] * y + m[8];
  if (std::abs(w) < 1e-12) return;
  const double sx = (m[0] * x + m[1] * y + m[2]) / w;
  const double sy = (m[3] * x + m[4] * y + m[5]) / w;
  const auto s = sample_bilinear(art, sx, sy);
  if (!s) return;
  for (int c = 0; c < 3; ++c) out.at(x, y, c) = s->v[art.channels() >= 3 ? c : 0];
  out.at(x, y, 3) = 1.0;
}

void check_warp_args(int width, int height, const BinaryMask& region) {
  if (region.width() != width || region.height() != height) throw ShapeError("region mask does not match target size");
}

// Summed-area tables of (v - 0.5) and its square over the RGB channels.
// Variance is shift invariant and the template is zero-mean, so the offset
// never reaches the score.
struct Integral {
  int w = 0;
  std::vector<double> sum;
  std::vector<double> sq;
  double box(const std::vector<double>& t, int x0, int y0, int x1, int y1) const {
    const auto at = [&](int x, int y) { return t[static_cast<std::size_t>(y) * (w + 1) + x]; };
    return at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0);
  }
};

Integral integral_rgb(const Raster& img) {
  Integral in;
  in.w = img.width();
  const std::size_t stride = img.width() + 1;
  in.sum.assign(stride * (img.height() + 1), 0.0);
  in.sq.assign(stride * (img.height() + 1), 0.0);
  for (int y = 0; y < img.height(); ++y) {
    double row_s = 0.0, row_q = 0.0;
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v = img.at(x, y, c) - 0.5;  // centred to limit cancellation
        row_s += v;
        row_q += v * v;
      }
      in.sum[(y + 1) * stride + x + 1] = in.sum[y * stride + x + 1] + row_s;
      in.sq[(y + 1) * stride + x + 1] = in.sq[y * stride + x + 1] + row_q;
    }
  }
  return in;
}

inline double finish_score(double cov, double sum, double sq, double n, double tnorm) {
  const double var = sq - sum * sum / n;
  if (var <= 1e-12 * n || tnorm <= 0.0) return 0.0;
  return cov / (std::sqrt(var) * tnorm);
}

inline double window_cov(const Raster& img, const CorrelationTemplate& t, int x0, int y0) {
  double cov = 0.0;
  const int ch = img.channels();
  for (int dy = 0; dy < t.height; ++dy) {
    const double* row = img.data().data() + img.index(x0, y0 + dy, 0);
    const double* z = t.zero_mean.data() + static_cast<std::size_t>(dy) * t.width * 3;
    for (int dx = 0; dx < t.width; ++dx) {
      cov += row[dx * ch] * z[dx * 3] + row[dx * ch + 1] * z[dx * 3 + 1] + row[dx * ch + 2] * z[dx * 3 + 2];
    }
  }
  return cov;
}

// Template split into its most frequent value (the flat context) plus a
// residual that is nonzero only on a span of each row:
//   cov = base * sum(window) + sum(residual * window).
struct SparseTemplate {
  double base = 0.0;
  std::vector<double> residual;
  std::vector<int> first;  // per row, in samples; first == last means empty
  std::vector<int> last;
};

SparseTemplate sparsify(const CorrelationTemplate& t) {
  SparseTemplate s;
  std::map<double, int> freq;
  for (double z : t.zero_mean) ++freq[z];
  int best = -1;
  for (const auto& [z, n] : freq)
    if (n > best) {
      best = n;
      s.base = z;
    }
  const int len = t.width * 3;
  s.residual.resize(t.zero_mean.size());
  for (int dy = 0; dy < t.height; ++dy) {
    int lo = len, hi = 0;
    for (int i = 0; i < len; ++i) {
      const std::size_t k = static_cast<std::size_t>(dy) * len + i;
      s.residual[k] = t.zero_mean[k] - s.base;
      if (s.residual[k] != 0.0) {
        lo = std::min(lo, i);
        hi = i + 1;
      }
    }
    s.first.push_back(std::min(lo, hi));
    s.last.push_back(hi);
  }
  return s;
}

inline double sparse_cov(const Raster& img, const SparseTemplate& s, int len, int height, int x0, int y0,
                         double window_sum) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  for (int dy = 0; dy < height; ++dy) {
    const double* row = img.data().data() + img.index(x0, y0 + dy, 0);
    const double* r = s.residual.data() + static_cast<std::size_t>(dy) * len;
    int i = s.first[dy];
    for (; i + 4 <= s.last[dy]; i += 4)
      for (int k = 0; k < 4; ++k) acc[k] += row[i + k] * r[i + k];
    for (; i < s.last[dy]; ++i) acc[0] += row[i] * r[i];
  }
  return s.base * window_sum + ((acc[0] + acc[1]) + (acc[2] + acc[3]));
}

ScoreMap empty_map(const Raster& image, const CorrelationTemplate& t, int stride) {
  if (stride < 1) throw ShapeError("stride must be >= 1");
  if (image.channels() < 3) throw ShapeError("correlation needs an RGB image");
  ScoreMap map;
  map.stride = stride;
  if (image.width() < t.width || image.height() < t.height) return map;
  map.cols = (image.width() - t.width) / stride + 1;
  map.rows = (image.height() - t.height) / stride + 1;
  map.scores.assign(static_cast<std::size_t>(map.cols) * map.rows, 0.0);
  return map;
}

inline void over_row(Raster& dst, const Raster& src, int ox, int oy, int y, double opacity) {
  const bool has_alpha = src.channels() == 4;
  for (int x = 0; x < src.width(); ++x) {
    const double a = (has_alpha ? src.at(x, y, 3) : 1.0) * opacity;
    if (a <= 0.0) continue;
    for (int c = 0; c < 3; ++c) {
      double& d = dst.at(ox + x, oy + y, c);
      const double s = src.at(x, y, c);
      d = a >= 1.0 ? s : a * s + (1.0 - a) * d;
    }
  }
}

void check_over(const Raster& dst, const Raster& src, int ox, int oy) {
  if (ox < 0 || oy < 0 || ox + src.width() > dst.width() || oy + src.height() > dst.height())
    throw ShapeError("overlay does not fit inside the destination");
  if (src.channels() < 3 || dst.channels() < 3) throw ShapeError("overlay needs RGB(A) rasters");
}

}  // namespace

Raster warp_serial(const Raster& art, const Homography& h, int width, int height, const BinaryMask& region) {
  check_warp_args(width, height, region);
  const Homography inv = h.inverse();
  Raster out(width, height, 4);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      if (region.get(x, y)) warp_pixel(art, inv, x, y, out);
  return out;
}

Raster warp_parallel(const Raster& art, const Homography& h, int width, int height, const BinaryMask& region) {
  check_warp_args(width, height, region);
  const Homography inv = h.inverse();
  Raster out(width, height, 4);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      if (region.get(x, y)) warp_pixel(art, inv, x, y, out);
  return out;
}

ScoreMap ncc_serial(const Raster& image, const CorrelationTemplate& t, int stride) {
  ScoreMap map = empty_map(image, t, stride);
  const double n = static_cast<double>(t.width) * t.height * 3;
  for (int row = 0; row < map.rows; ++row) {
    for (int col = 0; col < map.cols; ++col) {
      const int x0 = col * stride;
      const int y0 = row * stride;
      double sum = 0.0, sq = 0.0;
      for (int dy = 0; dy < t.height; ++dy)
        for (int dx = 0; dx < t.width; ++dx)
          for (int c = 0; c < 3; ++c) {
            const double v = image.at(x0 + dx, y0 + dy, c);
            sum += v;
            sq += v * v;
          }
      map.scores[static_cast<std::size_t>(row) * map.cols + col] =
          finish_score(window_cov(image, t, x0, y0), sum, sq, n, t.norm);
    }
  }
  return map;
}

ScoreMap ncc_parallel(const Raster& image, const CorrelationTemplate& t, int stride) {
  ScoreMap map = empty_map(image, t, stride);
  if (map.scores.empty()) return map;
  const Integral in = integral_rgb(image);
  const double n = static_cast<double>(t.width) * t.height * 3;
  const SparseTemplate sparse = sparsify(t);
  const bool rgb = image.channels() == 3;
#pragma omp parallel for schedule(static)
  for (int row = 0; row < map.rows; ++row) {
    for (int col = 0; col < map.cols; ++col) {
      const int x0 = col * stride;
      const int y0 = row * stride;
      const double sum = in.box(in.sum, x0, y0, x0 + t.width, y0 + t.height);
      const double sq = in.box(in.sq, x0, y0, x0 + t.width, y0 + t.height);
      const double cov =
          rgb ? sparse_cov(image, sparse, t.width * 3, t.height, x0, y0, sum + 0.5 * n) : window_cov(image, t, x0, y0);
      map.scores[static_cast<std::size_t>(row) * map.cols + col] = finish_score(cov, sum, sq, n, t.norm);
    }
  }
  return map;
}

void over_serial(Raster& dst, const Raster& src, int offset_x, int offset_y, double opacity) {
  check_over(dst, src, offset_x, offset_y);
  for (int y = 0; y < src.height(); ++y) over_row(dst, src, offset_x, offset_y, y, opacity);
}

void over_parallel(Raster& dst, const Raster& src, int offset_x, int offset_y, double opacity) {
  check_over(dst, src, offset_x, offset_y);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < src.height(); ++y) over_row(dst, src, offset_x, offset_y, y, opacity);
}

}  // namespace xwalk::kernels

namespace xwalk {

Raster warp_into_region(const Raster& art, const Homography& h, int width, int height, const BinaryMask& region) {
  return kernels::warp_parallel(art, h, width, height, region);
}

}  // namespace xwalk
