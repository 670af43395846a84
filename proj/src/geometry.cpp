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

#include "xwalk/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "xwalk/errors.hpp"

namespace xwalk {

namespace {

constexpr double kPivotEps = 1e-12;

double cross(Point o, Point a, Point b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

double cross_vec(Point a, Point b) { return a.x * b.y - a.y * b.x; }

Point sub(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }

double dist2(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

double extent(std::span<const Point> pts) {
  double min_x = pts[0].x, max_x = pts[0].x, min_y = pts[0].y, max_y = pts[0].y;
  for (const auto& p : pts) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  return std::max({max_x - min_x, max_y - min_y, 1.0});
}

void check_no_collinear_triple(const std::array<Point, 4>& pts, const char* which) {
  const double scale = extent(pts);
  const double tol = 1e-12 * scale * scale;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      for (int k = j + 1; k < 4; ++k)
        if (std::abs(cross(pts[i], pts[j], pts[k])) <= tol)
          throw GeometryError(std::string("collinear triple in ") + which + " points");
}

// Solves a * x = b in place. Throws when a pivot falls under the threshold.
template <std::size_t N>
std::array<double, N> solve_gauss(std::array<std::array<double, N>, N> a, std::array<double, N> b) {
  for (std::size_t col = 0; col < N; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < N; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) < kPivotEps) throw GeometryError("singular linear system");
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (std::size_t r = col + 1; r < N; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < N; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::array<double, N> x{};
  for (std::size_t i = N; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < N; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

using Mat3 = std::array<double, 9>;

Mat3 mul(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[i * 3 + j] += a[i * 3 + k] * b[k * 3 + j];
  return r;
}

// Similarity taking the points to zero centroid and mean distance sqrt(2).
Mat3 normalizer(const std::array<Point, 4>& pts, bool inverse) {
  Point c{};
  for (const auto& p : pts) {
    c.x += p.x / 4.0;
    c.y += p.y / 4.0;
  }
  double mean = 0.0;
  for (const auto& p : pts) mean += std::sqrt(dist2(p, c)) / 4.0;
  const double s = std::sqrt(2.0) / mean;
  if (inverse) return {1 / s, 0, c.x, 0, 1 / s, c.y, 0, 0, 1};
  return {s, 0, -s * c.x, 0, s, -s * c.y, 0, 0, 1};
}

Point apply(const Mat3& m, Point p) {
  const double w = m[6] * p.x + m[7] * p.y + m[8];
  return {(m[0] * p.x + m[1] * p.y + m[2]) / w, (m[3] * p.x + m[4] * p.y + m[5]) / w};
}

Homography normalized(Mat3 m) {
  if (std::abs(m[8]) > kPivotEps) {
    const double s = m[8];
    for (double& v : m) v /= s;
    m[8] = 1.0;
  } else {
    double big = 0.0;
    for (double v : m) big = std::max(big, std::abs(v));
    for (double& v : m) v /= big;
  }
  return Homography{m};
}

bool on_segment(Point a, Point b, Point p, double tol) {
  const double len2 = dist2(a, b);
  if (len2 == 0.0) return dist2(a, p) <= tol * tol;
  const double t = std::clamp(((p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y)) / len2, 0.0, 1.0);
  const Point proj{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
  return dist2(proj, p) <= tol * tol;
}

// Corner 0 is the corner nearest the hull's topmost (then leftmost) vertex.
Quad orient_quad(std::array<Point, 4> corners, Point anchor, int rotation) {
  if (signed_area2(corners) < 0) std::reverse(corners.begin(), corners.end());
  int first = 0;
  for (int i = 1; i < 4; ++i)
    if (dist2(corners[i], anchor) < dist2(corners[first], anchor)) first = i;
  first = ((first + rotation) % 4 + 4) % 4;
  Quad q;
  for (int i = 0; i < 4; ++i) q.corners[i] = corners[(first + i) % 4];
  return q;
}

Point topmost(std::span<const Point> pts) {
  return *std::min_element(pts.begin(), pts.end(), [](Point a, Point b) {
    return a.y < b.y || (a.y == b.y && a.x < b.x);
  });
}

}  // namespace

double signed_area2(std::span<const Point> pts) {
  double s = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point& a = pts[i];
    const Point& b = pts[(i + 1) % pts.size()];
    s += a.x * b.y - b.x * a.y;
  }
  return s;
}

double polygon_area(std::span<const Point> pts) { return std::abs(signed_area2(pts)) / 2.0; }

double Homography::determinant() const {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

Homography Homography::inverse() const {
  const double det = determinant();
  if (std::abs(det) <= kPivotEps) throw GeometryError("homography is not invertible");
  Mat3 inv{
      (m[4] * m[8] - m[5] * m[7]) / det, (m[2] * m[7] - m[1] * m[8]) / det, (m[1] * m[5] - m[2] * m[4]) / det,
      (m[5] * m[6] - m[3] * m[8]) / det, (m[0] * m[8] - m[2] * m[6]) / det, (m[2] * m[3] - m[0] * m[5]) / det,
      (m[3] * m[7] - m[4] * m[6]) / det, (m[1] * m[6] - m[0] * m[7]) / det, (m[0] * m[4] - m[1] * m[3]) / det,
  };
  return normalized(inv);
}

void check_polygon(const Polygon& p) {
  const auto& v = p.vertices;
  if (v.size() < 3) throw GeometryError("polygon needs at least 3 vertices");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i].x) || !std::isfinite(v[i].y)) throw GeometryError("non-finite polygon vertex");
    if (v[i] == v[(i + 1) % v.size()]) throw GeometryError("repeated consecutive polygon vertex");
  }
}

Polygon convex_hull(std::span<const Point> points) {
  std::vector<Point> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](Point a, Point b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) throw GeometryError("convex hull needs 3 distinct points");

  // Andrew's monotone chain; `<= 0` drops collinear points.
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3 || polygon_area(hull) <= 1e-12 * extent(pts) * extent(pts))
    throw GeometryError("all points are collinear");
  return Polygon{hull};
}

Quad min_area_rect(std::span<const Point> points) {
  const Polygon hull = convex_hull(points);
  const auto& h = hull.vertices;
  double best_area = std::numeric_limits<double>::infinity();
  std::array<Point, 4> best{};
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Point e = sub(h[(i + 1) % h.size()], h[i]);
    const double len = std::hypot(e.x, e.y);
    const Point u{e.x / len, e.y / len};
    const Point n{-u.y, u.x};
    double lo_u = std::numeric_limits<double>::infinity(), hi_u = -lo_u, lo_n = lo_u, hi_n = -lo_u;
    for (const auto& p : h) {
      const Point d = sub(p, h[i]);
      const double pu = d.x * u.x + d.y * u.y;
      const double pn = d.x * n.x + d.y * n.y;
      lo_u = std::min(lo_u, pu);
      hi_u = std::max(hi_u, pu);
      lo_n = std::min(lo_n, pn);
      hi_n = std::max(hi_n, pn);
    }
    const double area = (hi_u - lo_u) * (hi_n - lo_n);
    if (area < best_area) {
      best_area = area;
      auto corner = [&](double a, double b) { return Point{h[i].x + a * u.x + b * n.x, h[i].y + a * u.y + b * n.y}; };
      best = {corner(lo_u, lo_n), corner(hi_u, lo_n), corner(hi_u, hi_n), corner(lo_u, hi_n)};
    }
  }
  return orient_quad(best, topmost(h), 0);
}

Quad min_enclosing_quad(const Polygon& p, int rotation) {
  check_polygon(p);
  const Polygon hull = convex_hull(p.vertices);
  std::vector<Point> v = hull.vertices;
  const Point anchor = topmost(v);

  if (v.size() == 3) {
    // Split the longest edge; the new corner is pushed outward by a tenth of
    // the opposite vertex's height so no three corners are collinear.
    std::size_t longest = 0;
    for (std::size_t i = 1; i < 3; ++i)
      if (dist2(v[i], v[(i + 1) % 3]) > dist2(v[longest], v[(longest + 1) % 3])) longest = i;
    const Point a = v[longest];
    const Point b = v[(longest + 1) % 3];
    const Point c = v[(longest + 2) % 3];
    const Point mid{(a.x + b.x) / 2, (a.y + b.y) / 2};
    const Point away{mid.x - c.x, mid.y - c.y};
    const Point split{mid.x + 0.1 * away.x, mid.y + 0.1 * away.y};
    v.insert(v.begin() + static_cast<std::ptrdiff_t>(longest) + 1, split);
  }

  while (v.size() > 4) {
    const std::size_t n = v.size();
    double best_added = std::numeric_limits<double>::infinity();
    std::size_t best_edge = n;
    Point best_point{};
    for (std::size_t i = 0; i < n; ++i) {
      const Point prev = v[(i + n - 1) % n];
      const Point a = v[i];
      const Point b = v[(i + 1) % n];
      const Point next = v[(i + 2) % n];
      const Point d1 = sub(a, prev);
      const Point d2 = sub(b, next);
      const double denom = cross_vec(d1, d2);
      if (std::abs(denom) <= 1e-12 * (std::abs(d1.x) + std::abs(d1.y)) * (std::abs(d2.x) + std::abs(d2.y))) continue;
      // a + t*d1 == b + u*d2
      const Point ab = sub(b, a);
      const double t = cross_vec(ab, d2) / denom;
      const double u = cross_vec(ab, d1) / denom;
      if (!(t > 0.0 && u > 0.0)) continue;
      const Point x{a.x + t * d1.x, a.y + t * d1.y};
      const double added = std::abs(cross(a, x, b)) / 2.0;
      if (added < best_added) {
        best_added = added;
        best_edge = i;
        best_point = x;
      }
    }
    if (best_edge == n) return min_area_rect(hull.vertices);
    v[best_edge] = best_point;
    v.erase(v.begin() + static_cast<std::ptrdiff_t>((best_edge + 1) % n));
  }

  std::array<Point, 4> corners{v[0], v[1], v[2], v[3]};
  Quad q = orient_quad(corners, anchor, rotation);
  return q;
}

Homography homography_from_correspondences(const std::array<Point, 4>& src, const std::array<Point, 4>& dst) {
  check_no_collinear_triple(src, "source");
  check_no_collinear_triple(dst, "destination");

  const Mat3 ts = normalizer(src, false);
  const Mat3 td_inv = normalizer(dst, true);
  const Mat3 td = normalizer(dst, false);

  std::array<std::array<double, 8>, 8> a{};
  std::array<double, 8> b{};
  for (int i = 0; i < 4; ++i) {
    const Point s = apply(ts, src[i]);
    const Point d = apply(td, dst[i]);
    a[2 * i] = {s.x, s.y, 1, 0, 0, 0, -s.x * d.x, -s.y * d.x};
    b[2 * i] = d.x;
    a[2 * i + 1] = {0, 0, 0, s.x, s.y, 1, -s.x * d.y, -s.y * d.y};
    b[2 * i + 1] = d.y;
  }
  const auto h = solve_gauss(a, b);
  const Mat3 hn{h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], 1.0};
  Homography out = normalized(mul(td_inv, mul(hn, ts)));
  if (std::abs(out.determinant()) <= kPivotEps) throw GeometryError("homography is not invertible");
  return out;
}

Point apply_homography(const Homography& h, Point pt) {
  const auto& m = h.m;
  const double w = m[6] * pt.x + m[7] * pt.y + m[8];
  if (std::abs(w) < 1e-12) throw GeometryError("point maps to infinity");
  return {(m[0] * pt.x + m[1] * pt.y + m[2]) / w, (m[3] * pt.x + m[4] * pt.y + m[5]) / w};
}

bool point_in_polygon(std::span<const Point> poly, Point pt) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i)
    if (on_segment(poly[i], poly[(i + 1) % n], pt, 1e-9)) return true;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = poly[i];
    const Point& b = poly[j];
    if ((a.y > pt.y) != (b.y > pt.y)) {
      const double x_cross = (b.x - a.x) * (pt.y - a.y) / (b.y - a.y) + a.x;
      if (pt.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

bool point_in_convex(std::span<const Point> poly, Point pt, double tol) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = poly[i];
    const Point b = poly[(i + 1) % n];
    const double len = std::sqrt(dist2(a, b));
    if (cross(a, b, pt) < -tol * std::max(len, 1.0)) return false;
  }
  return true;
}

BinaryMask rasterize_polygon(const Polygon& p, int width, int height) {
  BinaryMask m(width, height);
  if (p.vertices.empty()) return m;
  double min_x = p.vertices[0].x, max_x = min_x, min_y = p.vertices[0].y, max_y = min_y;
  for (const auto& v : p.vertices) {
    min_x = std::min(min_x, v.x);
    max_x = std::max(max_x, v.x);
    min_y = std::min(min_y, v.y);
    max_y = std::max(max_y, v.y);
  }
  const int x0 = std::max(0, static_cast<int>(std::ceil(min_x - 1e-9)));
  const int x1 = std::min(width - 1, static_cast<int>(std::floor(max_x + 1e-9)));
  const int y0 = std::max(0, static_cast<int>(std::ceil(min_y - 1e-9)));
  const int y1 = std::min(height - 1, static_cast<int>(std::floor(max_y + 1e-9)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (point_in_polygon(p.vertices, {static_cast<double>(x), static_cast<double>(y)})) m.set(x, y);
  return m;
}

std::array<Point, 4> art_corners(int width, int height) {
  const double w = width - 1;
  const double h = height - 1;
  return {Point{0, 0}, Point{w, 0}, Point{w, h}, Point{0, h}};
}

PolygonMaskFile load_polygon_masks(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    PolygonMaskFile f;
    f.width = j.at("image_size").at(0).get<int>();
    f.height = j.at("image_size").at(1).get<int>();
    for (const auto& r : j.at("regions")) {
      Region region;
      region.name = r.value("name", "");
      for (const auto& v : r.at("polygon")) region.polygon.vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
      f.regions.push_back(std::move(region));
    }
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_polygon_masks(const PolygonMaskFile& file, const std::filesystem::path& path) {
  nlohmann::json j;
  j["image_size"] = {file.width, file.height};
  j["regions"] = nlohmann::json::array();
  for (const auto& r : file.regions) {
    nlohmann::json poly = nlohmann::json::array();
    for (const auto& v : r.polygon.vertices) poly.push_back({v.x, v.y});
    j["regions"].push_back({{"name", r.name}, {"polygon", poly}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace xwalk
