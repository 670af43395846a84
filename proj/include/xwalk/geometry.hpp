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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "xwalk/raster.hpp"

namespace xwalk {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

/// Closed polygon in pixel coordinates (origin top-left, y down).
struct Polygon {
  std::vector<Point> vertices;
};

/// Twice the signed shoelace area. Positive means counterclockwise in the
/// (x, y) frame, which appears clockwise on screen because y points down.
double signed_area2(std::span<const Point> pts);
double polygon_area(std::span<const Point> pts);

/// Convex quadrilateral with positive signed area. Corner 0 is paired with
/// the art image's top-left corner, then the winding continues through
/// top-right, bottom-right and bottom-left.
struct Quad {
  std::array<Point, 4> corners;
  double area() const { return polygon_area(corners); }
};

/// 3x3 projective map, row-major, normalized so that m[8] == 1 when possible.
struct Homography {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  double operator()(int row, int col) const { return m[row * 3 + col]; }
  double determinant() const;
  Homography inverse() const;
  static Homography identity() { return {}; }
};

/// Validates polygon invariants (>= 3 vertices, no repeated consecutive vertex).
void check_polygon(const Polygon& p);

/// Counterclockwise hull; collinear boundary points are dropped.
Polygon convex_hull(std::span<const Point> points);

/// Tight four-corner convex enclosure of the polygon.
///
/// The hull is reduced by repeatedly collapsing the edge whose removal adds
/// the least area: the edge's two endpoints are replaced by the intersection
/// of the neighbouring edges extended. A triangle hull gets its longest edge
/// split at the midpoint. If no edge can be collapsed the minimum-area
/// rotated rectangle is returned instead.
///
/// `rotation` cyclically shifts the corner correspondence by k x 90 degrees.
Quad min_enclosing_quad(const Polygon& p, int rotation = 0);

/// Minimum-area enclosing rectangle by rotating calipers over hull edges.
Quad min_area_rect(std::span<const Point> points);

/// Exact four-point direct linear transform with h33 = 1, solved by
/// partial-pivot Gaussian elimination.
Homography homography_from_correspondences(const std::array<Point, 4>& src, const std::array<Point, 4>& dst);

Point apply_homography(const Homography& h, Point pt);

bool point_in_polygon(std::span<const Point> poly, Point pt);

/// Inclusive containment test for a convex polygon with positive winding.
bool point_in_convex(std::span<const Point> poly, Point pt, double tol = 1e-9);

/// Pixels whose centres lie inside the polygon or on its boundary.
BinaryMask rasterize_polygon(const Polygon& p, int width, int height);

/// Destination-driven warp of `art` into the set pixels of `region` on a
/// width x height canvas. RGBA output; alpha is 1 exactly where the
/// inverse-mapped point falls inside the art and 0 elsewhere.
Raster warp_into_region(const Raster& art, const Homography& h, int width, int height, const BinaryMask& region);

/// Art-rectangle corners in pixel-centre coordinates, in Quad corner order.
std::array<Point, 4> art_corners(int width, int height);

/// Named crosswalk region as stored in polygon mask files.
struct Region {
  std::string name;
  Polygon polygon;
};

struct PolygonMaskFile {
  int width = 0;
  int height = 0;
  std::vector<Region> regions;
};

PolygonMaskFile load_polygon_masks(const std::filesystem::path& path);
void save_polygon_masks(const PolygonMaskFile& file, const std::filesystem::path& path);

}  // namespace xwalk
