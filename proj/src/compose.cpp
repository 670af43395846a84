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

#include "xwalk/compose.hpp"

#include <algorithm>

#include "xwalk/errors.hpp"
#include "xwalk/kernels.hpp"

namespace xwalk {

InjectResult inject_art(const Raster& scene, std::span<const Polygon> regions, const Raster& art,
                        const InjectOptions& options) {
  if (scene.channels() < 3) throw ShapeError("scene must be RGB");
  if (art.width() < 2 || art.height() < 2) throw ShapeError("art must be at least 2x2 pixels");
  InjectResult result{scene, {}};
  Raster& out = result.image;
  const double blend = std::clamp(options.blend, 0.0, 1.0);
  for (std::size_t i = 0; i < regions.size(); ++i) {
    try {
      const Quad quad = min_enclosing_quad(regions[i], options.rotation);
      const Homography h = homography_from_correspondences(art_corners(art.width(), art.height()), quad.corners);
      const BinaryMask mask = rasterize_polygon(regions[i], out.width(), out.height());
      if (!mask.any()) throw GeometryError("region covers no pixel centre");
      const Raster warped = warp_into_region(art, h, out.width(), out.height(), mask);
      kernels::over_parallel(out, warped, 0, 0, blend);
    } catch (const Error& e) {
      result.failures.push_back({i, e.what()});
    }
  }
  return result;
}

Raster compose_scene(const Raster& background, std::span<const Polygon> regions, const Raster* art,
                     std::span<const ForegroundCutout> foregrounds, const InjectOptions& options,
                     std::vector<RegionFailure>* failures) {
  for (std::size_t i = 0; i < foregrounds.size(); ++i) {
    const auto& f = foregrounds[i];
    if (f.x < 0 || f.y < 0 || f.x + f.image.width() > background.width() ||
        f.y + f.image.height() > background.height())
      throw PlacementError(i, "cutout extends outside the scene");
    if (f.image.channels() < 3) throw PlacementError(i, "cutout must be RGB(A)");
  }
  Raster out = background;
  if (art != nullptr) {
    InjectResult injected = inject_art(background, regions, *art, options);
    out = std::move(injected.image);
    if (failures != nullptr) *failures = std::move(injected.failures);
  }
  for (const auto& f : foregrounds) kernels::over_parallel(out, f.image, f.x, f.y);
  return out;
}

Raster apply_perturbation(const Raster& art, const Raster& delta) {
  if (!art.same_shape(delta)) throw ShapeError("perturbation shape does not match the art");
  Raster out = art;
  auto o = out.data();
  auto d = delta.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = std::clamp(o[i] + d[i], 0.0, 1.0);
  return out;
}

}  // namespace xwalk
