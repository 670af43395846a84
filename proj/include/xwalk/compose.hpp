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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xwalk/box.hpp"
#include "xwalk/geometry.hpp"
#include "xwalk/perturbation.hpp"
#include "xwalk/raster.hpp"

namespace xwalk {

/// Alpha-masked object crop placed at an integer offset in the scene.
struct ForegroundCutout {
  Raster image;  // RGBA
  int x = 0;
  int y = 0;
};

/// A scene with its assets in memory.
struct Scene {
  std::string name;
  Raster background;
  std::vector<Polygon> regions;
  std::vector<Box> ground_truth;
  std::vector<ForegroundCutout> foregrounds;
};

struct InjectOptions {
  int rotation = 0;    // corner correspondence shift, in quarter turns
  double blend = 1.0;  // 1 overwrites the region, lower values mix with the road
};

struct RegionFailure {
  std::size_t index = 0;
  std::string message;
};

struct InjectResult {
  Raster image;
  std::vector<RegionFailure> failures;
};

/// Warps `art` into every region through its minimum enclosing quad. Pixels
/// outside all regions are returned untouched. A degenerate region is
/// recorded in `failures` and skipped.
InjectResult inject_art(const Raster& scene, std::span<const Polygon> regions, const Raster& art,
                        const InjectOptions& options = {});

/// inject_art (when `art` is given) followed by alpha-over of each cutout in
/// list order. Throws PlacementError for a cutout outside the frame.
Raster compose_scene(const Raster& background, std::span<const Polygon> regions, const Raster* art,
                     std::span<const ForegroundCutout> foregrounds, const InjectOptions& options = {},
                     std::vector<RegionFailure>* failures = nullptr);

inline Raster compose_scene(const Scene& scene, const Raster* art, const InjectOptions& options = {},
                            std::vector<RegionFailure>* failures = nullptr) {
  return compose_scene(scene.background, scene.regions, art, scene.foregrounds, options, failures);
}

/// clamp(art + delta, 0, 1) per sample.
Raster apply_perturbation(const Raster& art, const Raster& delta);
inline Raster apply_perturbation(const Raster& art, const Perturbation& delta) {
  return apply_perturbation(art, delta.values);
}

}  // namespace xwalk
