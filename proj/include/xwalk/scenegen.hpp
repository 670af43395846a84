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
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "xwalk/compose.hpp"
#include "xwalk/detect.hpp"
#include "xwalk/manifest.hpp"

namespace xwalk {

struct SceneGenConfig {
  int width = 160;
  int height = 120;
  int n_crosswalks = 2;           // 1..3
  int min_pedestrians = 1;
  int max_pedestrians = 3;
  std::array<int, 2> min_pedestrian_size{0, 0};  // 0 means the template size
  std::array<int, 2> max_pedestrian_size{0, 0};
  double perspective_skew = 0.25;  // [0, 0.5]
  double color_jitter = 0.10;      // per-channel multiplicative, <= 0.10
  std::uint64_t seed = 7;
};

void validate(const SceneGenConfig& cfg);
SceneGenConfig scenegen_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SceneGenConfig& cfg);

struct Placement {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  std::size_t crosswalk = 0;
  bool operator==(const Placement&) const = default;
};

struct GeneratedScene {
  Scene scene;
  std::vector<Placement> placements;
};

/// Deterministic in (cfg.seed, index). Assets are quantized to 1/255 so the
/// in-memory scene equals what a PNG round trip reproduces.
GeneratedScene generate_scene(const SceneGenConfig& cfg, int index);

/// Writes manifest_NNN.json plus backgrounds/, cutouts/ and masks/ under
/// `out_dir` and returns the manifests in index order.
std::vector<SceneManifest> generate_dataset(const SceneGenConfig& cfg, int n, const std::filesystem::path& out_dir);

/// RGBA appearance template the generator renders pedestrians from.
Raster pedestrian_template();

/// Synthetic detector configuration matched to pedestrian_template().
DetectorConfig tuned_detector_config();

/// Road surface colour used by the generator.
inline constexpr std::array<double, 3> kRoadColor{0.40, 0.40, 0.40};

/// Art patterns for experiments; art is a w x h RGB raster.
Raster zebra_art(int width, int height);  // white stripes on road grey (the clean crosswalk)
Raster solid_art(int width, int height, std::array<double, 3> color);
Raster striped_color_art(int width, int height, std::array<double, 3> color);  // white stripes on a colour
Raster checker_art(int width, int height, int cell, std::array<double, 3> a, std::array<double, 3> b);

inline constexpr int kArtWidth = 64;
inline constexpr int kArtHeight = 16;

}  // namespace xwalk
