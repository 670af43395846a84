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
#include <string>
#include <vector>

#include "xwalk/box.hpp"
#include "xwalk/compose.hpp"
#include "xwalk/geometry.hpp"

namespace xwalk {

struct ForegroundRef {
  std::filesystem::path image;
  int x = 0;
  int y = 0;
};

/// On-disk description of one scene. Paths are stored relative to the
/// manifest's directory.
struct SceneManifest {
  std::filesystem::path background;
  std::vector<Region> regions;
  std::vector<Box> ground_truth;
  std::vector<ForegroundRef> foregrounds;
};

SceneManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const SceneManifest& m, const std::filesystem::path& path);

/// Loads every referenced asset and validates bounds.
Scene load_scene(const std::filesystem::path& manifest_path);

/// Checks ground-truth boxes and region vertices against the image bounds.
void validate_scene(const Scene& scene);

/// manifest_*.json files in `dir`, sorted by name.
std::vector<std::filesystem::path> list_manifests(const std::filesystem::path& dir);

}  // namespace xwalk
