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

#include "xwalk/manifest.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "xwalk/errors.hpp"
#include "xwalk/image_io.hpp"

namespace xwalk {

namespace fs = std::filesystem;
using nlohmann::json;

SceneManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    const json j = json::parse(in);
    SceneManifest m;
    m.background = j.at("background").get<std::string>();
    for (const auto& r : j.at("regions")) {
      Region region;
      region.name = r.value("name", "");
      for (const auto& v : r.at("polygon")) region.polygon.vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
      m.regions.push_back(std::move(region));
    }
    for (const auto& b : j.at("ground_truth"))
      m.ground_truth.push_back({b.at("x").get<double>(), b.at("y").get<double>(), b.at("w").get<double>(), b.at("h").get<double>()});
    for (const auto& f : j.value("foregrounds", json::array()))
      m.foregrounds.push_back({f.at("image").get<std::string>(), f.at("offset").at(0).get<int>(), f.at("offset").at(1).get<int>()});
    return m;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_manifest(const SceneManifest& m, const fs::path& path) {
  json j;
  j["background"] = m.background.generic_string();
  j["regions"] = json::array();
  for (const auto& r : m.regions) {
    json poly = json::array();
    for (const auto& v : r.polygon.vertices) poly.push_back({v.x, v.y});
    j["regions"].push_back({{"name", r.name}, {"polygon", poly}});
  }
  j["ground_truth"] = json::array();
  for (const auto& b : m.ground_truth) j["ground_truth"].push_back({{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}});
  j["foregrounds"] = json::array();
  for (const auto& f : m.foregrounds)
    j["foregrounds"].push_back({{"image", f.image.generic_string()}, {"offset", {f.x, f.y}}});
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void validate_scene(const Scene& s) {
  const double w = s.background.width();
  const double h = s.background.height();
  for (const auto& b : s.ground_truth) {
    if (!(b.w > 0 && b.h > 0)) throw InputError(s.name + ": ground-truth box with non-positive size");
    if (b.x < 0 || b.y < 0 || b.x + b.w > w || b.y + b.h > h) throw InputError(s.name + ": ground-truth box outside image");
  }
  for (const auto& p : s.regions) {
    check_polygon(p);
    for (const auto& v : p.vertices)
      if (v.x < -0.5 || v.y < -0.5 || v.x > w - 0.5 || v.y > h - 0.5)
        throw InputError(s.name + ": region vertex outside image");
  }
}

Scene load_scene(const fs::path& manifest_path) {
  const SceneManifest m = load_manifest(manifest_path);
  const fs::path base = manifest_path.parent_path();
  Scene s;
  s.name = manifest_path.stem().string();
  s.background = load_image(base / m.background);
  if (s.background.channels() == 4) {
    Raster rgb(s.background.width(), s.background.height(), 3);
    for (int y = 0; y < rgb.height(); ++y)
      for (int x = 0; x < rgb.width(); ++x)
        for (int c = 0; c < 3; ++c) rgb.at(x, y, c) = s.background.at(x, y, c);
    s.background = std::move(rgb);
  }
  for (const auto& r : m.regions) s.regions.push_back(r.polygon);
  s.ground_truth = m.ground_truth;
  for (const auto& f : m.foregrounds) s.foregrounds.push_back({load_image(base / f.image), f.x, f.y});
  validate_scene(s);
  return s;
}

std::vector<fs::path> list_manifests(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.starts_with("manifest_") && name.ends_with(".json")) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace xwalk
