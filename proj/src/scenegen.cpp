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

#include "xwalk/scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "xwalk/errors.hpp"
#include "xwalk/image_io.hpp"

namespace xwalk {

namespace fs = std::filesystem;

namespace {

constexpr int kPlacementAttempts = 1000;
constexpr std::array<double, 3> kStripeWhite{0.85, 0.85, 0.85};

// Rows of the 7x15 pedestrian seen by an elevated camera.
// H head, S shirt, P trousers, '.' transparent.
constexpr std::array<const char*, 15> kPedestrianRows{
    "..HHH..", ".HHHHH.", "..HHH..", ".SSSSS.", "SSSSSSS", "SSSSSSS", "SSSSSSS", "S.SSS.S",
    ".SSSSS.", ".PP.PP.", ".PP.PP.", ".PP.PP.", ".PP.PP.", ".PP.PP.", "PP...PP"};

std::mt19937_64 scene_rng(std::uint64_t seed, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), 0x5eedu};
  return std::mt19937_64(seq);
}

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

Raster road_background(int w, int h, std::mt19937_64& rng) {
  Raster bg(w, h, 3);
  // A few low-frequency waves plus fine grain.
  struct Wave {
    double fx, fy, phase, amp;
  };
  std::vector<Wave> waves;
  for (int i = 0; i < 4; ++i)
    waves.push_back({uniform(rng, 0.01, 0.06), uniform(rng, 0.01, 0.06), uniform(rng, 0.0, 2 * std::numbers::pi),
                     uniform(rng, 0.004, 0.01)});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double base = kRoadColor[0];
      for (const auto& wv : waves) base += wv.amp * std::sin(wv.fx * x * 2 * std::numbers::pi + wv.fy * y * 2 * std::numbers::pi + wv.phase);
      const double grain = uniform(rng, -0.012, 0.012);
      for (int c = 0; c < 3; ++c) bg.at(x, y, c) = std::clamp(base + grain + uniform(rng, -0.003, 0.003), 0.0, 1.0);
    }
  return bg;
}

Polygon crosswalk_polygon(const SceneGenConfig& cfg, int slot, std::mt19937_64& rng) {
  const double margin = 4.0;
  const double slot_h = (cfg.height - 2 * margin) / cfg.n_crosswalks;
  const double band_h = slot_h * uniform(rng, 0.62, 0.8);
  const double y0 = margin + slot * slot_h + uniform(rng, 0.0, slot_h - band_h);
  const double y1 = y0 + band_h;
  const double xl = uniform(rng, 3.0, 0.12 * cfg.width);
  const double xr = uniform(rng, 0.88 * cfg.width, cfg.width - 4.0);
  const double inset = cfg.perspective_skew * (xr - xl) * 0.5 * uniform(rng, 0.3, 0.6);
  const double shear = uniform(rng, -cfg.perspective_skew, cfg.perspective_skew) * band_h;
  const double top_l = std::clamp(xl + inset + shear, 0.0, cfg.width - 1.0);
  const double top_r = std::clamp(xr - inset + shear, 0.0, cfg.width - 1.0);
  return Polygon{{{top_l, y0}, {top_r, y0}, {xr, y1}, {xl, y1}}};
}

Raster resize_bilinear(const Raster& src, int w, int h) {
  if (w == src.width() && h == src.height()) return src;
  Raster out(w, h, src.channels());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double sx = w == 1 ? 0.0 : x * (src.width() - 1.0) / (w - 1.0);
      const double sy = h == 1 ? 0.0 : y * (src.height() - 1.0) / (h - 1.0);
      const auto s = sample_bilinear(src, sx, sy);
      for (int c = 0; c < src.channels(); ++c) out.at(x, y, c) = s->v[c];
    }
  return out;
}

Raster render_pedestrian(const Raster& tmpl, int w, int h, std::array<double, 3> jitter) {
  Raster cut = resize_bilinear(tmpl, w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double a = cut.at(x, y, 3) >= 0.5 ? 1.0 : 0.0;
      cut.at(x, y, 3) = a;
      for (int c = 0; c < 3; ++c) cut.at(x, y, c) = a > 0 ? std::clamp(cut.at(x, y, c) * jitter[c], 0.0, 1.0) : 0.0;
    }
  return quantize8(cut);
}

bool windows_disjoint(const Placement& a, const Placement& b, int ww, int wh) {
  return std::abs(a.x - b.x) >= ww || std::abs(a.y - b.y) >= wh;
}

}  // namespace

void validate(const SceneGenConfig& cfg) {
  if (cfg.width < 16 || cfg.height < 16) throw InputError("image_size must be at least 16x16");
  if (cfg.n_crosswalks < 1 || cfg.n_crosswalks > 3) throw InputError("n_crosswalks must be 1..3");
  if (cfg.min_pedestrians < 0 || cfg.max_pedestrians < cfg.min_pedestrians)
    throw InputError("pedestrians_per_scene range is empty");
  for (int i = 0; i < 2; ++i)
    if (cfg.min_pedestrian_size[i] < 0 || cfg.max_pedestrian_size[i] < cfg.min_pedestrian_size[i])
      throw InputError("pedestrian_size range is empty");
  if (!(cfg.perspective_skew >= 0.0 && cfg.perspective_skew <= 0.5)) throw InputError("perspective_skew must lie in [0,0.5]");
  if (!(cfg.color_jitter >= 0.0 && cfg.color_jitter <= 0.10)) throw InputError("color_jitter must lie in [0,0.1]");
}

SceneGenConfig scenegen_config_from_json(const nlohmann::json& j) {
  SceneGenConfig cfg;
  try {
    if (j.contains("image_size")) {
      cfg.width = j.at("image_size").at(0).get<int>();
      cfg.height = j.at("image_size").at(1).get<int>();
    }
    cfg.n_crosswalks = j.value("n_crosswalks", cfg.n_crosswalks);
    if (j.contains("pedestrians_per_scene")) {
      cfg.min_pedestrians = j.at("pedestrians_per_scene").at(0).get<int>();
      cfg.max_pedestrians = j.at("pedestrians_per_scene").at(1).get<int>();
    }
    if (j.contains("pedestrian_size")) {
      cfg.min_pedestrian_size = j.at("pedestrian_size").at(0).get<std::array<int, 2>>();
      cfg.max_pedestrian_size = j.at("pedestrian_size").at(1).get<std::array<int, 2>>();
    }
    cfg.perspective_skew = j.value("perspective_skew", cfg.perspective_skew);
    cfg.color_jitter = j.value("color_jitter", cfg.color_jitter);
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("scene generator config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

nlohmann::json to_json(const SceneGenConfig& cfg) {
  return {{"image_size", {cfg.width, cfg.height}},
          {"n_crosswalks", cfg.n_crosswalks},
          {"pedestrians_per_scene", {cfg.min_pedestrians, cfg.max_pedestrians}},
          {"pedestrian_size", {cfg.min_pedestrian_size, cfg.max_pedestrian_size}},
          {"perspective_skew", cfg.perspective_skew},
          {"color_jitter", cfg.color_jitter},
          {"seed", cfg.seed}};
}

Raster pedestrian_template() {
  const int w = 7;
  const int h = static_cast<int>(kPedestrianRows.size());
  Raster t(w, h, 4, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      std::array<double, 3> rgb{};
      switch (kPedestrianRows[y][x]) {
        case 'H': rgb = {0.86, 0.68, 0.52}; break;
        case 'S': rgb = {0.16, 0.30, 0.76}; break;
        case 'P': rgb = {0.10, 0.10, 0.13}; break;
        default: continue;
      }
      for (int c = 0; c < 3; ++c) t.at(x, y, c) = rgb[c];
      t.at(x, y, 3) = 1.0;
    }
  return quantize8(t);
}

DetectorConfig tuned_detector_config() {
  DetectorConfig cfg;
  cfg.template_name = "pedestrian-7x15";
  cfg.pattern = pedestrian_template();
  cfg.window_w = cfg.pattern.width() + 6;
  cfg.window_h = cfg.pattern.height() + 6;
  cfg.stride = 1;
  cfg.gain = 75.0;
  cfg.threshold = 0.56;
  cfg.nms_iou = 0.3;
  cfg.context = kRoadColor;
  return cfg;
}

Raster solid_art(int width, int height, std::array<double, 3> color) {
  Raster r(width, height, 3);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < 3; ++c) r.at(x, y, c) = color[c];
  return r;
}

Raster striped_color_art(int width, int height, std::array<double, 3> color) {
  Raster r = solid_art(width, height, color);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      if ((x / 4) % 2 == 0)
        for (int c = 0; c < 3; ++c) r.at(x, y, c) = kStripeWhite[c];
  return r;
}

Raster zebra_art(int width, int height) { return striped_color_art(width, height, kRoadColor); }

Raster checker_art(int width, int height, int cell, std::array<double, 3> a, std::array<double, 3> b) {
  Raster r(width, height, 3);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const auto& col = ((x / cell) + (y / cell)) % 2 == 0 ? a : b;
      for (int c = 0; c < 3; ++c) r.at(x, y, c) = col[c];
    }
  return r;
}

GeneratedScene generate_scene(const SceneGenConfig& cfg, int index) {
  validate(cfg);
  auto rng = scene_rng(cfg.seed, index);
  GeneratedScene out;
  Scene& s = out.scene;
  char name[32];
  std::snprintf(name, sizeof name, "scene_%03d", index);
  s.name = name;

  Raster bg = road_background(cfg.width, cfg.height, rng);
  for (int k = 0; k < cfg.n_crosswalks; ++k) s.regions.push_back(crosswalk_polygon(cfg, k, rng));
  InjectResult painted = inject_art(bg, s.regions, zebra_art(kArtWidth, kArtHeight));
  if (!painted.failures.empty()) throw GenerationError("crosswalk " + std::to_string(painted.failures[0].index) + ": " + painted.failures[0].message);
  s.background = quantize8(painted.image);

  const DetectorConfig det = tuned_detector_config();
  const Raster tmpl = det.pattern;
  const int n_peds = uniform_int(rng, cfg.min_pedestrians, cfg.max_pedestrians);
  for (int p = 0; p < n_peds; ++p) {
    const int pw = cfg.max_pedestrian_size[0] == 0 ? tmpl.width() : uniform_int(rng, cfg.min_pedestrian_size[0], cfg.max_pedestrian_size[0]);
    const int ph = cfg.max_pedestrian_size[1] == 0 ? tmpl.height() : uniform_int(rng, cfg.min_pedestrian_size[1], cfg.max_pedestrian_size[1]);
    // Keep the full detection window around the pedestrian inside the frame.
    const int ring_l = (det.window_w - tmpl.width()) / 2;
    const int ring_t = (det.window_h - tmpl.height()) / 2;
    const int ring_r = det.window_w - tmpl.width() - ring_l;
    const int ring_b = det.window_h - tmpl.height() - ring_t;
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      const std::size_t k = static_cast<std::size_t>(uniform_int(rng, 0, cfg.n_crosswalks - 1));
      const auto& poly = s.regions[k].vertices;
      double min_x = poly[0].x, max_x = poly[0].x, min_y = poly[0].y, max_y = poly[0].y;
      for (const auto& v : poly) {
        min_x = std::min(min_x, v.x);
        max_x = std::max(max_x, v.x);
        min_y = std::min(min_y, v.y);
        max_y = std::max(max_y, v.y);
      }
      const double cx = uniform(rng, min_x, max_x);
      const double cy = uniform(rng, min_y, max_y);
      Placement pl{static_cast<int>(std::lround(cx - pw / 2.0)), static_cast<int>(std::lround(cy - ph / 2.0)), pw, ph, k};
      if (pl.x < ring_l || pl.y < ring_t || pl.x + pw + ring_r > cfg.width || pl.y + ph + ring_b > cfg.height) continue;
      const Point centre{pl.x + (pw - 1) / 2.0, pl.y + (ph - 1) / 2.0};
      if (!point_in_polygon(poly, centre)) continue;
      const bool clear = std::all_of(out.placements.begin(), out.placements.end(), [&](const Placement& o) {
        return windows_disjoint(o, pl, det.window_w + (pw - tmpl.width()), det.window_h + (ph - tmpl.height()));
      });
      if (!clear) continue;
      placed = true;
      out.placements.push_back(pl);
    }
    if (!placed)
      throw GenerationError("could not place pedestrian " + std::to_string(p) + " of " + s.name +
                            " on a crosswalk with non-overlapping detection windows after " +
                            std::to_string(kPlacementAttempts) + " attempts");
  }
  for (const auto& pl : out.placements) {
    std::array<double, 3> jitter{};
    for (double& j : jitter) j = 1.0 + uniform(rng, -cfg.color_jitter, cfg.color_jitter);
    s.foregrounds.push_back({render_pedestrian(tmpl, pl.w, pl.h, jitter), pl.x, pl.y});
    s.ground_truth.push_back({static_cast<double>(pl.x), static_cast<double>(pl.y), static_cast<double>(pl.w),
                              static_cast<double>(pl.h)});
  }
  return out;
}

std::vector<SceneManifest> generate_dataset(const SceneGenConfig& cfg, int n, const fs::path& out_dir) {
  if (n < 1) throw InputError("dataset size must be >= 1");
  validate(cfg);
  fs::create_directories(out_dir / "backgrounds");
  fs::create_directories(out_dir / "cutouts");
  fs::create_directories(out_dir / "masks");
  std::vector<SceneManifest> manifests;
  for (int i = 0; i < n; ++i) {
    const GeneratedScene g = generate_scene(cfg, i);
    char buf[64];
    SceneManifest m;
    std::snprintf(buf, sizeof buf, "backgrounds/bg_%03d.png", i);
    m.background = buf;
    save_image(g.scene.background, out_dir / m.background);
    PolygonMaskFile masks{cfg.width, cfg.height, {}};
    BinaryMask uni(cfg.width, cfg.height);
    for (std::size_t k = 0; k < g.scene.regions.size(); ++k) {
      std::snprintf(buf, sizeof buf, "crosswalk_%zu", k);
      m.regions.push_back({buf, g.scene.regions[k]});
      masks.regions.push_back({buf, g.scene.regions[k]});
      const BinaryMask mk = rasterize_polygon(g.scene.regions[k], cfg.width, cfg.height);
      for (int y = 0; y < cfg.height; ++y)
        for (int x = 0; x < cfg.width; ++x)
          if (mk.get(x, y)) uni.set(x, y);
    }
    std::snprintf(buf, sizeof buf, "masks/regions_%03d.json", i);
    save_polygon_masks(masks, out_dir / buf);
    std::snprintf(buf, sizeof buf, "masks/mask_%03d.png", i);
    save_mask(uni, out_dir / buf);
    m.ground_truth = g.scene.ground_truth;
    for (std::size_t p = 0; p < g.scene.foregrounds.size(); ++p) {
      std::snprintf(buf, sizeof buf, "cutouts/cut_%03d_%02zu.png", i, p);
      save_image(g.scene.foregrounds[p].image, out_dir / buf);
      m.foregrounds.push_back({buf, g.scene.foregrounds[p].x, g.scene.foregrounds[p].y});
    }
    std::snprintf(buf, sizeof buf, "manifest_%03d.json", i);
    save_manifest(m, out_dir / buf);
    manifests.push_back(std::move(m));
  }
  std::ofstream meta(out_dir / "generator.json");
  meta << nlohmann::json{{"generator", to_json(cfg)}, {"scenes", n}}.dump(2) << '\n';
  return manifests;
}

}  // namespace xwalk
