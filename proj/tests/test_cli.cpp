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

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "test_support.hpp"
#include "xwalk/attack.hpp"
#include "xwalk/geometry.hpp"
#include "xwalk/image_io.hpp"
#include "xwalk/manifest.hpp"
#include "xwalk/scenegen.hpp"

namespace xwalk {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int run(const std::string& args) {
  const std::string cmd = std::string(XWALK_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return out;
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

const char* kMetrics[] = {"max_f1", "precision_at_max_f1", "recall_at_max_f1", "ap50", "fdr"};

TEST(Cli, GenIsDeterministic) {
  testing::TempDir dir;
  ASSERT_EQ(run("gen --seed 7 --n 4 --out " + (dir / "a").string()), 0);
  ASSERT_EQ(run("--seed 7 gen --n 4 --out " + (dir / "b").string()), 0);
  EXPECT_EQ(list_manifests(dir / "a").size(), 4u);
  EXPECT_EQ(tree(dir / "a"), tree(dir / "b"));
  ASSERT_EQ(run("gen --seed 7 --n 4 --out " + (dir / "a").string()), 0);
  EXPECT_EQ(tree(dir / "a"), tree(dir / "b"));
}

TEST(Cli, UsageErrorsExitOne) {
  testing::TempDir dir;
  EXPECT_EQ(run("gen --n 4"), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run(""), 1);
  fs::create_directories(dir / "empty");
  EXPECT_EQ(run("evaluate --dataset " + (dir / "empty").string()), 1);
  ASSERT_EQ(run("gen --n 1 --out " + (dir / "d").string()), 0);
  save_image(solid_art(8, 2, {0.2, 0.3, 0.7}), dir / "art.png");
  EXPECT_EQ(run("attack --dataset " + (dir / "d").string() + " --art " + (dir / "art.png").string() +
                " --epsilon 0 --out " + (dir / "atk").string()),
            1);
  EXPECT_EQ(run("--detector onnx evaluate --dataset " + (dir / "d").string()), 1);
}

TEST(Cli, AdapterFailureExitsTwoWithLog) {
  testing::TempDir dir;
  ASSERT_EQ(run("gen --n 2 --out " + (dir / "d").string()), 0);
  const std::string adapter = std::string("\"") + XWALK_MOCK_ADAPTER + " crash\"";
  EXPECT_EQ(run("--detector cmd --detector-cmd " + adapter + " evaluate --dataset " + (dir / "d").string()), 2);
  EXPECT_TRUE(fs::exists(dir / "d" / "errors.log"));
  EXPECT_FALSE(slurp(dir / "d" / "errors.log").empty());
}

TEST(Cli, CleanEvaluateIsPerfect) {
  testing::TempDir dir;
  ASSERT_EQ(run("gen --n 6 --out " + (dir / "d").string()), 0);
  ASSERT_EQ(run("evaluate --dataset " + (dir / "d").string()), 0);
  const json r = read_json(dir / "d" / "report.json");
  EXPECT_EQ(r.at("recall_at_max_f1"), 1.0);
  EXPECT_EQ(r.at("fdr"), 0.0);
  EXPECT_TRUE(r.contains("config"));
  EXPECT_TRUE(fs::exists(dir / "d" / "detections.json"));
}

TEST(Cli, GroundTruthEchoAdapterScoresPerfectly) {
  testing::TempDir dir;
  ASSERT_EQ(run("gen --n 3 --out " + (dir / "d").string()), 0);
  const std::string adapter = std::string("\"") + XWALK_MOCK_ADAPTER + " gt-echo " + (dir / "d").string() + "\"";
  ASSERT_EQ(run("--detector cmd --workers 2 --detector-cmd " + adapter + " evaluate --dataset " +
                (dir / "d").string() + " --report " + (dir / "r.json").string()),
            0);
  const json r = read_json(dir / "r.json");
  for (const char* k : {"max_f1", "precision_at_max_f1", "recall_at_max_f1", "ap50"}) EXPECT_EQ(r.at(k), 1.0) << k;
  EXPECT_EQ(r.at("fdr"), 0.0);
}

TEST(Cli, ComposeCleanPassThroughAndSolidArt) {
  testing::TempDir dir;
  ASSERT_EQ(run("gen --n 2 --out " + (dir / "d").string()), 0);
  ASSERT_EQ(run("compose --dataset " + (dir / "d").string() + " --out " + (dir / "clean").string()), 0);
  save_image(solid_art(64, 16, {0.2, 0.3, 0.7}), dir / "blue.png");
  ASSERT_EQ(run("compose --dataset " + (dir / "d").string() + " --art " + (dir / "blue.png").string() + " --out " +
                (dir / "blue").string()),
            0);
  ASSERT_EQ(run("compose --dataset " + (dir / "d").string() + " --art " + (dir / "blue.png").string() + " --out " +
                (dir / "blue2").string()),
            0);
  EXPECT_EQ(tree(dir / "blue" / "composites"), tree(dir / "blue2" / "composites"));
  const auto manifests = list_manifests(dir / "d");
  for (const auto& m : manifests) {
    const Scene s = load_scene(m);
    const std::string name = m.stem().string();
    const Raster clean = load_scene(dir / "clean" / m.filename()).background;
    EXPECT_EQ(clean, quantize8(compose_scene(s, nullptr)));
    const Raster blue = load_scene(dir / "blue" / m.filename()).background;
    BinaryMask inside(s.background.width(), s.background.height());
    for (const auto& r : s.regions) {
      const BinaryMask one = rasterize_polygon(r, inside.width(), inside.height());
      for (int y = 0; y < inside.height(); ++y)
        for (int x = 0; x < inside.width(); ++x)
          if (one.get(x, y)) inside.set(x, y);
    }
    std::size_t changed_inside = 0;
    for (int y = 0; y < inside.height(); ++y)
      for (int x = 0; x < inside.width(); ++x) {
        bool differs = false;
        for (int c = 0; c < 3; ++c) differs |= blue.at(x, y, c) != clean.at(x, y, c);
        if (inside.get(x, y)) changed_inside += differs;
        else EXPECT_FALSE(differs) << name << " " << x << "," << y;
      }
    EXPECT_GT(changed_inside, 100u);
  }
}

TEST(Cli, BatchRowsMatchEvaluateAndRepeat) {
  testing::TempDir dir;
  ASSERT_EQ(run("gen --n 3 --out " + (dir / "d").string()), 0);
  save_image(solid_art(64, 16, {0.2, 0.3, 0.7}), dir / "blue.png");
  const std::string art = (dir / "blue.png").string();
  ASSERT_EQ(run("batch --dataset " + (dir / "d").string() + " --art clean --art " + art + " --art " + art + " --out " +
                (dir / "cmp").string()),
            0);
  const json rows = read_json(dir / "cmp" / "comparison.json").at("rows");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].at("report"), rows[2].at("report"));
  ASSERT_EQ(run("compose --dataset " + (dir / "d").string() + " --art " + art + " --out " + (dir / "c").string()), 0);
  ASSERT_EQ(run("evaluate --dataset " + (dir / "c").string()), 0);
  const json single = read_json(dir / "c" / "report.json");
  for (const char* k : kMetrics) EXPECT_EQ(rows[1].at("report").at(k), single.at(k)) << k;
  ASSERT_EQ(run("evaluate --dataset " + (dir / "d").string()), 0);
  const json clean = read_json(dir / "d" / "report.json");
  for (const char* k : kMetrics) EXPECT_EQ(rows[0].at("report").at(k), clean.at(k)) << k;
  EXPECT_NE(slurp(dir / "cmp" / "comparison.txt").find("clean"), std::string::npos);
}

TEST(Cli, AttackZeroIterationsLeavesReportsEqual) {
  testing::TempDir dir;
  ASSERT_EQ(run("gen --n 2 --out " + (dir / "d").string()), 0);
  save_image(solid_art(16, 4, {0.8, 0.75, 0.2}), dir / "art.png");
  ASSERT_EQ(run("attack --dataset " + (dir / "d").string() + " --art " + (dir / "art.png").string() +
                " --iterations 0 --out " + (dir / "atk").string()),
            0);
  const Perturbation p = load_perturbation(dir / "atk" / "perturbation");
  for (double v : p.values.data()) EXPECT_EQ(v, 0.0);
  const json before = read_json(dir / "atk" / "report_before.json");
  const json after = read_json(dir / "atk" / "report_after.json");
  for (const char* k : kMetrics) EXPECT_EQ(before.at(k), after.at(k)) << k;
  EXPECT_TRUE(slurp(dir / "atk" / "trace.jsonl").empty());
}

TEST(Cli, AttackShortRunWritesArtifacts) {
  testing::TempDir dir;
  ASSERT_EQ(run("gen --n 2 --out " + (dir / "d").string()), 0);
  save_image(solid_art(16, 4, {0.8, 0.75, 0.2}), dir / "art.png");
  const std::string cfg = (dir / "cfg.json").string();
  std::ofstream(cfg) << R"({"queries_per_gradient": 2})";
  ASSERT_EQ(run("attack --dataset " + (dir / "d").string() + " --art " + (dir / "art.png").string() + " --config " +
                cfg + " --iterations 2 --out " + (dir / "atk").string()),
            0);
  std::istringstream lines(slurp(dir / "atk" / "trace.jsonl"));
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    EXPECT_EQ(json::parse(line).at("iteration"), ++n);
  }
  EXPECT_EQ(n, 2);
  EXPECT_TRUE(fs::exists(dir / "atk" / "perturbation_pos.png"));
  EXPECT_TRUE(fs::exists(dir / "atk" / "perturbed_art.png"));
  EXPECT_TRUE(load_perturbation(dir / "atk" / "perturbation").feasible());
}

}  // namespace
}  // namespace xwalk
