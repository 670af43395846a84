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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "xwalk/adapter.hpp"
#include "xwalk/attack.hpp"
#include "xwalk/errors.hpp"
#include "xwalk/image_io.hpp"
#include "xwalk/manifest.hpp"
#include "xwalk/metrics.hpp"
#include "xwalk/scenegen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace xwalk;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

// Raised for bad flags or inputs found before any work starts.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::string detector = "synthetic";
  std::string detector_cmd;
  std::string detector_config;
  int timeout_ms = static_cast<int>(AdapterProcess::kDefaultTimeout.count());
};

struct Dataset {
  std::vector<fs::path> manifests;
  std::vector<Scene> scenes;
};

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw UsageError("cannot read " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError(p.string() + ": " + e.what());
  }
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write " + p.string());
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

Dataset load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw UsageError("dataset directory not found: " + dir.string());
  Dataset d;
  d.manifests = list_manifests(dir);
  if (d.manifests.empty()) throw UsageError("no manifest_*.json in " + dir.string());
  try {
    for (const auto& m : d.manifests) d.scenes.push_back(load_scene(m));
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return d;
}

Raster load_art(const fs::path& p) {
  try {
    Raster img = load_image(p);
    if (img.channels() == 3) return img;
    Raster rgb(img.width(), img.height(), 3);
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x)
        for (int c = 0; c < 3; ++c) rgb.at(x, y, c) = img.at(x, y, c);
    return rgb;
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

DetectorConfig resolved_detector_config(const Globals& g) {
  DetectorConfig cfg = tuned_detector_config();
  if (!g.detector_config.empty()) {
    try {
      cfg = apply_overrides(cfg, read_json(g.detector_config));
    } catch (const InputError& e) {
      throw UsageError(e.what());
    }
  }
  return cfg;
}

std::unique_ptr<Detector> make_detector(const Globals& g) {
  if (g.detector == "synthetic") return std::make_unique<SyntheticDetector>(resolved_detector_config(g));
  return std::make_unique<ExternalDetector>(g.detector_cmd, g.workers, std::chrono::milliseconds(g.timeout_ms));
}

json detector_json(const Globals& g) {
  if (g.detector == "synthetic") return {{"kind", "synthetic"}, {"config", to_json(resolved_detector_config(g))}};
  return {{"kind", "cmd"}, {"command", g.detector_cmd}, {"timeout_ms", g.timeout_ms}};
}

// Composites as written to disk, so in-memory and file-based runs agree.
Raster composite(const Scene& s, const Raster* art, std::vector<RegionFailure>* failures = nullptr) {
  return quantize8(compose_scene(s, art, {}, failures));
}

struct DetectionRun {
  std::vector<std::vector<Detection>> detections;
  std::vector<std::string> errors;  // per image, empty on success
};

DetectionRun run_detection(const Dataset& d, const Raster* art, Detector& det, int workers) {
  const int n = static_cast<int>(d.scenes.size());
  DetectionRun run;
  run.detections.resize(n);
  run.errors.resize(n);
  const int threads = det.concurrent() ? std::max(1, workers) : 1;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (int i = 0; i < n; ++i) {
    try {
      run.detections[i] = det.detect(composite(d.scenes[i], art));
    } catch (const std::exception& e) {
      run.errors[i] = e.what();
    }
  }
  return run;
}

std::vector<std::vector<Box>> truths(const Dataset& d) {
  std::vector<std::vector<Box>> out;
  for (const auto& s : d.scenes) out.push_back(s.ground_truth);
  return out;
}

// Throws after logging when any image failed.
void check_run(const Dataset& d, const DetectionRun& run, const fs::path& log_path) {
  std::string log;
  for (std::size_t i = 0; i < run.errors.size(); ++i)
    if (!run.errors[i].empty()) log += d.scenes[i].name + ": " + run.errors[i] + "\n";
  if (log.empty()) return;
  write_text(log_path, log);
  std::cerr << log;
  throw AdapterError("detection failed on some images; see " + log_path.string());
}

struct Evaluation {
  MetricsReport report;
  std::vector<ImageRecord> records;
};

Evaluation evaluate(const Dataset& d, const Raster* art, Detector& det, int workers, const fs::path& log_path) {
  const DetectionRun run = run_detection(d, art, det, workers);
  check_run(d, run, log_path);
  Evaluation ev;
  ev.report = evaluate_dataset(run.detections, truths(d));
  for (std::size_t i = 0; i < d.scenes.size(); ++i)
    ev.records.push_back({d.manifests[i].filename().string(), run.detections[i], d.scenes[i].ground_truth});
  return ev;
}

json report_json(const MetricsReport& r, const json& config) {
  json j = to_json(r);
  j["config"] = config;
  return j;
}

void print_row(const std::string& label, const MetricsReport& r) {
  std::cout << table_header() << '\n' << table_row(label, r) << '\n';
  if (r.empty_warning) std::cerr << "warning: no ground truth and no detections\n";
}

// ---------------------------------------------------------------------------

int cmd_gen(const Globals& g, int n, const fs::path& out, const std::string& config_path) {
  SceneGenConfig cfg;
  try {
    if (!config_path.empty()) cfg = scenegen_config_from_json(read_json(config_path));
    if (g.seed) cfg.seed = *g.seed;
    validate(cfg);
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
  if (n < 1) throw UsageError("--n must be >= 1");
  generate_dataset(cfg, n, out);
  std::cout << "wrote " << n << " scenes to " << out.string() << '\n';
  return 0;
}

int cmd_compose(const fs::path& dataset, const std::string& art_path, const fs::path& out) {
  const Dataset d = load_dataset(dataset);
  std::optional<Raster> art;
  if (!art_path.empty()) art = load_art(art_path);
  fs::create_directories(out / "composites");
  std::size_t degenerate = 0;
  for (std::size_t i = 0; i < d.scenes.size(); ++i) {
    const Scene& s = d.scenes[i];
    std::vector<RegionFailure> failures;
    const Raster img = composite(s, art ? &*art : nullptr, &failures);
    for (const auto& f : failures) std::cerr << "warning: " << s.name << " region " << f.index << ": " << f.message << '\n';
    degenerate += failures.size();
    SceneManifest m;
    m.background = fs::path("composites") / (s.name + ".png");
    save_image(img, out / m.background);
    const SceneManifest src = load_manifest(d.manifests[i]);
    m.regions = src.regions;
    m.ground_truth = s.ground_truth;
    save_manifest(m, out / d.manifests[i].filename());
  }
  std::cout << "composed " << d.scenes.size() << " scenes into " << out.string() << "; degenerate regions: " << degenerate
            << '\n';
  return 0;
}

int cmd_evaluate(const Globals& g, const fs::path& dataset, fs::path report, fs::path detections_path) {
  const Dataset d = load_dataset(dataset);
  if (report.empty()) report = dataset / "report.json";
  if (detections_path.empty()) detections_path = report.parent_path() / "detections.json";
  auto det = make_detector(g);
  const Evaluation ev = evaluate(d, nullptr, *det, g.workers, report.parent_path() / "errors.log");
  write_json(detections_path, to_json(std::span<const ImageRecord>(ev.records)));
  write_json(report, report_json(ev.report, {{"dataset", dataset.string()}, {"detector", detector_json(g)}}));
  print_row(dataset.filename().string().empty() ? dataset.parent_path().filename().string() : dataset.filename().string(),
            ev.report);
  return 0;
}

struct AttackArgs {
  fs::path dataset;
  fs::path eval_dataset;
  fs::path art;
  fs::path config;
  fs::path support;
  fs::path out;
  std::optional<int> iterations;
  std::optional<double> epsilon;
  int train = 8;
};

int cmd_attack(const Globals& g, const AttackArgs& a) {
  AttackConfig cfg;
  try {
    json j = a.config.empty() ? json::object() : read_json(a.config);
    if (a.epsilon) j["epsilon"] = *a.epsilon;
    if (a.iterations) j["iterations"] = *a.iterations;
    if (g.seed) j["seed"] = *g.seed;
    cfg = attack_config_from_json(j);
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
  if (a.train < 1) throw UsageError("--train must be >= 1");
  const Raster art = load_art(a.art);
  std::optional<BinaryMask> support;
  if (!a.support.empty()) {
    try {
      support = load_mask(a.support);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    if (support->width() != art.width() || support->height() != art.height())
      throw UsageError("support mask does not match the art size");
  }
  const Dataset train_set = load_dataset(a.dataset);
  const Dataset eval_set = a.eval_dataset.empty() ? train_set : load_dataset(a.eval_dataset);
  const std::size_t n_train = std::min<std::size_t>(a.train, train_set.scenes.size());
  const std::vector<Scene> batch(train_set.scenes.begin(), train_set.scenes.begin() + n_train);

  auto det = make_detector(g);
  const AttackResult res = optimize_perturbation(art, batch, *det, cfg, support);
  fs::create_directories(a.out);
  std::string trace;
  for (const auto& r : res.trace.iterations) trace += to_json(r).dump() + "\n";
  write_text(a.out / "trace.jsonl", trace);
  save_perturbation(res.perturbation, a.out / "perturbation", a.support.empty() ? "" : fs::absolute(a.support).string());
  const Raster perturbed = apply_perturbation(art, res.perturbation);
  save_image(perturbed, a.out / "perturbed_art.png");
  if (res.aborted) {
    std::cerr << "attack aborted: " << res.error << '\n';
    return kExitRuntime;
  }

  const json config{{"dataset", a.dataset.string()},
                    {"eval_dataset", (a.eval_dataset.empty() ? a.dataset : a.eval_dataset).string()},
                    {"art", a.art.string()},
                    {"train_scenes", n_train},
                    {"attack", to_json(cfg)},
                    {"detector", detector_json(g)},
                    {"initial_loss", res.trace.initial_loss},
                    {"best_loss", res.trace.iterations.empty() ? res.trace.initial_loss
                                                               : res.trace.iterations.back().best_loss}};
  // The art is evaluated as saved so reloading perturbed_art.png reproduces the after-report.
  const Raster art8 = quantize8(art);
  const Raster perturbed8 = quantize8(perturbed);
  const Evaluation before = evaluate(eval_set, &art8, *det, g.workers, a.out / "errors.log");
  const Evaluation after = evaluate(eval_set, &perturbed8, *det, g.workers, a.out / "errors.log");
  write_json(a.out / "report_before.json", report_json(before.report, config));
  write_json(a.out / "report_after.json", report_json(after.report, config));
  std::cout << table_header() << '\n'
            << table_row("before", before.report) << '\n'
            << table_row("after", after.report) << '\n';
  return 0;
}

int cmd_batch(const Globals& g, const fs::path& dataset, const std::vector<std::string>& arts, const fs::path& out) {
  if (arts.empty()) throw UsageError("batch needs at least one --art");
  const Dataset d = load_dataset(dataset);
  std::vector<std::optional<Raster>> patterns;
  for (const auto& a : arts) patterns.push_back(a == "clean" ? std::nullopt : std::optional<Raster>(load_art(a)));
  auto det = make_detector(g);
  json rows = json::array();
  std::string text = table_header() + "\n";
  for (std::size_t i = 0; i < arts.size(); ++i) {
    const std::string label = arts[i] == "clean" ? "clean" : fs::path(arts[i]).stem().string();
    const Evaluation ev = evaluate(d, patterns[i] ? &*patterns[i] : nullptr, *det, g.workers, out / "errors.log");
    rows.push_back({{"pattern", arts[i]}, {"label", label}, {"report", to_json(ev.report)}});
    text += table_row(label, ev.report) + "\n";
  }
  write_json(out / "comparison.json",
             {{"rows", rows}, {"config", {{"dataset", dataset.string()}, {"detector", detector_json(g)}}}});
  write_text(out / "comparison.txt", text);
  std::cout << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crosswalk art injection, evaluation and attack toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  Globals g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Random seed")->expected(1);
  app.add_option("--workers", g.workers, "Concurrent detection workers")->check(CLI::PositiveNumber);
  app.add_option("--detector", g.detector, "Detector backend")->check(CLI::IsMember({"synthetic", "cmd"}));
  app.add_option("--detector-cmd", g.detector_cmd, "Adapter command line for --detector cmd");
  app.add_option("--detector-config", g.detector_config, "JSON overrides for the synthetic detector");
  app.add_option("--timeout-ms", g.timeout_ms, "Adapter response timeout")->check(CLI::PositiveNumber);

  int gen_n = 0;
  fs::path gen_out;
  std::string gen_config;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
  gen->add_option("--n", gen_n, "Number of scenes")->required();
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--config", gen_config, "Generator config JSON");

  fs::path comp_dataset, comp_out;
  std::string comp_art;
  auto* compose = app.add_subcommand("compose", "Inject art and write composited scenes");
  compose->add_option("--dataset", comp_dataset, "Dataset directory")->required();
  compose->add_option("--art", comp_art, "Art image; omit for a clean pass-through");
  compose->add_option("--out", comp_out, "Output directory")->required();

  fs::path eval_dataset, eval_report, eval_dets;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Run the detector and score it");
  evaluate_cmd->add_option("--dataset", eval_dataset, "Dataset directory")->required();
  evaluate_cmd->add_option("--report", eval_report, "Report JSON path");
  evaluate_cmd->add_option("--detections", eval_dets, "Detections interchange path");

  AttackArgs atk;
  int atk_iters = 0;
  double atk_eps = 0.0;
  auto* attack = app.add_subcommand("attack", "Optimise a universal perturbation of the art");
  attack->add_option("--dataset", atk.dataset, "Training dataset directory")->required();
  attack->add_option("--eval-dataset", atk.eval_dataset, "Held-out dataset for the before/after reports");
  attack->add_option("--art", atk.art, "Base art image")->required();
  attack->add_option("--config", atk.config, "Attack config JSON");
  attack->add_option("--support", atk.support, "Support mask in art coordinates");
  auto* iters_opt = attack->add_option("--iterations", atk_iters, "Override iterations");
  auto* eps_opt = attack->add_option("--epsilon", atk_eps, "Override epsilon");
  attack->add_option("--train", atk.train, "Number of training scenes");
  attack->add_option("--out", atk.out, "Output directory")->required();

  fs::path batch_dataset, batch_out;
  std::vector<std::string> batch_arts;
  auto* batch = app.add_subcommand("batch", "Compare art patterns");
  batch->add_option("--dataset", batch_dataset, "Dataset directory")->required();
  batch->add_option("--art", batch_arts, "Art image, or 'clean'; repeatable")->required();
  batch->add_option("--out", batch_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  if (*seed_opt) g.seed = seed;
  if (*iters_opt) atk.iterations = atk_iters;
  if (*eps_opt) atk.epsilon = atk_eps;

  try {
    if (g.detector == "cmd" && g.detector_cmd.empty()) throw UsageError("--detector cmd needs --detector-cmd");
    if (g.detector == "synthetic" && !g.detector_cmd.empty()) throw UsageError("--detector-cmd needs --detector cmd");
    if (*gen) return cmd_gen(g, gen_n, gen_out, gen_config);
    if (*compose) return cmd_compose(comp_dataset, comp_art, comp_out);
    if (*evaluate_cmd) return cmd_evaluate(g, eval_dataset, eval_report, eval_dets);
    if (*attack) return cmd_attack(g, atk);
    if (*batch) return cmd_batch(g, batch_dataset, batch_arts, batch_out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
