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

#include "xwalk/attack.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "xwalk/errors.hpp"
#include "xwalk/image_io.hpp"

namespace xwalk {

namespace fs = std::filesystem;

namespace {

void zero_outside(Raster& r, const std::optional<BinaryMask>& support) {
  if (!support) return;
  for (int y = 0; y < r.height(); ++y)
    for (int x = 0; x < r.width(); ++x)
      if (!support->get(x, y))
        for (int c = 0; c < r.channels(); ++c) r.at(x, y, c) = 0.0;
}

// Box projection, art feasibility, then support masking.
void project(Raster& delta, const Raster& art, double eps, const std::optional<BinaryMask>& support) {
  auto d = delta.data();
  auto a = art.data();
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double boxed = std::clamp(d[i], -eps, eps);
    const double feasible = std::clamp(a[i] + boxed, 0.0, 1.0) - a[i];
    d[i] = std::clamp(feasible, -eps, eps);
  }
  zero_outside(delta, support);
}

}  // namespace

bool Perturbation::feasible() const {
  for (double v : values.data())
    if (!(std::abs(v) <= epsilon)) return false;
  if (support) {
    if (support->width() != values.width() || support->height() != values.height()) return false;
    for (int y = 0; y < values.height(); ++y)
      for (int x = 0; x < values.width(); ++x)
        if (!support->get(x, y))
          for (int c = 0; c < values.channels(); ++c)
            if (values.at(x, y, c) != 0.0) return false;
  }
  return true;
}

void validate(const AttackConfig& cfg) {
  if (!(cfg.epsilon > 0.0 && cfg.epsilon <= 1.0)) throw InputError("epsilon must lie in (0, 1]");
  if (!(cfg.step_size > 0.0)) throw InputError("step_size must be positive");
  if (cfg.iterations < 0) throw InputError("iterations must be >= 0");
  if (cfg.queries_per_gradient < 1) throw InputError("queries_per_gradient must be >= 1");
  if (!(cfg.smoothing_sigma > 0.0)) throw InputError("smoothing_sigma must be positive");
}

AttackConfig attack_config_from_json(const nlohmann::json& j) {
  AttackConfig cfg;
  try {
    cfg.epsilon = j.value("epsilon", cfg.epsilon);
    cfg.step_size = j.contains("step_size") ? j.at("step_size").get<double>() : cfg.epsilon / 8.0;
    cfg.iterations = j.value("iterations", cfg.iterations);
    cfg.queries_per_gradient = j.value("queries_per_gradient", cfg.queries_per_gradient);
    cfg.smoothing_sigma = j.value("smoothing_sigma", cfg.smoothing_sigma);
    cfg.seed = j.value("seed", cfg.seed);
    const std::string agg = j.value("aggregation", std::string("mean"));
    if (agg == "mean") {
      cfg.aggregation = BatchAggregation::kMeanOfMax;
    } else if (agg == "max") {
      cfg.aggregation = BatchAggregation::kMaxOfMax;
    } else {
      throw InputError("aggregation must be 'mean' or 'max'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("attack config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

nlohmann::json to_json(const AttackConfig& cfg) {
  return {{"epsilon", cfg.epsilon},
          {"step_size", cfg.step_size},
          {"iterations", cfg.iterations},
          {"queries_per_gradient", cfg.queries_per_gradient},
          {"smoothing_sigma", cfg.smoothing_sigma},
          {"seed", cfg.seed},
          {"aggregation", cfg.aggregation == BatchAggregation::kMeanOfMax ? "mean" : "max"}};
}

nlohmann::json to_json(const IterationRecord& r) {
  return {{"iteration", r.iteration}, {"loss", r.loss}, {"best_loss", r.best_loss}, {"queries_used", r.queries_used}};
}

double objectness_loss(const Raster& art, const Raster& delta, std::span<const Scene> batch, Detector& detector,
                       BatchAggregation aggregation, const InjectOptions& inject) {
  if (batch.empty()) throw InputError("attack batch is empty");
  const Raster perturbed = apply_perturbation(art, delta);
  double total = 0.0;
  double worst = 0.0;
  for (const Scene& scene : batch) {
    const Raster composed = compose_scene(scene, &perturbed, inject);
    double peak = 0.0;
    try {
      peak = detector.max_objectness(composed);
    } catch (const AdapterError& e) {
      throw AdapterError(scene.name + ": " + e.what());
    }
    total += peak;
    worst = std::max(worst, peak);
  }
  return aggregation == BatchAggregation::kMeanOfMax ? total / static_cast<double>(batch.size()) : worst;
}

Raster estimate_gradient(const LossFn& loss, const Raster& delta, const std::optional<BinaryMask>& support, int n,
                         double sigma, std::mt19937_64& rng, bool concurrent_probes) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Raster> dirs;
  dirs.reserve(n);
  for (int k = 0; k < n; ++k) {
    Raster u(delta.width(), delta.height(), delta.channels());
    for (double& v : u.data()) v = normal(rng);
    zero_outside(u, support);
    dirs.push_back(std::move(u));
  }

  std::vector<double> diffs(n, 0.0);
  auto probe = [&](int k) {
    Raster plus = delta;
    Raster minus = delta;
    auto p = plus.data();
    auto m = minus.data();
    auto u = dirs[k].data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] += sigma * u[i];
      m[i] -= sigma * u[i];
    }
    diffs[k] = loss(plus) - loss(minus);
  };
  if (concurrent_probes) {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (int k = 0; k < n; ++k) {
      try {
        probe(k);
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (int k = 0; k < n; ++k) probe(k);
  }

  Raster g(delta.width(), delta.height(), delta.channels());
  auto gd = g.data();
  const double scale = 1.0 / (2.0 * n * sigma);
  for (int k = 0; k < n; ++k) {
    const double w = diffs[k] * scale;
    if (w == 0.0) continue;
    auto u = dirs[k].data();
    for (std::size_t i = 0; i < gd.size(); ++i) gd[i] += w * u[i];
  }
  return g;
}

AttackResult optimize_with_loss(const Raster& art, const LossFn& loss, const AttackConfig& cfg,
                                const std::optional<BinaryMask>& support, bool concurrent_probes) {
  validate(cfg);
  if (support && (support->width() != art.width() || support->height() != art.height()))
    throw ShapeError("support mask does not match the art");
  AttackResult result;
  result.perturbation = Perturbation::zeros(art, cfg.epsilon, support);
  if (cfg.iterations == 0) return result;

  std::mt19937_64 rng(cfg.seed);
  Raster delta = result.perturbation.values;
  std::int64_t queries = 0;
  try {
    result.trace.initial_loss = loss(delta);
    ++queries;
    double best = result.trace.initial_loss;
    for (int it = 1; it <= cfg.iterations; ++it) {
      const Raster g = estimate_gradient(loss, delta, support, cfg.queries_per_gradient, cfg.smoothing_sigma, rng,
                                         concurrent_probes);
      auto d = delta.data();
      auto gd = g.data();
      for (std::size_t i = 0; i < d.size(); ++i) {
        const double s = gd[i] > 0.0 ? 1.0 : (gd[i] < 0.0 ? -1.0 : 0.0);
        d[i] -= cfg.step_size * s;
      }
      project(delta, art, cfg.epsilon, support);
      const double value = loss(delta);
      queries += 2 * cfg.queries_per_gradient + 1;
      if (value < best) {
        best = value;
        result.perturbation.values = delta;
      }
      result.trace.iterations.push_back({it, value, best, queries});
    }
  } catch (const AdapterError& e) {
    result.aborted = true;
    result.error = e.what();
  }
  return result;
}

AttackResult optimize_perturbation(const Raster& art, std::span<const Scene> batch, Detector& detector,
                                   const AttackConfig& cfg, const std::optional<BinaryMask>& support,
                                   const InjectOptions& inject) {
  if (batch.empty()) throw InputError("attack batch is empty");
  const LossFn loss = [&](const Raster& delta) {
    return objectness_loss(art, delta, batch, detector, cfg.aggregation, inject);
  };
  return optimize_with_loss(art, loss, cfg, support, detector.concurrent());
}

void save_perturbation(const Perturbation& p, const fs::path& stem, const std::string& support_path) {
  Raster pos(p.values.width(), p.values.height(), p.values.channels());
  Raster neg = pos;
  auto v = p.values.data();
  auto pp = pos.data();
  auto nn = neg.data();
  for (std::size_t i = 0; i < v.size(); ++i) {
    pp[i] = std::max(v[i], 0.0) / p.epsilon;
    nn[i] = std::max(-v[i], 0.0) / p.epsilon;
  }
  const fs::path dir = stem.parent_path();
  const std::string base = stem.filename().string();
  save_png16(pos, dir / (base + "_pos.png"));
  save_png16(neg, dir / (base + "_neg.png"));
  nlohmann::json side{{"epsilon", p.epsilon},
                      {"scale", "sample = |delta| / epsilon, 16-bit"},
                      {"positive", base + "_pos.png"},
                      {"negative", base + "_neg.png"},
                      {"width", p.values.width()},
                      {"height", p.values.height()},
                      {"channels", p.values.channels()},
                      {"support", support_path.empty() ? nlohmann::json(nullptr) : nlohmann::json(support_path)}};
  std::ofstream out(dir / (base + ".json"));
  if (!out) throw IoError("cannot write perturbation sidecar");
  out << side.dump(2) << '\n';
}

Perturbation load_perturbation(const fs::path& stem) {
  const fs::path dir = stem.parent_path();
  const std::string base = stem.filename().string();
  std::ifstream in(dir / (base + ".json"));
  if (!in) throw IoError("cannot open perturbation sidecar for " + stem.string());
  nlohmann::json side;
  try {
    side = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(e.what());
  }
  const double eps = side.at("epsilon").get<double>();
  const Raster pos = load_image(dir / side.at("positive").get<std::string>());
  const Raster neg = load_image(dir / side.at("negative").get<std::string>());
  if (!pos.same_shape(neg)) throw FormatError("perturbation planes differ in shape");
  Perturbation p{Raster(pos.width(), pos.height(), pos.channels()), eps, std::nullopt};
  auto v = p.values.data();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::clamp((pos.data()[i] - neg.data()[i]) * eps, -eps, eps);
  if (side.contains("support") && side.at("support").is_string()) {
    p.support = load_mask(dir / side.at("support").get<std::string>());
    auto& vals = p.values;
    for (int y = 0; y < vals.height(); ++y)
      for (int x = 0; x < vals.width(); ++x)
        if (!p.support->get(x, y))
          for (int c = 0; c < vals.channels(); ++c) vals.at(x, y, c) = 0.0;
  }
  return p;
}

}  // namespace xwalk
