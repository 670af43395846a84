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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "xwalk/compose.hpp"
#include "xwalk/detect.hpp"
#include "xwalk/perturbation.hpp"

namespace xwalk {

enum class BatchAggregation { kMeanOfMax, kMaxOfMax };

struct AttackConfig {
  double epsilon = 16.0 / 255.0;
  double step_size = 2.0 / 255.0;  // epsilon / 8
  int iterations = 200;
  int queries_per_gradient = 32;   // n antithetic pairs
  double smoothing_sigma = 4.0 / 255.0;
  std::uint64_t seed = 7;
  BatchAggregation aggregation = BatchAggregation::kMeanOfMax;
};

/// Throws InputError unless every numeric field is positive (iterations may be 0).
void validate(const AttackConfig& cfg);

/// Fields absent from `j` keep their defaults; a missing step_size follows epsilon / 8.
AttackConfig attack_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AttackConfig& cfg);

struct IterationRecord {
  int iteration = 0;
  double loss = 0.0;
  double best_loss = 0.0;
  std::int64_t queries_used = 0;
};

struct AttackTrace {
  double initial_loss = 0.0;
  std::vector<IterationRecord> iterations;
};

struct AttackResult {
  Perturbation perturbation;
  AttackTrace trace;
  bool aborted = false;
  std::string error;
};

/// Loss over a raw (unconstrained) delta raster in art coordinates.
using LossFn = std::function<double(const Raster& delta)>;

/// Mean (or max) over the batch of each image's highest proposal objectness
/// after composing the scene with clamp(art + delta) injected. Images with no
/// proposal contribute 0.
double objectness_loss(const Raster& art, const Raster& delta, std::span<const Scene> batch, Detector& detector,
                       BatchAggregation aggregation = BatchAggregation::kMeanOfMax,
                       const InjectOptions& inject = {});

/// Antithetic Gaussian-smoothing estimate of the loss gradient at `delta`:
///   g = 1/(2 n sigma) * sum_k [L(delta + sigma u_k) - L(delta - sigma u_k)] u_k
/// Directions are drawn in order from `rng` and zeroed outside `support`.
/// Probes may run concurrently; the sum is always taken in sample order.
Raster estimate_gradient(const LossFn& loss, const Raster& delta, const std::optional<BinaryMask>& support,
                         int n, double sigma, std::mt19937_64& rng, bool concurrent_probes = false);

/// Signed-step projected descent from delta = 0, keeping the best iterate.
AttackResult optimize_with_loss(const Raster& art, const LossFn& loss, const AttackConfig& cfg,
                                const std::optional<BinaryMask>& support = std::nullopt,
                                bool concurrent_probes = false);

AttackResult optimize_perturbation(const Raster& art, std::span<const Scene> batch, Detector& detector,
                                   const AttackConfig& cfg, const std::optional<BinaryMask>& support = std::nullopt,
                                   const InjectOptions& inject = {});

/// Writes <stem>_pos.png and <stem>_neg.png (16-bit, samples are |delta| / epsilon)
/// plus <stem>.json recording epsilon and the support mask path.
void save_perturbation(const Perturbation& p, const std::filesystem::path& stem,
                       const std::string& support_path = "");
Perturbation load_perturbation(const std::filesystem::path& stem);

nlohmann::json to_json(const IterationRecord& r);

}  // namespace xwalk
