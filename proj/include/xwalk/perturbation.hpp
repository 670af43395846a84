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

#include "xwalk/raster.hpp"

namespace xwalk {

/// Signed pixel delta in art-pattern coordinates, bounded by epsilon in L-inf
/// and zero outside the optional support mask.
struct Perturbation {
  Raster values;
  double epsilon = 0.0;
  std::optional<BinaryMask> support;

  static Perturbation zeros(const Raster& art, double epsilon, std::optional<BinaryMask> support = std::nullopt) {
    return {Raster(art.width(), art.height(), art.channels(), 0.0), epsilon, std::move(support)};
  }

  /// Checks the box bound and the support exactly.
  bool feasible() const;
};

}  // namespace xwalk
