// Copyright 2026 The Unlearn Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "unlearn/optim.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "unlearn/error.h"

namespace unlearn {

SgdOptimizer::SgdOptimizer(const ParameterSet& shape, double momentum,
                           double weight_decay)
    : velocity_(shape.ZerosLike()),
      momentum_(momentum),
      weight_decay_(weight_decay) {}

void SgdOptimizer::Step(ParameterSet& params, const ParameterSet& grads,
                        double lr, const ParameterSet* mask) {
  if (!params.SameShape(grads) || !params.SameShape(velocity_) ||
      (mask != nullptr && !params.SameShape(*mask))) {
    throw ShapeError("optimizer step: parameter/gradient shape mismatch");
  }
  for (const auto& g : grads.layers) {
    if (!g.weight.AllFinite()) {
      throw NumericError("non-finite gradient in layer " + g.name);
    }
    for (double b : g.bias) {
      if (!std::isfinite(b)) {
        throw NumericError("non-finite gradient in layer " + g.name);
      }
    }
  }
  auto update = [&](std::vector<double>& p, const std::vector<double>& g,
                    std::vector<double>& v, const std::vector<double>* m) {
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (m != nullptr && (*m)[k] == 0.0) continue;
      v[k] = momentum_ * v[k] + g[k] + weight_decay_ * p[k];
      p[k] -= lr * v[k];
    }
  };
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const Layer* ml = mask != nullptr ? &mask->layers[i] : nullptr;
    update(params.layers[i].weight.data(), grads.layers[i].weight.data(),
           velocity_.layers[i].weight.data(),
           ml != nullptr ? &ml->weight.data() : nullptr);
    update(params.layers[i].bias, grads.layers[i].bias,
           velocity_.layers[i].bias, ml != nullptr ? &ml->bias : nullptr);
  }
}

double LrAt(const ScheduleState& s) {
  const std::size_t warmup = s.warmup_steps();
  const std::size_t total = s.total_steps();
  if (warmup > 0 && s.current_step < warmup) {
    return s.base_lr * static_cast<double>(s.current_step) /
           static_cast<double>(warmup);
  }
  if (total <= warmup) return s.base_lr;
  const double progress =
      std::min(1.0, static_cast<double>(s.current_step - warmup) /
                        static_cast<double>(total - warmup));
  const double lr =
      s.base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
  return lr > 0.0 ? lr : 0.0;
}

}  // namespace unlearn
