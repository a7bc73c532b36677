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

#ifndef UNLEARN_OPTIM_H_
#define UNLEARN_OPTIM_H_

#include <cstddef>

#include "unlearn/mlp.h"

namespace unlearn {

// Classical momentum SGD with weight decay folded into the gradient:
//   v ← momentum·v + grad + weight_decay·param
//   param ← param − lr·v
class SgdOptimizer {
 public:
  SgdOptimizer(const ParameterSet& shape, double momentum, double weight_decay);

  // Throws NumericError naming the first layer with a non-finite gradient.
  // When mask is given, entries with mask 0 are left untouched (including
  // their momentum).
  void Step(ParameterSet& params, const ParameterSet& grads, double lr,
            const ParameterSet* mask = nullptr);

  const ParameterSet& velocity() const { return velocity_; }
  double momentum() const { return momentum_; }
  double weight_decay() const { return weight_decay_; }

 private:
  ParameterSet velocity_;
  double momentum_;
  double weight_decay_;
};

// Linear warmup from 0 to base_lr, then cosine decay to 0 at the final step.
struct ScheduleState {
  double base_lr = 0.1;
  std::size_t warmup_epochs = 0;
  std::size_t total_epochs = 1;
  std::size_t steps_per_epoch = 1;
  std::size_t current_step = 0;

  std::size_t warmup_steps() const { return warmup_epochs * steps_per_epoch; }
  std::size_t total_steps() const { return total_epochs * steps_per_epoch; }
};

double LrAt(const ScheduleState& schedule);

}  // namespace unlearn

#endif  // UNLEARN_OPTIM_H_
