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

#ifndef UNLEARN_LOSS_H_
#define UNLEARN_LOSS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "unlearn/matrix.h"
#include "unlearn/mlp.h"

namespace unlearn {

struct LossAndGrad {
  double loss = 0.0;
  Matrix grad;
};

// Mean negative log-likelihood in nats. With sample_weights, the loss is
// (1/n)·Σ wᵢ·ℓᵢ.
LossAndGrad SoftmaxCrossEntropy(const Matrix& logits,
                                std::span<const int> targets,
                                std::span<const double> sample_weights = {});

// Per-row cross-entropy values (no reduction).
std::vector<double> PerExampleCrossEntropy(const Matrix& logits,
                                           std::span<const int> targets);

// Row-wise softmax with max subtraction.
Matrix Softmax(const Matrix& logits);

// Mean over rows of KL(softmax(reference) ‖ softmax(logits)); gradient is
// taken w.r.t. logits only.
LossAndGrad KlDivergence(const Matrix& reference_logits, const Matrix& logits);

// Mean squared error between two scalars: (a - b)²; grad is d/da.
struct ScalarLoss {
  double loss = 0.0;
  double grad = 0.0;
};
ScalarLoss SquaredDifference(double a, double b);

// strength · Σ|p| with subgradient strength·sign(p) (0 at p = 0).
struct PenaltyAndGrad {
  double penalty = 0.0;
  ParameterSet grad;
};
PenaltyAndGrad L1Penalty(const ParameterSet& params, double strength);

}  // namespace unlearn

#endif  // UNLEARN_LOSS_H_
