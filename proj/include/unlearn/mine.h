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

#ifndef UNLEARN_MINE_H_
#define UNLEARN_MINE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "unlearn/data.h"
#include "unlearn/matrix.h"
#include "unlearn/mlp.h"
#include "unlearn/rng.h"

namespace unlearn {

// How the marginal group ḡ is drawn for the product-of-marginals term.
enum class MarginalRule {
  // ḡ i.i.d. uniform over [0, |G|).
  kUniformRandom,
  // ḡ is a seeded permutation of the batch's own groups.
  kPermute,
};

struct MiBatch {
  Matrix z;
  std::vector<int> g;
  std::vector<int> g_bar;
};

// Donsker-Varadhan estimate mean T(z,g) - log mean exp T(z,ḡ).
double MineValue(const ParameterSet& psi, const MiBatch& batch, int num_groups);

struct MineGradient {
  double value = 0.0;
  ParameterSet psi_grad;
  Matrix z_grad;
};

MineGradient MineValueAndGrad(const ParameterSet& psi, const MiBatch& batch,
                              int num_groups);

std::vector<int> DrawMarginal(std::span<const int> groups, MarginalRule rule,
                              int num_groups, Rng& rng);
std::vector<int> DrawMarginal(std::span<const int> groups, MarginalRule rule,
                              int num_groups, std::uint64_t seed);

struct TuneMineOptions {
  std::size_t steps = 100;
  std::size_t batch_size = 256;
  double lr = 0.05;
  MarginalRule rule = MarginalRule::kUniformRandom;
  std::uint64_t seed = 0;
};

// Gradient ascent on MineValue w.r.t. ψ with the backbone frozen. Batches are
// drawn uniformly with replacement from `data`.
void TuneMine(ParameterSet& psi, const ParameterSet& backbone,
              const GroupedDataset& data, const TuneMineOptions& options);

// Same, on precomputed features.
void TuneMineOnFeatures(ParameterSet& psi, const Matrix& features,
                        std::span<const int> groups, int num_groups,
                        const TuneMineOptions& options);

// Mutual information in nats of a joint histogram (rows: z buckets,
// columns: groups), with 0·ln 0 = 0.
double ExactDiscreteMi(const Matrix& joint_histogram);

}  // namespace unlearn

#endif  // UNLEARN_MINE_H_
