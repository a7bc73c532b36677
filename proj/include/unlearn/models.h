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

#ifndef UNLEARN_MODELS_H_
#define UNLEARN_MODELS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "unlearn/matrix.h"
#include "unlearn/mlp.h"
#include "unlearn/optim.h"

namespace unlearn {

struct ModelShape {
  std::size_t input_dim = 16;
  std::size_t hidden_dim = 64;
  std::size_t feature_dim = 16;
  int num_classes = 2;
  int num_groups = 4;
  std::size_t mine_hidden = 100;

  std::vector<std::size_t> BackboneDims() const {
    return {input_dim, hidden_dim, feature_dim};
  }
  std::vector<std::size_t> HeadDims() const {
    return {feature_dim, static_cast<std::size_t>(num_classes)};
  }
  std::vector<std::size_t> MineDims() const {
    return {feature_dim + static_cast<std::size_t>(num_groups), mine_hidden, 1};
  }
  std::vector<std::size_t> ProbeDims() const {
    return {feature_dim, static_cast<std::size_t>(num_groups)};
  }
};

enum class CheckpointRole : std::uint32_t {
  kInitial = 0,
  kPretrained = 1,
  kRetrained = 2,
  kUnlearned = 3,
};
std::string CheckpointRoleName(CheckpointRole role);

// Feature extractor θ (input → hidden → features, ReLU hidden) plus linear
// classifier head φ.
struct ModelCheckpoint {
  ParameterSet backbone;
  ParameterSet head;
  CheckpointRole role = CheckpointRole::kInitial;
  std::uint64_t config_hash = 0;

  bool operator==(const ModelCheckpoint&) const = default;
};

ModelCheckpoint InitCheckpoint(const ModelShape& shape, std::uint64_t seed);

// Deep copy; the result shares no storage with the source.
ModelCheckpoint CheckpointClone(const ModelCheckpoint& ckpt);

// z = f_θ(x).
Matrix ComputeFeatures(const ParameterSet& backbone, const Matrix& x);
Matrix ComputeLogits(const ModelCheckpoint& ckpt, const Matrix& x);

struct ClassifierForward {
  MlpForward backbone;
  MlpForward head;
  const Matrix& logits() const { return head.outputs; }
  const Matrix& features() const { return backbone.outputs; }
};

ClassifierForward ForwardClassifier(const ModelCheckpoint& ckpt, const Matrix& x);

struct ModelGrads {
  ParameterSet backbone;
  ParameterSet head;
};

// Backpropagates d(loss)/d(logits) through head and backbone. An optional
// extra_feature_grad (d(loss)/dz from other terms) is added at the features.
ModelGrads BackwardClassifier(const ModelCheckpoint& ckpt,
                              const ClassifierForward& pass,
                              const Matrix& logits_grad,
                              const Matrix* extra_feature_grad = nullptr);

// Gradient with respect to θ only, from d(loss)/dz.
ParameterSet BackwardFeatures(const ModelCheckpoint& ckpt,
                              const MlpForward& backbone_pass,
                              const Matrix& feature_grad);

// Momentum SGD over both parts of a checkpoint.
class ModelOptimizer {
 public:
  ModelOptimizer(const ModelCheckpoint& ckpt, double momentum,
                 double weight_decay);

  void Step(ModelCheckpoint& ckpt, const ModelGrads& grads, double lr,
            const ModelGrads* mask = nullptr);
  void StepBackbone(ModelCheckpoint& ckpt, const ParameterSet& grads, double lr,
                    const ParameterSet* mask = nullptr);

 private:
  SgdOptimizer backbone_;
  SgdOptimizer head_;
};

std::vector<double> OneHot(int index, int n);
Matrix OneHotRows(std::span<const int> indices, int n);
// Index of the single 1 in a one-hot row; throws IndexError otherwise.
int OneHotIndex(std::span<const double> row);

// T_ψ(z, g) = MLP([z ; one_hot(g)]) for each row, as an n×1 matrix.
Matrix TStatistic(const ParameterSet& psi, const Matrix& z,
                  std::span<const int> groups, int num_groups);

// Binary checkpoint format: magic, role, config hash, then the backbone and
// head layer lists (name, shape, row-major doubles).
void SaveCheckpoint(const ModelCheckpoint& ckpt, const std::string& path);
ModelCheckpoint LoadCheckpoint(const std::string& path);
std::string SerializeCheckpoint(const ModelCheckpoint& ckpt);
ModelCheckpoint DeserializeCheckpoint(const std::string& bytes);

}  // namespace unlearn

#endif  // UNLEARN_MODELS_H_
