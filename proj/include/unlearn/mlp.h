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

#ifndef UNLEARN_MLP_H_
#define UNLEARN_MLP_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "unlearn/matrix.h"

namespace unlearn {

// One affine layer: y = x·W + b, W is (in × out).
struct Layer {
  std::string name;
  Matrix weight;
  std::vector<double> bias;

  std::size_t in_dim() const { return weight.rows(); }
  std::size_t out_dim() const { return weight.cols(); }
  bool operator==(const Layer&) const = default;
};

// Ordered collection of layers. Also used for gradients, momentum buffers
// and masks, which always mirror the shapes of the parameters they belong to.
struct ParameterSet {
  std::vector<Layer> layers;

  std::size_t ParameterCount() const;
  bool SameShape(const ParameterSet& other) const;
  bool AllFinite() const;
  ParameterSet ZerosLike() const;

  // Visits every scalar (weights row-major, then bias) in a fixed order.
  void ForEach(const std::function<void(double&)>& fn);
  void ForEach(const std::function<void(double)>& fn) const;

  // this += scale * other
  void AddScaled(const ParameterSet& other, double scale);

  bool operator==(const ParameterSet&) const = default;
};

// Builds a ReLU MLP with the given widths (dims[0] = input), He-uniform
// weights and zero biases, named "<prefix>.<index>".
ParameterSet InitMlp(const std::vector<std::size_t>& dims,
                     const std::string& prefix, std::uint64_t seed);

// Zero-valued MLP with the given widths.
ParameterSet ZeroMlp(const std::vector<std::size_t>& dims,
                     const std::string& prefix);

struct MlpCache {
  // layer_inputs[i] is the input fed to layer i; pre_activations[i] is its
  // affine output before the ReLU (the last layer has no ReLU).
  std::vector<Matrix> layer_inputs;
  std::vector<Matrix> pre_activations;
};

struct MlpForward {
  MlpCache cache;
  Matrix outputs;
};

struct MlpBackward {
  ParameterSet grads;
  Matrix input_grad;
};

// Hidden layers use ReLU, the final layer is affine.
MlpForward ForwardMlp(const ParameterSet& params, const Matrix& inputs);

// Exact reverse-mode gradients given d(loss)/d(outputs). ReLU uses the
// subgradient 0 at a zero pre-activation.
MlpBackward BackwardMlp(const ParameterSet& params, const MlpCache& cache,
                        const Matrix& upstream_grad);

}  // namespace unlearn

#endif  // UNLEARN_MLP_H_
