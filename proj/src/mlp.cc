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

#include "unlearn/mlp.h"

#include <cmath>

#include "unlearn/error.h"
#include "unlearn/rng.h"

namespace unlearn {

std::size_t ParameterSet::ParameterCount() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

bool ParameterSet::SameShape(const ParameterSet& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (!layers[i].weight.SameShape(other.layers[i].weight) ||
        layers[i].bias.size() != other.layers[i].bias.size()) {
      return false;
    }
  }
  return true;
}

bool ParameterSet::AllFinite() const {
  for (const auto& l : layers) {
    if (!l.weight.AllFinite()) return false;
    for (double b : l.bias) {
      if (!std::isfinite(b)) return false;
    }
  }
  return true;
}

ParameterSet ParameterSet::ZerosLike() const {
  ParameterSet out;
  out.layers.reserve(layers.size());
  for (const auto& l : layers) {
    out.layers.push_back({l.name, Matrix(l.weight.rows(), l.weight.cols()),
                          std::vector<double>(l.bias.size(), 0.0)});
  }
  return out;
}

void ParameterSet::ForEach(const std::function<void(double&)>& fn) {
  for (auto& l : layers) {
    for (double& w : l.weight.data()) fn(w);
    for (double& b : l.bias) fn(b);
  }
}

void ParameterSet::ForEach(const std::function<void(double)>& fn) const {
  for (const auto& l : layers) {
    for (double w : l.weight.data()) fn(w);
    for (double b : l.bias) fn(b);
  }
}

void ParameterSet::AddScaled(const ParameterSet& other, double scale) {
  if (!SameShape(other)) throw ShapeError("parameter set shape mismatch");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    auto& w = layers[i].weight.data();
    const auto& ow = other.layers[i].weight.data();
    for (std::size_t k = 0; k < w.size(); ++k) w[k] += scale * ow[k];
    auto& b = layers[i].bias;
    const auto& ob = other.layers[i].bias;
    for (std::size_t k = 0; k < b.size(); ++k) b[k] += scale * ob[k];
  }
}

ParameterSet ZeroMlp(const std::vector<std::size_t>& dims,
                     const std::string& prefix) {
  if (dims.size() < 2) throw ShapeError("an MLP needs at least two widths");
  ParameterSet p;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    p.layers.push_back({prefix + "." + std::to_string(i),
                        Matrix(dims[i], dims[i + 1]),
                        std::vector<double>(dims[i + 1], 0.0)});
  }
  return p;
}

ParameterSet InitMlp(const std::vector<std::size_t>& dims,
                     const std::string& prefix, std::uint64_t seed) {
  ParameterSet p = ZeroMlp(dims, prefix);
  Rng rng(DeriveSeed(seed, "init:" + prefix));
  for (auto& l : p.layers) {
    const double bound = std::sqrt(6.0 / static_cast<double>(l.in_dim()));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (double& w : l.weight.data()) w = u(rng);
  }
  return p;
}

MlpForward ForwardMlp(const ParameterSet& params, const Matrix& inputs) {
  if (params.layers.empty()) throw ShapeError("empty MLP");
  MlpForward out;
  Matrix current = inputs;
  const std::size_t depth = params.layers.size();
  for (std::size_t i = 0; i < depth; ++i) {
    const Layer& l = params.layers[i];
    if (current.cols() != l.in_dim()) {
      throw ShapeError("layer " + l.name + " expects " +
                       std::to_string(l.in_dim()) + " inputs, got " +
                       ShapeString(current));
    }
    Matrix pre = MatMul(current, l.weight);
    for (std::size_t r = 0; r < pre.rows(); ++r) {
      auto row = pre.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) row[c] += l.bias[c];
    }
    out.cache.layer_inputs.push_back(std::move(current));
    if (i + 1 < depth) {
      current = pre;
      for (double& v : current.data()) v = v > 0.0 ? v : 0.0;
    } else {
      out.outputs = pre;
    }
    out.cache.pre_activations.push_back(std::move(pre));
  }
  return out;
}

MlpBackward BackwardMlp(const ParameterSet& params, const MlpCache& cache,
                        const Matrix& upstream_grad) {
  const std::size_t depth = params.layers.size();
  if (cache.layer_inputs.size() != depth ||
      cache.pre_activations.size() != depth) {
    throw ShapeError("stale MLP cache: depth mismatch");
  }
  if (!upstream_grad.SameShape(cache.pre_activations.back())) {
    throw ShapeError("upstream gradient " + ShapeString(upstream_grad) +
                     " does not match outputs " +
                     ShapeString(cache.pre_activations.back()));
  }
  MlpBackward out;
  out.grads = params.ZerosLike();
  Matrix delta = upstream_grad;
  for (std::size_t k = depth; k-- > 0;) {
    const Layer& l = params.layers[k];
    const Matrix& input = cache.layer_inputs[k];
    if (input.cols() != l.in_dim() ||
        cache.pre_activations[k].cols() != l.out_dim()) {
      throw ShapeError("stale MLP cache at layer " + l.name);
    }
    Layer& g = out.grads.layers[k];
    g.weight = MatMulTransposeA(input, delta);
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      auto row = delta.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) g.bias[c] += row[c];
    }
    Matrix input_grad = MatMulTransposeB(delta, l.weight);
    if (k > 0) {
      const Matrix& pre = cache.pre_activations[k - 1];
      for (std::size_t i = 0; i < input_grad.size(); ++i) {
        if (!(pre.data()[i] > 0.0)) input_grad.data()[i] = 0.0;
      }
    }
    delta = std::move(input_grad);
  }
  out.input_grad = std::move(delta);
  return out;
}

}  // namespace unlearn
