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

#include "unlearn/loss.h"

#include <algorithm>
#include <cmath>

#include "unlearn/error.h"

namespace unlearn {

namespace {

void CheckTargets(const Matrix& logits, std::span<const int> targets) {
  if (targets.size() != logits.rows()) {
    throw ShapeError("target count does not match logits rows");
  }
  for (int t : targets) {
    if (t < 0 || static_cast<std::size_t>(t) >= logits.cols()) {
      throw IndexError("target " + std::to_string(t) + " out of range [0, " +
                       std::to_string(logits.cols()) + ")");
    }
  }
}

// log Σ exp(row) with max shift.
double LogSumExp(std::span<const double> row) {
  const double m = *std::max_element(row.begin(), row.end());
  double s = 0.0;
  for (double v : row) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace

Matrix Softmax(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto in = logits.row(i);
    auto out = p.row(i);
    const double m = *std::max_element(in.begin(), in.end());
    double s = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      out[c] = std::exp(in[c] - m);
      s += out[c];
    }
    for (double& v : out) v /= s;
  }
  return p;
}

std::vector<double> PerExampleCrossEntropy(const Matrix& logits,
                                           std::span<const int> targets) {
  CheckTargets(logits, targets);
  std::vector<double> out(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    out[i] = LogSumExp(logits.row(i)) - logits(i, targets[i]);
  }
  return out;
}

LossAndGrad SoftmaxCrossEntropy(const Matrix& logits,
                                std::span<const int> targets,
                                std::span<const double> sample_weights) {
  CheckTargets(logits, targets);
  if (logits.rows() == 0) throw ShapeError("empty batch");
  if (!sample_weights.empty() && sample_weights.size() != logits.rows()) {
    throw ShapeError("sample weight count does not match batch");
  }
  const double n = static_cast<double>(logits.rows());
  LossAndGrad out;
  out.grad = Softmax(logits);
  const std::vector<double> per = PerExampleCrossEntropy(logits, targets);
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const double w = sample_weights.empty() ? 1.0 : sample_weights[i];
    out.loss += w * per[i];
    auto g = out.grad.row(i);
    g[targets[i]] -= 1.0;
    for (double& v : g) v = v * w / n;
  }
  out.loss /= n;
  return out;
}

LossAndGrad KlDivergence(const Matrix& reference_logits, const Matrix& logits) {
  if (!reference_logits.SameShape(logits)) {
    throw ShapeError("KL logits shape mismatch");
  }
  if (logits.rows() == 0) throw ShapeError("empty batch");
  const double n = static_cast<double>(logits.rows());
  const Matrix p_ref = Softmax(reference_logits);
  const Matrix p = Softmax(logits);
  LossAndGrad out;
  out.grad = Matrix(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const double lse_ref = LogSumExp(reference_logits.row(i));
    const double lse = LogSumExp(logits.row(i));
    for (std::size_t c = 0; c < logits.cols(); ++c) {
      const double pr = p_ref(i, c);
      if (pr > 0.0) {
        out.loss += pr * ((reference_logits(i, c) - lse_ref) -
                          (logits(i, c) - lse));
      }
      out.grad(i, c) = (p(i, c) - pr) / n;
    }
  }
  out.loss /= n;
  return out;
}

ScalarLoss SquaredDifference(double a, double b) {
  const double d = a - b;
  return {d * d, 2.0 * d};
}

PenaltyAndGrad L1Penalty(const ParameterSet& params, double strength) {
  PenaltyAndGrad out;
  out.grad = params.ZerosLike();
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const auto& w = params.layers[i].weight.data();
    auto& gw = out.grad.layers[i].weight.data();
    for (std::size_t k = 0; k < w.size(); ++k) {
      out.penalty += std::abs(w[k]);
      gw[k] = w[k] > 0.0 ? strength : (w[k] < 0.0 ? -strength : 0.0);
    }
    const auto& b = params.layers[i].bias;
    auto& gb = out.grad.layers[i].bias;
    for (std::size_t k = 0; k < b.size(); ++k) {
      out.penalty += std::abs(b[k]);
      gb[k] = b[k] > 0.0 ? strength : (b[k] < 0.0 ? -strength : 0.0);
    }
  }
  out.penalty *= strength;
  return out;
}

}  // namespace unlearn
