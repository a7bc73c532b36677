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

#include "unlearn/mine.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "unlearn/error.h"
#include "unlearn/models.h"

namespace unlearn {

namespace {

void CheckBatch(const MiBatch& b) {
  if (b.z.rows() == 0) throw EstimationError("empty MINE batch");
  if (b.g.size() != b.z.rows() || b.g_bar.size() != b.z.rows()) {
    throw ShapeError("MINE batch row counts differ");
  }
}

// log mean exp(t) with max shift; also fills softmax weights.
double LogMeanExp(std::span<const double> t, std::vector<double>* weights) {
  const double m = *std::max_element(t.begin(), t.end());
  double s = 0.0;
  std::vector<double> e(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    e[i] = std::exp(t[i] - m);
    s += e[i];
  }
  if (weights != nullptr) {
    for (double& v : e) v /= s;
    *weights = std::move(e);
  }
  return m + std::log(s / static_cast<double>(t.size()));
}

}  // namespace

double MineValue(const ParameterSet& psi, const MiBatch& batch,
                 int num_groups) {
  CheckBatch(batch);
  const Matrix joint = TStatistic(psi, batch.z, batch.g, num_groups);
  const Matrix marginal = TStatistic(psi, batch.z, batch.g_bar, num_groups);
  const double mean_joint =
      std::accumulate(joint.data().begin(), joint.data().end(), 0.0) /
      static_cast<double>(joint.rows());
  return mean_joint - LogMeanExp(marginal.data(), nullptr);
}

MineGradient MineValueAndGrad(const ParameterSet& psi, const MiBatch& batch,
                              int num_groups) {
  CheckBatch(batch);
  const std::size_t n = batch.z.rows();
  const std::size_t zd = batch.z.cols();
  const MlpForward joint =
      ForwardMlp(psi, ConcatCols(batch.z, OneHotRows(batch.g, num_groups)));
  const MlpForward marginal =
      ForwardMlp(psi, ConcatCols(batch.z, OneHotRows(batch.g_bar, num_groups)));

  MineGradient out;
  const double mean_joint = std::accumulate(joint.outputs.data().begin(),
                                            joint.outputs.data().end(), 0.0) /
                            static_cast<double>(n);
  std::vector<double> weights;
  out.value = mean_joint - LogMeanExp(marginal.outputs.data(), &weights);

  Matrix up_joint(n, 1, 1.0 / static_cast<double>(n));
  Matrix up_marginal(n, 1);
  for (std::size_t i = 0; i < n; ++i) up_marginal(i, 0) = -weights[i];

  MlpBackward bj = BackwardMlp(psi, joint.cache, up_joint);
  MlpBackward bm = BackwardMlp(psi, marginal.cache, up_marginal);
  out.psi_grad = std::move(bj.grads);
  out.psi_grad.AddScaled(bm.grads, 1.0);
  out.z_grad = SliceCols(bj.input_grad, 0, zd);
  const Matrix zm = SliceCols(bm.input_grad, 0, zd);
  for (std::size_t i = 0; i < out.z_grad.size(); ++i) {
    out.z_grad.data()[i] += zm.data()[i];
  }
  return out;
}

std::vector<int> DrawMarginal(std::span<const int> groups, MarginalRule rule,
                              int num_groups, Rng& rng) {
  std::vector<int> out(groups.begin(), groups.end());
  if (rule == MarginalRule::kPermute) {
    std::shuffle(out.begin(), out.end(), rng);
  } else {
    std::uniform_int_distribution<int> u(0, num_groups - 1);
    for (int& g : out) g = u(rng);
  }
  return out;
}

std::vector<int> DrawMarginal(std::span<const int> groups, MarginalRule rule,
                              int num_groups, std::uint64_t seed) {
  Rng rng(seed);
  return DrawMarginal(groups, rule, num_groups, rng);
}

void TuneMineOnFeatures(ParameterSet& psi, const Matrix& features,
                        std::span<const int> groups, int num_groups,
                        const TuneMineOptions& options) {
  if (options.steps == 0) throw ConfigError("tune_mine needs at least 1 step");
  if (features.rows() == 0) throw EstimationError("no data to tune MINE on");
  Rng rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick(0, features.rows() - 1);
  std::vector<std::size_t> idx(options.batch_size);
  for (std::size_t step = 0; step < options.steps; ++step) {
    for (auto& i : idx) i = pick(rng);
    MiBatch batch;
    batch.z = features.GatherRows(idx);
    batch.g.resize(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) batch.g[k] = groups[idx[k]];
    batch.g_bar = DrawMarginal(batch.g, options.rule, num_groups, rng);
    MineGradient mg = MineValueAndGrad(psi, batch, num_groups);
    if (!std::isfinite(mg.value) || !mg.psi_grad.AllFinite()) {
      throw NumericError("non-finite MINE estimate at tuning step " +
                         std::to_string(step));
    }
    if (options.lr != 0.0) psi.AddScaled(mg.psi_grad, options.lr);
  }
}

void TuneMine(ParameterSet& psi, const ParameterSet& backbone,
              const GroupedDataset& data, const TuneMineOptions& options) {
  const Matrix z = ComputeFeatures(backbone, data.Features());
  const std::vector<int> g = data.Groups();
  TuneMineOnFeatures(psi, z, g, data.num_groups(), options);
}

double ExactDiscreteMi(const Matrix& joint) {
  double total = 0.0;
  for (double v : joint.data()) {
    if (v < 0.0) throw EstimationError("negative histogram entry");
    total += v;
  }
  if (!(total > 0.0)) throw EstimationError("histogram has no mass");
  std::vector<double> pz(joint.rows(), 0.0), pg(joint.cols(), 0.0);
  for (std::size_t i = 0; i < joint.rows(); ++i) {
    for (std::size_t j = 0; j < joint.cols(); ++j) {
      pz[i] += joint(i, j) / total;
      pg[j] += joint(i, j) / total;
    }
  }
  double mi = 0.0;
  for (std::size_t i = 0; i < joint.rows(); ++i) {
    for (std::size_t j = 0; j < joint.cols(); ++j) {
      const double p = joint(i, j) / total;
      if (p > 0.0) mi += p * std::log(p / (pz[i] * pg[j]));
    }
  }
  return mi;
}

}  // namespace unlearn
