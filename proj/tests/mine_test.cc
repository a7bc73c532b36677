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

#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "gradient_check.h"
#include "unlearn/error.h"
#include "unlearn/mine.h"
#include "unlearn/models.h"

namespace unlearn {
namespace {

using testing::MaxRelativeError;

MiBatch RandomBatch(std::size_t n, std::size_t zd, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> ug(0, 3);
  MiBatch b{Matrix(n, zd), std::vector<int>(n), std::vector<int>(n)};
  for (double& v : b.z.data()) v = nd(rng);
  for (std::size_t i = 0; i < n; ++i) {
    b.g[i] = ug(rng);
    b.g_bar[i] = ug(rng);
  }
  return b;
}

// z = one_hot(g) with uniform groups.
void DeterministicSample(std::size_t n, std::uint64_t seed, Matrix& z,
                         std::vector<int>& g) {
  Rng rng(seed);
  std::uniform_int_distribution<int> ug(0, 3);
  z = Matrix(n, 4);
  g.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = ug(rng);
    z(i, g[i]) = 1.0;
  }
}

TEST(MineTest, ConstantStatisticGivesZero) {
  ParameterSet psi = ZeroMlp({7, 5, 1}, "mine");
  psi.layers[1].bias[0] = 3.7;
  EXPECT_NEAR(MineValue(psi, RandomBatch(9, 3, 1), 4), 0.0, 1e-14);
}

TEST(MineTest, ValueMatchesDefinition) {
  const ParameterSet psi = InitMlp({7, 5, 1}, "mine", 2);
  const MiBatch b = RandomBatch(6, 3, 3);
  const Matrix tj = TStatistic(psi, b.z, b.g, 4);
  const Matrix tm = TStatistic(psi, b.z, b.g_bar, 4);
  double mean = 0.0, lme = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    mean += tj(i, 0) / 6.0;
    lme += std::exp(tm(i, 0)) / 6.0;
  }
  EXPECT_NEAR(MineValue(psi, b, 4), mean - std::log(lme), 1e-12);
}

TEST(MineTest, StableForLargeStatistics) {
  ParameterSet psi = ZeroMlp({7, 5, 1}, "mine");
  psi.layers[1].bias[0] = 800.0;
  const MineGradient g = MineValueAndGrad(psi, RandomBatch(5, 3, 4), 4);
  EXPECT_TRUE(std::isfinite(g.value));
  EXPECT_TRUE(g.psi_grad.AllFinite());
}

TEST(MineTest, GradientsMatchFiniteDifferences) {
  ParameterSet psi = InitMlp({7, 9, 1}, "mine", 5);
  MiBatch b = RandomBatch(8, 3, 6);
  const MineGradient g = MineValueAndGrad(psi, b, 4);
  auto loss = [&] { return MineValue(psi, b, 4); };
  std::vector<double*> coords;
  std::vector<double> analytic;
  psi.ForEach([&](double& v) { coords.push_back(&v); });
  g.psi_grad.ForEach([&](double v) { analytic.push_back(v); });
  EXPECT_LT(MaxRelativeError(coords, analytic, loss), 1e-4);
  std::vector<double*> zc;
  for (double& v : b.z.data()) zc.push_back(&v);
  EXPECT_LT(MaxRelativeError(zc, g.z_grad.data(), loss), 1e-4);
}

TEST(MineTest, MalformedBatchesThrow) {
  const ParameterSet psi = InitMlp({7, 5, 1}, "mine", 1);
  MiBatch empty{Matrix(0, 3), {}, {}};
  EXPECT_THROW(MineValue(psi, empty, 4), EstimationError);
  MiBatch ragged = RandomBatch(4, 3, 1);
  ragged.g_bar.pop_back();
  EXPECT_THROW(MineValue(psi, ragged, 4), ShapeError);
}

TEST(MineTest, MarginalRules) {
  const std::vector<int> g = {0, 0, 1, 2, 3, 3, 3};
  std::vector<int> perm = DrawMarginal(g, MarginalRule::kPermute, 4, 5);
  std::sort(perm.begin(), perm.end());
  EXPECT_EQ(perm, g);
  const std::vector<int> uni = DrawMarginal(g, MarginalRule::kUniformRandom, 4, 5);
  for (int v : uni) {
    EXPECT_GE(v, 0);
    EXPECT_LT(v, 4);
  }
  EXPECT_EQ(uni, DrawMarginal(g, MarginalRule::kUniformRandom, 4, 5));
}

TEST(MineTest, TuningIsSeededAndValidated) {
  Matrix z;
  std::vector<int> g;
  DeterministicSample(200, 1, z, g);
  ParameterSet a = InitMlp({8, 16, 1}, "mine", 1);
  ParameterSet b = a;
  TuneMineOptions o;
  o.steps = 20;
  o.batch_size = 32;
  TuneMineOnFeatures(a, z, g, 4, o);
  TuneMineOnFeatures(b, z, g, 4, o);
  EXPECT_EQ(a, b);
  o.steps = 0;
  EXPECT_THROW(TuneMineOnFeatures(a, z, g, 4, o), ConfigError);
}

TEST(MineTest, TuningRaisesEstimateOnDependentData) {
  Matrix z;
  std::vector<int> g;
  DeterministicSample(2000, 2, z, g);
  ParameterSet psi = InitMlp({8, 50, 1}, "mine", 3);
  const MiBatch eval{z, g, DrawMarginal(g, MarginalRule::kUniformRandom, 4, 9)};
  const double before = MineValue(psi, eval, 4);
  TuneMineOptions o;
  o.steps = 300;
  o.lr = 0.1;
  TuneMineOnFeatures(psi, z, g, 4, o);
  const double after = MineValue(psi, eval, 4);
  EXPECT_GT(after, before + 0.5);
  EXPECT_LE(after, std::log(4.0) + 0.05);
}

TEST(ExactMiTest, KnownTables) {
  EXPECT_NEAR(ExactDiscreteMi(Matrix(2, 2, {0.5, 0, 0, 0.5})), std::log(2.0), 1e-15);
  EXPECT_NEAR(ExactDiscreteMi(Matrix(2, 2, {0.25, 0.25, 0.25, 0.25})), 0.0, 1e-15);
  // Unnormalized counts are accepted.
  EXPECT_NEAR(ExactDiscreteMi(Matrix(2, 2, {3, 0, 0, 3})), std::log(2.0), 1e-15);
  // Binary symmetric channel with flip 0.1: ln2 - H(0.1).
  const double h = -(0.1 * std::log(0.1) + 0.9 * std::log(0.9));
  EXPECT_NEAR(ExactDiscreteMi(Matrix(2, 2, {0.45, 0.05, 0.05, 0.45})),
              std::log(2.0) - h, 1e-14);
  EXPECT_THROW(ExactDiscreteMi(Matrix(2, 2, 0.0)), EstimationError);
  EXPECT_THROW(ExactDiscreteMi(Matrix(1, 2, {-1, 2})), EstimationError);
}

}  // namespace
}  // namespace unlearn
