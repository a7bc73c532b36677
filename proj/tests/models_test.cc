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

#include <cstdio>
#include <filesystem>
#include <vector>

#include <gtest/gtest.h>

#include "gradient_check.h"
#include "unlearn/error.h"
#include "unlearn/loss.h"
#include "unlearn/models.h"
#include "unlearn/rng.h"

namespace unlearn {
namespace {

using testing::MaxRelativeError;

Matrix RandomMatrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> n;
  Matrix m(r, c);
  for (double& v : m.data()) v = n(rng);
  return m;
}

ModelShape SmallShape() {
  ModelShape s;
  s.input_dim = 4;
  s.hidden_dim = 6;
  s.feature_dim = 3;
  s.num_classes = 2;
  s.num_groups = 4;
  return s;
}

TEST(ModelsTest, ShapesFollowConfiguration) {
  const ModelShape s;
  const ModelCheckpoint c = InitCheckpoint(s, 1);
  ASSERT_EQ(c.backbone.layers.size(), 2u);
  ASSERT_EQ(c.head.layers.size(), 1u);
  EXPECT_EQ(c.backbone.layers[0].in_dim(), 16u);
  EXPECT_EQ(c.backbone.layers[1].out_dim(), 16u);
  EXPECT_EQ(c.head.layers[0].out_dim(), 2u);
  EXPECT_EQ(s.MineDims(), (std::vector<std::size_t>{20, 100, 1}));
  EXPECT_EQ(s.ProbeDims(), (std::vector<std::size_t>{16, 4}));
}

TEST(ModelsTest, CloneIsDeep) {
  const ModelCheckpoint a = InitCheckpoint(SmallShape(), 2);
  ModelCheckpoint b = CheckpointClone(a);
  EXPECT_EQ(a, b);
  b.head.layers[0].weight(0, 0) += 1.0;
  EXPECT_NE(a, b);
}

TEST(ModelsTest, LogitsEqualHeadOfFeatures) {
  const ModelCheckpoint c = InitCheckpoint(SmallShape(), 3);
  const Matrix x = RandomMatrix(5, 4, 4);
  const Matrix z = ComputeFeatures(c.backbone, x);
  const Matrix direct = ComputeLogits(c, x);
  const ClassifierForward f = ForwardClassifier(c, x);
  EXPECT_EQ(f.features(), z);
  EXPECT_EQ(f.logits(), direct);
  EXPECT_THROW(ComputeLogits(c, RandomMatrix(2, 5, 1)), ShapeError);
}

TEST(ModelsTest, ClassifierGradientMatchesFiniteDifferences) {
  ModelCheckpoint c = InitCheckpoint(SmallShape(), 5);
  const Matrix x = RandomMatrix(7, 4, 6);
  const std::vector<int> y = {0, 1, 1, 0, 1, 0, 0};
  const Matrix extra = RandomMatrix(7, 3, 7);
  // loss = CE(logits) + Σ extra ⊙ z.
  auto loss = [&] {
    const ClassifierForward f = ForwardClassifier(c, x);
    double s = SoftmaxCrossEntropy(f.logits(), y).loss;
    for (std::size_t i = 0; i < extra.size(); ++i) {
      s += extra.data()[i] * f.features().data()[i];
    }
    return s;
  };
  const ClassifierForward f = ForwardClassifier(c, x);
  const ModelGrads g =
      BackwardClassifier(c, f, SoftmaxCrossEntropy(f.logits(), y).grad, &extra);
  std::vector<double*> coords;
  std::vector<double> analytic;
  c.backbone.ForEach([&](double& v) { coords.push_back(&v); });
  c.head.ForEach([&](double& v) { coords.push_back(&v); });
  g.backbone.ForEach([&](double v) { analytic.push_back(v); });
  g.head.ForEach([&](double v) { analytic.push_back(v); });
  EXPECT_LT(MaxRelativeError(coords, analytic, loss), 1e-4);
}

TEST(ModelsTest, BackwardFeaturesMatchesFullBackwardWithZeroLogitGrad) {
  const ModelCheckpoint c = InitCheckpoint(SmallShape(), 8);
  const Matrix x = RandomMatrix(4, 4, 9);
  const ClassifierForward f = ForwardClassifier(c, x);
  const Matrix fg = RandomMatrix(4, 3, 10);
  const ModelGrads full = BackwardClassifier(c, f, Matrix(4, 2), &fg);
  EXPECT_EQ(BackwardFeatures(c, f.backbone, fg), full.backbone);
}

TEST(ModelsTest, OneHotHelpers) {
  EXPECT_EQ(OneHot(2, 4), (std::vector<double>{0, 0, 1, 0}));
  EXPECT_THROW(OneHot(4, 4), IndexError);
  const std::vector<int> g = {3, 0};
  const Matrix m = OneHotRows(g, 4);
  EXPECT_EQ(OneHotIndex(m.row(0)), 3);
  EXPECT_EQ(OneHotIndex(m.row(1)), 0);
  const std::vector<double> bad = {1, 1, 0};
  EXPECT_THROW(OneHotIndex(bad), IndexError);
}

TEST(ModelsTest, TStatisticConcatenatesOneHot) {
  const ModelShape s = SmallShape();
  const ParameterSet psi = InitMlp(s.MineDims(), "mine", 3);
  const Matrix z = RandomMatrix(3, 3, 4);
  const std::vector<int> g = {1, 2, 0};
  const Matrix t = TStatistic(psi, z, g, 4);
  const Matrix ref = ForwardMlp(psi, ConcatCols(z, OneHotRows(g, 4))).outputs;
  EXPECT_EQ(t, ref);
  EXPECT_EQ(t.cols(), 1u);
}

TEST(ModelsTest, CheckpointRoundTripsBitExactly) {
  ModelCheckpoint c = InitCheckpoint(SmallShape(), 11);
  c.role = CheckpointRole::kUnlearned;
  c.config_hash = 0xfeedbeefULL;
  c.head.layers[0].bias[1] = -0.1234567890123456789;
  EXPECT_EQ(DeserializeCheckpoint(SerializeCheckpoint(c)), c);
  const auto path =
      (std::filesystem::temp_directory_path() / "unlearn_models_test.ckpt").string();
  SaveCheckpoint(c, path);
  EXPECT_EQ(LoadCheckpoint(path), c);
  std::remove(path.c_str());
}

TEST(ModelsTest, CorruptCheckpointsAreRejected) {
  const std::string good = SerializeCheckpoint(InitCheckpoint(SmallShape(), 1));
  EXPECT_THROW(DeserializeCheckpoint("nonsense"), IoError);
  EXPECT_THROW(DeserializeCheckpoint(good.substr(0, good.size() - 3)), IoError);
  EXPECT_THROW(DeserializeCheckpoint(good + "x"), IoError);
  EXPECT_THROW(LoadCheckpoint("/nonexistent/dir/model.ckpt"), IoError);
}

TEST(ModelsTest, OptimizerBackboneStepLeavesHeadAlone) {
  ModelCheckpoint c = InitCheckpoint(SmallShape(), 12);
  const ModelCheckpoint before = c;
  ModelOptimizer opt(c, 0.9, 0.0);
  ParameterSet g = c.backbone.ZerosLike();
  g.ForEach([](double& v) { v = 1.0; });
  opt.StepBackbone(c, g, 0.1);
  EXPECT_EQ(c.head, before.head);
  EXPECT_NE(c.backbone, before.backbone);
}

}  // namespace
}  // namespace unlearn
