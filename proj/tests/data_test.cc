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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "unlearn/data.h"
#include "unlearn/error.h"
#include "unlearn/loss.h"
#include "unlearn/metrics.h"
#include "unlearn/mlp.h"
#include "unlearn/optim.h"

namespace unlearn {
namespace {

// `counts[g]` examples of each group with a scalar feature equal to g.
GroupedDataset MakeGroups(const std::vector<std::size_t>& counts) {
  GroupedDataset ds;
  for (int g = 0; g < static_cast<int>(counts.size()); ++g) {
    for (std::size_t k = 0; k < counts[g]; ++k) {
      LabeledExample e;
      e.id = ds.examples.size();
      e.x = {static_cast<double>(g)};
      e.y = GroupLabel(g, 2);
      e.a = GroupAttr(g, 2);
      e.g = g;
      ds.examples.push_back(e);
    }
  }
  return ds;
}

std::vector<double> GroupMass(const GroupedDataset& ds,
                              const std::vector<double>& p) {
  std::vector<double> mass(ds.num_groups(), 0.0);
  for (std::size_t i = 0; i < ds.size(); ++i) mass[ds.examples[i].g] += p[i];
  return mass;
}

TEST(GroupIndexTest, IsBijective) {
  for (int y = 0; y < 3; ++y) {
    for (int a = 0; a < 4; ++a) {
      const int g = GroupIndex(y, a, 4);
      EXPECT_EQ(GroupLabel(g, 4), y);
      EXPECT_EQ(GroupAttr(g, 4), a);
    }
  }
}

TEST(SyntheticTest, IdenticalSeedsGiveIdenticalData) {
  SyntheticConfig c;
  c.n_train = 300;
  c.n_val = 50;
  c.n_test = 50;
  c.seed = 9;
  const DatasetSplits a = GenerateSynthetic(c);
  const DatasetSplits b = GenerateSynthetic(c);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  c.seed = 10;
  EXPECT_NE(GenerateSynthetic(c).train, a.train);
}

TEST(SyntheticTest, GroupSizesFollowLargestRemainder) {
  SyntheticConfig c;
  c.proportions = {0.44, 0.41, 0.142, 0.008};
  c.n_train = 1000;
  c.n_val = 130;
  c.n_test = 77;
  const DatasetSplits s = GenerateSynthetic(c);
  EXPECT_EQ(GroupFrequencies(s.train).counts,
            (std::vector<std::size_t>{440, 410, 142, 8}));
  // 130 · p = 57.2, 53.3, 18.46, 1.04 → floors 57, 53, 18, 1 and one unit to
  // the largest remainder (18.46).
  EXPECT_EQ(GroupFrequencies(s.val).counts,
            (std::vector<std::size_t>{57, 53, 19, 1}));
  const auto test_counts = GroupFrequencies(s.test).counts;
  EXPECT_GE(test_counts[3], 1u);
  EXPECT_EQ(std::accumulate(test_counts.begin(), test_counts.end(), 0u), 77u);
}

TEST(SyntheticTest, LargestRemainderTiesGoToLowerIndex) {
  const std::vector<double> p = {0.25, 0.25, 0.25, 0.25};
  EXPECT_EQ(LargestRemainder(p, 6), (std::vector<std::size_t>{2, 2, 1, 1}));
}

TEST(SyntheticTest, ProportionsMustSumToOne) {
  SyntheticConfig c;
  c.proportions = {0.5, 0.3, 0.1, 0.05};
  EXPECT_THROW(GenerateSynthetic(c), ConfigError);
  c.proportions = {0.5, 0.5, 0.0};
  EXPECT_THROW(GenerateSynthetic(c), ConfigError);
  c.proportions = {0.25, 0.25, 0.25, 0.25};
  c.noise = 0.0;
  EXPECT_THROW(GenerateSynthetic(c), ConfigError);
}

TEST(SyntheticTest, LabelsAndGroupsAreConsistent) {
  SyntheticConfig c;
  c.n_train = 500;
  const DatasetSplits s = GenerateSynthetic(c);
  std::set<std::size_t> ids;
  for (const auto& e : s.train.examples) {
    EXPECT_EQ(e.g, GroupIndex(e.y, e.a, 2));
    EXPECT_EQ(e.x.size(), c.feature_dim);
    ids.insert(e.id);
  }
  EXPECT_EQ(ids.size(), s.train.size());
}

// Without spurious strength the attribute is invisible in x, so a linear
// probe for a stays near chance.
TEST(SyntheticTest, NoSpuriousSignalMeansChanceAttributeProbe) {
  SyntheticConfig c;
  c.spurious = 0.0;
  c.proportions = {0.25, 0.25, 0.25, 0.25};
  c.n_train = 4000;
  c.n_test = 2000;
  c.seed = 3;
  const DatasetSplits s = GenerateSynthetic(c);
  std::vector<int> a_train, a_test;
  for (const auto& e : s.train.examples) a_train.push_back(e.a);
  for (const auto& e : s.test.examples) a_test.push_back(e.a);
  const Matrix x_train = s.train.Features();
  ParameterSet probe = InitMlp({c.feature_dim, 2}, "probe", 1);
  SgdOptimizer opt(probe, 0.9, 0.0);
  for (int step = 0; step < 300; ++step) {
    const MlpForward f = ForwardMlp(probe, x_train);
    const LossAndGrad ce = SoftmaxCrossEntropy(f.outputs, a_train);
    opt.Step(probe, BackwardMlp(probe, f.cache, ce.grad).grads, 0.05);
  }
  const std::vector<int> pred =
      ArgmaxRows(ForwardMlp(probe, s.test.Features()).outputs);
  EXPECT_LE(AccuracyFromPredictions(pred, a_test), 55.0);
}

TEST(GroupStatsTest, CountsGroups) {
  EXPECT_EQ(GroupFrequencies(MakeGroups({0, 0, 0, 0})).counts,
            (std::vector<std::size_t>{0, 0, 0, 0}));
  const GroupedDataset ds = MakeGroups({100, 100, 100, 100});
  EXPECT_EQ(GroupFrequencies(ds).counts,
            (std::vector<std::size_t>{100, 100, 100, 100}));
  const ForgetSplit s = SplitForget(ds, ForgetSpec{{{0, 0.5}}}, 1);
  EXPECT_EQ(GroupFrequencies(s.remaining).counts,
            (std::vector<std::size_t>{50, 100, 100, 100}));
}

TEST(SplitForgetTest, ZeroRatioLeavesTrainIntact) {
  const GroupedDataset ds = MakeGroups({10, 20, 30, 40});
  const ForgetSplit s = SplitForget(ds, ForgetSpec{{{1, 0.0}, {2, 0.0}}}, 4);
  EXPECT_TRUE(s.forget.empty());
  EXPECT_EQ(s.remaining.examples, ds.examples);
}

TEST(SplitForgetTest, RoundsHalfUpAndPartitions) {
  const GroupedDataset ds = MakeGroups({7, 20, 30, 5});
  const ForgetSplit s = SplitForget(ds, ForgetSpec{{{0, 0.5}, {3, 0.9}}}, 5);
  const auto f = GroupFrequencies(s.forget).counts;
  EXPECT_EQ(f[0], 4u);  // 3.5 → 4
  EXPECT_EQ(f[3], 5u);  // 4.5 → 5
  std::set<std::size_t> ids;
  for (const auto& e : s.forget.examples) ids.insert(e.id);
  for (const auto& e : s.remaining.examples) {
    EXPECT_FALSE(ids.count(e.id));
    ids.insert(e.id);
  }
  EXPECT_EQ(ids.size(), ds.size());
  EXPECT_EQ(s.forget.role, DatasetRole::kForget);
  EXPECT_EQ(s.remaining.role, DatasetRole::kRemaining);
  EXPECT_TRUE(std::is_sorted(
      s.remaining.examples.begin(), s.remaining.examples.end(),
      [](const auto& l, const auto& r) { return l.id < r.id; }));
}

TEST(SplitForgetTest, NineGroupSpecCountsAddUp) {
  GroupedDataset ds;
  std::vector<std::size_t> counts = {11, 24, 35, 8, 13, 50, 9, 31, 17};
  for (int g = 0; g < 9; ++g) {
    for (std::size_t k = 0; k < counts[g]; ++k) {
      LabeledExample e;
      e.id = ds.examples.size();
      e.x = {0.0};
      e.y = GroupLabel(g, 3);
      e.a = GroupAttr(g, 3);
      e.g = g;
      ds.examples.push_back(e);
    }
  }
  ds.num_classes = 3;
  ds.num_attrs = 3;
  ForgetSpec spec;
  std::size_t expected = 0;
  for (int g = 0; g < 9; ++g) {
    spec.entries.push_back({g, 0.5});
    expected += static_cast<std::size_t>(std::floor(0.5 * counts[g] + 0.5));
  }
  EXPECT_EQ(SplitForget(ds, spec, 2).forget.size(), expected);
}

TEST(SplitForgetTest, RejectsBadSpecs) {
  const GroupedDataset ds = MakeGroups({10, 0, 5, 5});
  EXPECT_THROW(SplitForget(ds, ForgetSpec{{{1, 0.5}}}, 0), SpecError);
  EXPECT_THROW(SplitForget(ds, ForgetSpec{{{0, 1.5}}}, 0), SpecError);
  EXPECT_THROW(SplitForget(ds, ForgetSpec{{{0, 0.5}, {0, 0.2}}}, 0), SpecError);
  EXPECT_THROW(SplitForget(ds, ForgetSpec{{{4, 0.5}}}, 0), SpecError);
}

TEST(SplitForgetTest, SeedSelectsMembers) {
  const GroupedDataset ds = MakeGroups({200, 10, 10, 10});
  const ForgetSpec spec{{{0, 0.5}}};
  EXPECT_EQ(SplitForget(ds, spec, 1).forget, SplitForget(ds, spec, 1).forget);
  EXPECT_NE(SplitForget(ds, spec, 1).forget, SplitForget(ds, spec, 2).forget);
}

TEST(ReweightTest, IdentityWhenNothingRemoved) {
  const GroupStats s{{10, 20, 30, 40}};
  const ReweightResult r = ReweightAlpha(s, s);
  EXPECT_EQ(r.alpha, (std::vector<double>{1, 1, 1, 1}));
  EXPECT_TRUE(r.fully_unlearned.empty());
}

TEST(ReweightTest, HandExample) {
  const ReweightResult r =
      ReweightAlpha(GroupStats{{100, 100, 100, 100}}, GroupStats{{50, 100, 100, 100}});
  EXPECT_EQ(r.alpha, (std::vector<double>{2, 1, 1, 1}));
  const GroupedDataset rem = MakeGroups({50, 100, 100, 100});
  const std::vector<double> p = SamplingDistribution(rem, r.alpha);
  EXPECT_DOUBLE_EQ(p.front(), 0.005);
  const std::vector<double> mass = GroupMass(rem, p);
  for (double m : mass) EXPECT_NEAR(m, 0.25, 1e-12);
}

TEST(ReweightTest, FullyUnlearnedGroupGetsZero) {
  const ReweightResult r =
      ReweightAlpha(GroupStats{{10, 10, 10, 10}}, GroupStats{{0, 10, 10, 10}});
  EXPECT_EQ(r.alpha[0], 0.0);
  EXPECT_EQ(r.fully_unlearned, std::vector<int>{0});
}

TEST(ReweightTest, RestorationHoldsForRandomCounts) {
  Rng rng(77);
  std::uniform_int_distribution<int> count(1, 60);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::size_t> tr(4), rem(4);
    for (int g = 0; g < 4; ++g) {
      tr[g] = count(rng);
      rem[g] = std::uniform_int_distribution<std::size_t>(1, tr[g])(rng);
    }
    const auto alpha = ReweightAlpha(GroupStats{tr}, GroupStats{rem}).alpha;
    const GroupedDataset ds = MakeGroups(rem);
    const std::vector<double> p = SamplingDistribution(ds, alpha);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
    const double n_tr = std::accumulate(tr.begin(), tr.end(), 0.0);
    const std::vector<double> mass = GroupMass(ds, p);
    for (int g = 0; g < 4; ++g) EXPECT_NEAR(mass[g], tr[g] / n_tr, 1e-12);
  }
}

TEST(SamplingTest, SingleGroupIsUniform) {
  const GroupedDataset ds = MakeGroups({0, 0, 8, 0});
  const std::vector<double> alpha = {5, 3, 0.2, 9};
  for (double p : SamplingDistribution(ds, alpha)) EXPECT_DOUBLE_EQ(p, 0.125);
}

TEST(SamplingTest, AllZeroWeightsThrow) {
  const GroupedDataset ds = MakeGroups({3, 3, 0, 0});
  const std::vector<double> alpha = {0, 0, 1, 1};
  EXPECT_THROW(SamplingDistribution(ds, alpha), DistributionError);
}

TEST(SamplerTest, WeightedFrequenciesConverge) {
  const GroupedDataset ds = MakeGroups({50, 100, 100, 100});
  const std::vector<double> p = SamplingDistribution(ds, std::vector<double>{2, 1, 1, 1});
  WeightedBatchSampler sampler(p, 1000, 100, 4);
  std::vector<double> freq(4, 0.0);
  for (const auto& batch : sampler.NextEpoch()) {
    for (std::size_t i : batch) freq[ds.examples[i].g] += 1.0;
  }
  for (double f : freq) EXPECT_NEAR(f / 1e5, 0.25, 0.01);
}

TEST(SamplerTest, BatchSizeOneYieldsValidIndices) {
  const std::vector<double> p = {0.1, 0.2, 0.7};
  WeightedBatchSampler sampler(p, 1, 50, 1);
  for (const auto& b : sampler.NextEpoch()) {
    ASSERT_EQ(b.size(), 1u);
    EXPECT_LT(b[0], 3u);
  }
}

TEST(SamplerTest, ShuffledEpochIsPermutation) {
  ShuffledBatchSampler s(10, 4, 3);
  EXPECT_EQ(s.epoch_length(), 3u);
  const auto epoch = s.NextEpoch();
  ASSERT_EQ(epoch.size(), 3u);
  EXPECT_EQ(epoch.back().size(), 2u);
  std::vector<std::size_t> all;
  for (const auto& b : epoch) all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(all[i], i);
}

TEST(CsvTest, RoundTripsExactly) {
  SyntheticConfig c;
  c.n_train = 40;
  c.n_val = 10;
  c.n_test = 10;
  const GroupedDataset ds = GenerateSynthetic(c).train;
  const auto path =
      (std::filesystem::temp_directory_path() / "unlearn_data_test.csv").string();
  WriteDatasetCsv(ds, path);
  const GroupedDataset back = ReadDatasetCsv(path, c.feature_dim, 2, 2, DatasetRole::kTrain);
  ASSERT_EQ(back.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_EQ(back.examples[i].x, ds.examples[i].x);
    EXPECT_EQ(back.examples[i].g, ds.examples[i].g);
  }
  EXPECT_THROW(ReadDatasetCsv(path, c.feature_dim + 1, 2, 2, DatasetRole::kTrain),
               ConfigError);
  EXPECT_THROW(ReadDatasetCsv(path, c.feature_dim, 1, 2, DatasetRole::kTrain),
               ConfigError);
  std::remove(path.c_str());
  EXPECT_THROW(ReadDatasetCsv(path, c.feature_dim, 2, 2, DatasetRole::kTrain), IoError);
}

}  // namespace
}  // namespace unlearn
