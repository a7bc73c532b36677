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

#ifndef UNLEARN_METRICS_H_
#define UNLEARN_METRICS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "unlearn/data.h"
#include "unlearn/models.h"

namespace unlearn {

// Argmax over logits, ties to the lowest class index.
std::vector<int> Predict(const ModelCheckpoint& ckpt, const GroupedDataset& ds);
std::vector<int> ArgmaxRows(const Matrix& logits);

// Percentage of correct predictions.
double Accuracy(const ModelCheckpoint& ckpt, const GroupedDataset& ds);
double AccuracyFromPredictions(std::span<const int> predictions,
                               std::span<const int> labels);

// Accuracy on the test examples whose group is in forget_groups.
double GroupAccuracy(const ModelCheckpoint& ckpt, const GroupedDataset& test,
                     std::span<const int> forget_groups);

// Depth-2 decision tree over a scalar loss, fit by exhaustive Gini search.
// Splits send loss ≤ threshold left, where the threshold is an observed
// training value, so predictions are invariant to increasing transforms.
class MembershipAttack {
 public:
  void Fit(std::span<const double> member_losses,
           std::span<const double> nonmember_losses, std::uint64_t seed);
  bool PredictMember(double loss) const;
  std::vector<double> thresholds() const;

 private:
  struct Node {
    bool leaf = true;
    bool member = true;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
  };
  int Build(std::vector<std::pair<double, int>> samples, int depth, Rng& rng);
  std::vector<Node> nodes_;
};

// 100·TN/|forget| for an attack trained on remaining (member) vs validation
// (non-member) losses. The member sample is subsampled to the validation
// size so both classes carry equal weight.
double MiaEfficacy(const ModelCheckpoint& ckpt, const GroupedDataset& remaining,
                   const GroupedDataset& val, const GroupedDataset& forget,
                   std::uint64_t seed);
double MiaEfficacyFromLosses(std::span<const double> member_losses,
                             std::span<const double> nonmember_losses,
                             std::span<const double> forget_losses,
                             std::uint64_t seed);

// Binary reduction for fairness metrics: y=1 iff y equals positive_class,
// a=1 iff a equals positive_attr; everything else maps to 0.
struct BinaryReduction {
  int positive_class = 1;
  int positive_attr = 1;
};

struct FairnessInputs {
  std::vector<int> predictions;
  std::vector<int> labels;
  std::vector<int> attrs;
};
FairnessInputs CollectFairnessInputs(const ModelCheckpoint& ckpt,
                                     const GroupedDataset& ds);

double EqualizedOdds(const FairnessInputs& in, const BinaryReduction& r);
double DemographicParity(const FairnessInputs& in, const BinaryReduction& r);
double EqualOpportunity(const FairnessInputs& in, const BinaryReduction& r);

// Minimum per-group accuracy over groups present in the dataset; throws if a
// group has no examples.
double WorstGroupAccuracy(const ModelCheckpoint& ckpt, const GroupedDataset& ds);
double WorstGroupFromAccuracies(std::span<const double> group_accuracies);

enum Metric : std::size_t { kRA, kUA, kTA, kMIA, kEO, kGA, kDP, kEP, kWG };
inline constexpr std::size_t kNumMetrics = 9;
inline constexpr std::size_t kNumGapMetrics = 6;  // RA..GA
extern const std::array<const char*, kNumMetrics> kMetricNames;

struct MetricValues {
  std::array<double, kNumMetrics> v{};
  double operator[](std::size_t i) const { return v[i]; }
  double& operator[](std::size_t i) { return v[i]; }
};

struct EvaluationSets {
  const GroupedDataset* remaining = nullptr;
  const GroupedDataset* forget = nullptr;
  const GroupedDataset* val = nullptr;
  const GroupedDataset* test = nullptr;
  std::vector<int> forget_groups;
};

// Full metric suite. With an empty forget set, UA and MIA are reported as 0.
MetricValues EvaluateAll(const ModelCheckpoint& ckpt, const EvaluationSets& sets,
                         std::uint64_t seed);

// Binary reduction targeting the first forget group.
BinaryReduction ReductionForGroups(std::span<const int> forget_groups,
                                   int num_attrs);

struct SeedMetrics {
  std::uint64_t seed = 0;
  MetricValues values;
};

struct MetricsReport {
  std::vector<SeedMetrics> per_seed;
  MetricValues Mean() const;
};

struct GapSummary {
  std::array<double, kNumGapMetrics> deltas{};
  double avg_gap = 100.0;
};

// δ_m = mean over seeds of |m_u − m_gold| for m in RA..GA;
// avg_gap = mean over m of (100 − δ_m).
GapSummary AvgGap(const MetricsReport& unlearned, const MetricsReport& gold);
GapSummary AvgGapFromDeltas(std::span<const double> deltas);

}  // namespace unlearn

#endif  // UNLEARN_METRICS_H_
