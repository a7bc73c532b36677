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

#include "unlearn/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "unlearn/error.h"
#include "unlearn/loss.h"

namespace unlearn {

const std::array<const char*, kNumMetrics> kMetricNames = {
    "RA", "UA", "TA", "MIA", "EO", "GA", "DP", "EP", "WG"};

std::vector<int> ArgmaxRows(const Matrix& logits) {
  std::vector<int> out(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto row = logits.row(i);
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (row[c] > row[best]) best = c;
    }
    out[i] = static_cast<int>(best);
  }
  return out;
}

std::vector<int> Predict(const ModelCheckpoint& ckpt, const GroupedDataset& ds) {
  if (ds.empty()) return {};
  return ArgmaxRows(ComputeLogits(ckpt, ds.Features()));
}

double AccuracyFromPredictions(std::span<const int> predictions,
                               std::span<const int> labels) {
  if (labels.empty()) throw MetricError("accuracy of an empty dataset");
  if (predictions.size() != labels.size()) {
    throw ShapeError("prediction and label counts differ");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    correct += predictions[i] == labels[i] ? 1 : 0;
  }
  return 100.0 * static_cast<double>(correct) /
         static_cast<double>(labels.size());
}

double Accuracy(const ModelCheckpoint& ckpt, const GroupedDataset& ds) {
  if (ds.empty()) throw MetricError("accuracy of an empty dataset");
  return AccuracyFromPredictions(Predict(ckpt, ds), ds.Labels());
}

double GroupAccuracy(const ModelCheckpoint& ckpt, const GroupedDataset& test,
                     std::span<const int> forget_groups) {
  if (forget_groups.empty()) throw MetricError("no forget groups given");
  const GroupedDataset subset = test.FilterGroups(forget_groups);
  if (subset.empty()) {
    throw MetricError("test set has no examples of the forget groups");
  }
  return Accuracy(ckpt, subset);
}

// ---------------------------------------------------------------------------
// Membership attack

namespace {

double Gini(std::size_t members, std::size_t total) {
  if (total == 0) return 0.0;
  const double p = static_cast<double>(members) / static_cast<double>(total);
  return 2.0 * p * (1.0 - p);
}

}  // namespace

int MembershipAttack::Build(std::vector<std::pair<double, int>> samples,
                            int depth, Rng& rng) {
  const std::size_t n = samples.size();
  std::size_t members = 0;
  for (const auto& s : samples) members += static_cast<std::size_t>(s.second);

  const int index = static_cast<int>(nodes_.size());
  nodes_.push_back({});
  const std::size_t nonmembers = n - members;
  bool majority_member;
  if (members != nonmembers) {
    majority_member = members > nonmembers;
  } else {
    majority_member = std::bernoulli_distribution(0.5)(rng);
  }
  nodes_[index].member = majority_member;
  if (depth >= 2 || n < 2 || members == 0 || members == n) return index;

  const double parent = Gini(members, n);
  double best = parent;
  std::size_t best_k = n;
  std::size_t left_members = 0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    left_members += static_cast<std::size_t>(samples[k].second);
    if (!(samples[k].first < samples[k + 1].first)) continue;
    const std::size_t nl = k + 1, nr = n - nl;
    const double impurity =
        (static_cast<double>(nl) * Gini(left_members, nl) +
         static_cast<double>(nr) * Gini(members - left_members, nr)) /
        static_cast<double>(n);
    if (impurity < best) {
      best = impurity;
      best_k = k;
    }
  }
  if (best_k == n) return index;

  const double threshold = samples[best_k].first;
  std::vector<std::pair<double, int>> left(samples.begin(),
                                           samples.begin() + best_k + 1);
  std::vector<std::pair<double, int>> right(samples.begin() + best_k + 1,
                                            samples.end());
  samples.clear();
  const int l = Build(std::move(left), depth + 1, rng);
  const int r = Build(std::move(right), depth + 1, rng);
  nodes_[index].leaf = false;
  nodes_[index].threshold = threshold;
  nodes_[index].left = l;
  nodes_[index].right = r;
  return index;
}

void MembershipAttack::Fit(std::span<const double> member_losses,
                           std::span<const double> nonmember_losses,
                           std::uint64_t seed) {
  std::vector<std::pair<double, int>> samples;
  samples.reserve(member_losses.size() + nonmember_losses.size());
  for (double v : member_losses) samples.emplace_back(v, 1);
  for (double v : nonmember_losses) samples.emplace_back(v, 0);
  std::stable_sort(samples.begin(), samples.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  nodes_.clear();
  Rng rng(DeriveSeed(seed, "mia:ties"));
  Build(std::move(samples), 0, rng);
}

bool MembershipAttack::PredictMember(double loss) const {
  if (nodes_.empty()) throw MetricError("membership attack is not fitted");
  int i = 0;
  while (!nodes_[i].leaf) {
    i = loss <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
  }
  return nodes_[i].member;
}

std::vector<double> MembershipAttack::thresholds() const {
  std::vector<double> out;
  for (const auto& n : nodes_) {
    if (!n.leaf) out.push_back(n.threshold);
  }
  return out;
}

double MiaEfficacyFromLosses(std::span<const double> member_losses,
                             std::span<const double> nonmember_losses,
                             std::span<const double> forget_losses,
                             std::uint64_t seed) {
  if (member_losses.empty() || nonmember_losses.empty() ||
      forget_losses.empty()) {
    throw MetricError("MIA needs non-empty member, non-member and forget sets");
  }
  std::vector<double> members(member_losses.begin(), member_losses.end());
  if (members.size() > nonmember_losses.size()) {
    Rng rng(DeriveSeed(seed, "mia:subsample"));
    std::shuffle(members.begin(), members.end(), rng);
    members.resize(nonmember_losses.size());
  }
  MembershipAttack attack;
  attack.Fit(members, nonmember_losses, seed);
  std::size_t negatives = 0;
  for (double v : forget_losses) negatives += attack.PredictMember(v) ? 0 : 1;
  return 100.0 * static_cast<double>(negatives) /
         static_cast<double>(forget_losses.size());
}

double MiaEfficacy(const ModelCheckpoint& ckpt, const GroupedDataset& remaining,
                   const GroupedDataset& val, const GroupedDataset& forget,
                   std::uint64_t seed) {
  if (remaining.empty() || val.empty() || forget.empty()) {
    throw MetricError("MIA needs non-empty remaining, validation and forget sets");
  }
  auto losses = [&](const GroupedDataset& ds) {
    return PerExampleCrossEntropy(ComputeLogits(ckpt, ds.Features()), ds.Labels());
  };
  return MiaEfficacyFromLosses(losses(remaining), losses(val), losses(forget),
                               seed);
}

// ---------------------------------------------------------------------------
// Fairness

FairnessInputs CollectFairnessInputs(const ModelCheckpoint& ckpt,
                                     const GroupedDataset& ds) {
  FairnessInputs in;
  in.predictions = Predict(ckpt, ds);
  in.labels = ds.Labels();
  for (const auto& e : ds.examples) in.attrs.push_back(e.a);
  return in;
}

namespace {

// positives[y][a], totals[y][a] after the binary reduction.
struct Cells {
  std::array<std::array<double, 2>, 2> positives{};
  std::array<std::array<double, 2>, 2> totals{};
};

Cells Tally(const FairnessInputs& in, const BinaryReduction& r) {
  if (in.predictions.size() != in.labels.size() ||
      in.labels.size() != in.attrs.size()) {
    throw ShapeError("fairness inputs have different lengths");
  }
  Cells c;
  for (std::size_t i = 0; i < in.labels.size(); ++i) {
    const int y = in.labels[i] == r.positive_class ? 1 : 0;
    const int a = in.attrs[i] == r.positive_attr ? 1 : 0;
    c.totals[y][a] += 1.0;
    c.positives[y][a] += in.predictions[i] == r.positive_class ? 1.0 : 0.0;
  }
  return c;
}

double Rate(const Cells& c, int y, int a) {
  if (c.totals[y][a] == 0.0) {
    throw MetricError("empty fairness cell (y=" + std::to_string(y) +
                      ", a=" + std::to_string(a) + ")");
  }
  return c.positives[y][a] / c.totals[y][a];
}

}  // namespace

double EqualizedOdds(const FairnessInputs& in, const BinaryReduction& r) {
  const Cells c = Tally(in, r);
  double sum = 0.0;
  for (int y = 0; y < 2; ++y) sum += std::abs(Rate(c, y, 0) - Rate(c, y, 1));
  return 50.0 * sum;
}

double DemographicParity(const FairnessInputs& in, const BinaryReduction& r) {
  const Cells c = Tally(in, r);
  double rate[2];
  for (int a = 0; a < 2; ++a) {
    const double total = c.totals[0][a] + c.totals[1][a];
    if (total == 0.0) {
      throw MetricError("empty fairness cell (a=" + std::to_string(a) + ")");
    }
    rate[a] = (c.positives[0][a] + c.positives[1][a]) / total;
  }
  return 100.0 * std::abs(rate[0] - rate[1]);
}

double EqualOpportunity(const FairnessInputs& in, const BinaryReduction& r) {
  const Cells c = Tally(in, r);
  return 100.0 * std::abs(Rate(c, 1, 0) - Rate(c, 1, 1));
}

double WorstGroupFromAccuracies(std::span<const double> group_accuracies) {
  if (group_accuracies.empty()) throw MetricError("no groups to compare");
  return *std::min_element(group_accuracies.begin(), group_accuracies.end());
}

double WorstGroupAccuracy(const ModelCheckpoint& ckpt,
                          const GroupedDataset& ds) {
  const std::vector<int> pred = Predict(ckpt, ds);
  const int groups = ds.num_groups();
  std::vector<std::size_t> correct(groups, 0), total(groups, 0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& e = ds.examples[i];
    ++total[e.g];
    correct[e.g] += pred[i] == e.y ? 1 : 0;
  }
  std::vector<double> acc;
  for (int g = 0; g < groups; ++g) {
    if (total[g] == 0) {
      throw MetricError("group " + std::to_string(g) + " has no test examples");
    }
    acc.push_back(100.0 * static_cast<double>(correct[g]) /
                  static_cast<double>(total[g]));
  }
  return WorstGroupFromAccuracies(acc);
}

// ---------------------------------------------------------------------------
// Suite and gaps

BinaryReduction ReductionForGroups(std::span<const int> forget_groups,
                                   int num_attrs) {
  if (forget_groups.empty()) return {};
  return {GroupLabel(forget_groups.front(), num_attrs),
          GroupAttr(forget_groups.front(), num_attrs)};
}

MetricValues EvaluateAll(const ModelCheckpoint& ckpt, const EvaluationSets& sets,
                         std::uint64_t seed) {
  MetricValues m;
  const GroupedDataset& test = *sets.test;
  m[kRA] = Accuracy(ckpt, *sets.remaining);
  m[kTA] = Accuracy(ckpt, test);
  if (sets.forget->empty()) {
    m[kUA] = 0.0;
    m[kMIA] = 0.0;
  } else {
    m[kUA] = Accuracy(ckpt, *sets.forget);
    m[kMIA] = MiaEfficacy(ckpt, *sets.remaining, *sets.val, *sets.forget, seed);
  }
  const BinaryReduction r = ReductionForGroups(sets.forget_groups, test.num_attrs);
  const FairnessInputs in = CollectFairnessInputs(ckpt, test);
  m[kEO] = EqualizedOdds(in, r);
  m[kGA] = GroupAccuracy(ckpt, test, sets.forget_groups);
  m[kDP] = DemographicParity(in, r);
  m[kEP] = EqualOpportunity(in, r);
  m[kWG] = WorstGroupAccuracy(ckpt, test);
  return m;
}

MetricValues MetricsReport::Mean() const {
  MetricValues out;
  if (per_seed.empty()) return out;
  for (const auto& s : per_seed) {
    for (std::size_t k = 0; k < kNumMetrics; ++k) out[k] += s.values[k];
  }
  for (double& v : out.v) v /= static_cast<double>(per_seed.size());
  return out;
}

GapSummary AvgGapFromDeltas(std::span<const double> deltas) {
  if (deltas.size() != kNumGapMetrics) {
    throw MetricError("avg gap needs exactly six deltas");
  }
  GapSummary g;
  double sum = 0.0;
  for (std::size_t k = 0; k < kNumGapMetrics; ++k) {
    g.deltas[k] = deltas[k];
    sum += 100.0 - deltas[k];
  }
  g.avg_gap = sum / static_cast<double>(kNumGapMetrics);
  return g;
}

GapSummary AvgGap(const MetricsReport& unlearned, const MetricsReport& gold) {
  if (unlearned.per_seed.size() != gold.per_seed.size() ||
      unlearned.per_seed.empty()) {
    throw MetricError("avg gap needs matching, non-empty seed sets");
  }
  std::array<double, kNumGapMetrics> deltas{};
  for (std::size_t s = 0; s < gold.per_seed.size(); ++s) {
    if (unlearned.per_seed[s].seed != gold.per_seed[s].seed) {
      throw MetricError("seed mismatch in avg gap: " +
                        std::to_string(unlearned.per_seed[s].seed) + " vs " +
                        std::to_string(gold.per_seed[s].seed));
    }
    for (std::size_t k = 0; k < kNumGapMetrics; ++k) {
      deltas[k] += std::abs(unlearned.per_seed[s].values[k] -
                            gold.per_seed[s].values[k]);
    }
  }
  for (double& d : deltas) d /= static_cast<double>(gold.per_seed.size());
  return AvgGapFromDeltas(deltas);
}

}  // namespace unlearn
