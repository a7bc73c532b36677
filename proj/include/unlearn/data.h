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

#ifndef UNLEARN_DATA_H_
#define UNLEARN_DATA_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "unlearn/matrix.h"
#include "unlearn/rng.h"

namespace unlearn {

// Group index of the pair (y, a): g = y·|A| + a.
inline int GroupIndex(int y, int a, int num_attrs) { return y * num_attrs + a; }
inline int GroupLabel(int g, int num_attrs) { return g / num_attrs; }
inline int GroupAttr(int g, int num_attrs) { return g % num_attrs; }

struct LabeledExample {
  // Position in the parent training split; identity survives forget splits.
  std::size_t id = 0;
  std::vector<double> x;
  int y = 0;
  int a = 0;
  int g = 0;
  bool operator==(const LabeledExample&) const = default;
};

enum class DatasetRole { kTrain, kVal, kTest, kRemaining, kForget };
std::string RoleName(DatasetRole role);

struct GroupedDataset {
  std::vector<LabeledExample> examples;
  int num_classes = 2;
  int num_attrs = 2;
  DatasetRole role = DatasetRole::kTrain;

  int num_groups() const { return num_classes * num_attrs; }
  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
  std::size_t feature_dim() const {
    return examples.empty() ? 0 : examples.front().x.size();
  }

  Matrix Features() const;
  Matrix Features(std::span<const std::size_t> indices) const;
  std::vector<int> Labels() const;
  std::vector<int> Labels(std::span<const std::size_t> indices) const;
  std::vector<int> Groups() const;
  std::vector<int> Groups(std::span<const std::size_t> indices) const;

  // Examples whose group is in `groups`, same order.
  GroupedDataset FilterGroups(std::span<const int> groups) const;

  bool operator==(const GroupedDataset&) const = default;
};

struct GroupStats {
  std::vector<std::size_t> counts;

  std::size_t total() const;
  bool operator==(const GroupStats&) const = default;
};

GroupStats GroupFrequencies(const GroupedDataset& ds);

struct ForgetEntry {
  int group = 0;
  double ratio = 0.0;
};

struct ForgetSpec {
  std::vector<ForgetEntry> entries;

  // Throws SpecError on duplicate groups, ratios outside [0,1] or group
  // indices outside [0, num_groups).
  void Validate(int num_groups) const;
  std::vector<int> groups() const;
};

struct SyntheticConfig {
  int num_classes = 2;
  int num_attrs = 2;
  std::size_t feature_dim = 16;
  // Within-group isotropic noise σ.
  double noise = 1.2;
  // Norms of the class and attribute mean vectors before spurious scaling.
  double class_separation = 2.0;
  double attr_separation = 8.0;
  // ρ_s: attribute mean shift strength in [0, 1].
  double spurious = 0.6;
  // Proportion of each group, indexed by GroupIndex(y, a).
  std::vector<double> proportions = {0.44, 0.41, 0.14, 0.01};
  std::size_t n_train = 8000;
  std::size_t n_val = 1000;
  std::size_t n_test = 2000;
  std::uint64_t seed = 0;

  int num_groups() const { return num_classes * num_attrs; }
  void Validate() const;
};

struct DatasetSplits {
  GroupedDataset train;
  GroupedDataset val;
  GroupedDataset test;
};

// Gaussian clusters x = μ_y + ρ_s·μ_a + ε, ε ~ N(0, σ²I). Group sizes per
// split follow the proportions with largest-remainder rounding.
DatasetSplits GenerateSynthetic(const SyntheticConfig& config);

// Integer apportionment of `total` by proportions: floors first, then the
// leftover units go to the largest fractional parts (lower index on ties).
std::vector<std::size_t> LargestRemainder(std::span<const double> proportions,
                                          std::size_t total);

struct ForgetSplit {
  GroupedDataset remaining;
  GroupedDataset forget;
};

// For each (g, r), round-half-up(r·ν[g]) examples of group g are drawn
// uniformly without replacement into the forget set. Both outputs keep the
// parent order.
ForgetSplit SplitForget(const GroupedDataset& train, const ForgetSpec& spec,
                        std::uint64_t seed);

struct ReweightResult {
  std::vector<double> alpha;
  // Groups present in training but absent from the remaining set; they get
  // α = 0.
  std::vector<int> fully_unlearned;
};

// α[g] = ν_tr[g] / ν_r[g].
ReweightResult ReweightAlpha(const GroupStats& train_stats,
                             const GroupStats& remaining_stats);

// P(i) = α[g_i] / Σ_j α[g_j].
std::vector<double> SamplingDistribution(const GroupedDataset& ds,
                                         std::span<const double> alpha);

// Draws index batches with replacement from a fixed distribution.
class WeightedBatchSampler {
 public:
  WeightedBatchSampler(std::span<const double> probabilities,
                       std::size_t batch_size, std::size_t epoch_length,
                       std::uint64_t seed);

  std::vector<std::size_t> NextBatch();
  std::vector<std::vector<std::size_t>> NextEpoch();
  std::size_t epoch_length() const { return epoch_length_; }

 private:
  std::discrete_distribution<std::size_t> dist_;
  std::size_t batch_size_;
  std::size_t epoch_length_;
  Rng rng_;
};

// Seeded permutation per epoch, split into consecutive batches (the last may
// be short).
class ShuffledBatchSampler {
 public:
  ShuffledBatchSampler(std::size_t n, std::size_t batch_size,
                       std::uint64_t seed);

  std::vector<std::vector<std::size_t>> NextEpoch();
  std::size_t epoch_length() const;

 private:
  std::size_t n_;
  std::size_t batch_size_;
  Rng rng_;
};

// CSV with header x0,...,x{d-1},y,a.
void WriteDatasetCsv(const GroupedDataset& ds, const std::string& path);
GroupedDataset ReadDatasetCsv(const std::string& path, std::size_t feature_dim,
                              int num_classes, int num_attrs, DatasetRole role);

}  // namespace unlearn

#endif  // UNLEARN_DATA_H_
