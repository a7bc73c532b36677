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

#include "unlearn/data.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "unlearn/error.h"

namespace unlearn {

std::string RoleName(DatasetRole role) {
  switch (role) {
    case DatasetRole::kTrain:
      return "train";
    case DatasetRole::kVal:
      return "val";
    case DatasetRole::kTest:
      return "test";
    case DatasetRole::kRemaining:
      return "remaining";
    case DatasetRole::kForget:
      return "forget";
  }
  return "unknown";
}

Matrix GroupedDataset::Features() const {
  std::vector<std::size_t> all(examples.size());
  std::iota(all.begin(), all.end(), 0);
  return Features(all);
}

Matrix GroupedDataset::Features(std::span<const std::size_t> indices) const {
  const std::size_t d = feature_dim();
  Matrix m(indices.size(), d);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto& x = examples.at(indices[i]).x;
    std::copy(x.begin(), x.end(), m.row(i).begin());
  }
  return m;
}

std::vector<int> GroupedDataset::Labels() const {
  std::vector<int> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(e.y);
  return out;
}

std::vector<int> GroupedDataset::Labels(
    std::span<const std::size_t> indices) const {
  std::vector<int> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(examples.at(i).y);
  return out;
}

std::vector<int> GroupedDataset::Groups() const {
  std::vector<int> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(e.g);
  return out;
}

std::vector<int> GroupedDataset::Groups(
    std::span<const std::size_t> indices) const {
  std::vector<int> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(examples.at(i).g);
  return out;
}

GroupedDataset GroupedDataset::FilterGroups(std::span<const int> groups) const {
  GroupedDataset out{{}, num_classes, num_attrs, role};
  for (const auto& e : examples) {
    if (std::find(groups.begin(), groups.end(), e.g) != groups.end()) {
      out.examples.push_back(e);
    }
  }
  return out;
}

std::size_t GroupStats::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

GroupStats GroupFrequencies(const GroupedDataset& ds) {
  GroupStats s{std::vector<std::size_t>(ds.num_groups(), 0)};
  for (const auto& e : ds.examples) ++s.counts.at(e.g);
  return s;
}

void ForgetSpec::Validate(int num_groups) const {
  std::vector<bool> seen(num_groups, false);
  for (const auto& e : entries) {
    if (e.group < 0 || e.group >= num_groups) {
      throw SpecError("forget group " + std::to_string(e.group) +
                      " outside [0, " + std::to_string(num_groups) + ")");
    }
    if (seen[e.group]) {
      throw SpecError("forget group " + std::to_string(e.group) +
                      " listed twice");
    }
    seen[e.group] = true;
    if (!(e.ratio >= 0.0 && e.ratio <= 1.0)) {
      throw SpecError("unlearning ratio must lie in [0, 1]");
    }
  }
}

std::vector<int> ForgetSpec::groups() const {
  std::vector<int> out;
  for (const auto& e : entries) out.push_back(e.group);
  return out;
}

void SyntheticConfig::Validate() const {
  if (num_classes < 1 || num_attrs < 1) {
    throw ConfigError("need at least one class and one attribute");
  }
  if (feature_dim == 0) throw ConfigError("feature_dim must be positive");
  if (!(noise > 0.0)) throw ConfigError("noise scale must be positive");
  if (!(spurious >= 0.0 && spurious <= 1.0)) {
    throw ConfigError("spurious strength must lie in [0, 1]");
  }
  if (proportions.size() != static_cast<std::size_t>(num_groups())) {
    throw ConfigError("expected " + std::to_string(num_groups()) +
                      " group proportions, got " +
                      std::to_string(proportions.size()));
  }
  double sum = 0.0;
  for (double p : proportions) {
    if (p < 0.0) throw ConfigError("negative group proportion");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("group proportions sum to " + std::to_string(sum) +
                      ", expected 1");
  }
}

std::vector<std::size_t> LargestRemainder(std::span<const double> proportions,
                                          std::size_t total) {
  std::vector<std::size_t> counts(proportions.size());
  std::vector<double> frac(proportions.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < proportions.size(); ++i) {
    const double exact = proportions[i] * static_cast<double>(total);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    frac[i] = exact - std::floor(exact);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(proportions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t k = 0; assigned < total && k < order.size(); ++k) {
    ++counts[order[k]];
    ++assigned;
  }
  return counts;
}

namespace {

std::vector<double> RandomDirection(std::size_t d, double norm, Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<double> v(d);
  double s = 0.0;
  for (double& x : v) {
    x = n01(rng);
    s += x * x;
  }
  s = std::sqrt(s);
  for (double& x : v) x *= norm / s;
  return v;
}

GroupedDataset MakeSplit(const SyntheticConfig& c, std::size_t n,
                         DatasetRole role,
                         const std::vector<std::vector<double>>& class_means,
                         const std::vector<std::vector<double>>& attr_means,
                         std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, c.noise);
  const auto sizes = LargestRemainder(c.proportions, n);
  GroupedDataset ds{{}, c.num_classes, c.num_attrs, role};
  ds.examples.reserve(n);
  for (int g = 0; g < c.num_groups(); ++g) {
    const int y = GroupLabel(g, c.num_attrs);
    const int a = GroupAttr(g, c.num_attrs);
    for (std::size_t k = 0; k < sizes[g]; ++k) {
      LabeledExample e;
      e.y = y;
      e.a = a;
      e.g = g;
      e.x.resize(c.feature_dim);
      for (std::size_t j = 0; j < c.feature_dim; ++j) {
        e.x[j] = class_means[y][j] + c.spurious * attr_means[a][j] + noise(rng);
      }
      ds.examples.push_back(std::move(e));
    }
  }
  std::shuffle(ds.examples.begin(), ds.examples.end(), rng);
  for (std::size_t i = 0; i < ds.examples.size(); ++i) ds.examples[i].id = i;
  return ds;
}

}  // namespace

DatasetSplits GenerateSynthetic(const SyntheticConfig& c) {
  c.Validate();
  Rng rng(DeriveSeed(c.seed, "synthetic:means"));
  std::vector<std::vector<double>> class_means, attr_means;
  for (int y = 0; y < c.num_classes; ++y) {
    class_means.push_back(RandomDirection(c.feature_dim, c.class_separation, rng));
  }
  for (int a = 0; a < c.num_attrs; ++a) {
    attr_means.push_back(RandomDirection(c.feature_dim, c.attr_separation, rng));
  }
  DatasetSplits out;
  out.train = MakeSplit(c, c.n_train, DatasetRole::kTrain, class_means,
                        attr_means, DeriveSeed(c.seed, "synthetic:train"));
  out.val = MakeSplit(c, c.n_val, DatasetRole::kVal, class_means, attr_means,
                      DeriveSeed(c.seed, "synthetic:val"));
  out.test = MakeSplit(c, c.n_test, DatasetRole::kTest, class_means,
                       attr_means, DeriveSeed(c.seed, "synthetic:test"));
  return out;
}

ForgetSplit SplitForget(const GroupedDataset& train, const ForgetSpec& spec,
                        std::uint64_t seed) {
  spec.Validate(train.num_groups());
  const GroupStats stats = GroupFrequencies(train);
  std::vector<bool> forgotten(train.size(), false);
  for (const auto& entry : spec.entries) {
    if (stats.counts[entry.group] == 0) {
      throw SpecError("forget group " + std::to_string(entry.group) +
                      " is absent from the training set");
    }
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < train.size(); ++i) {
      if (train.examples[i].g == entry.group) members.push_back(i);
    }
    const auto k = static_cast<std::size_t>(
        std::floor(entry.ratio * static_cast<double>(members.size()) + 0.5));
    Rng rng(DeriveSeed(seed, "forget", static_cast<std::uint64_t>(entry.group)));
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t j = 0; j < k; ++j) forgotten[members[j]] = true;
  }
  ForgetSplit out;
  out.remaining = {{}, train.num_classes, train.num_attrs, DatasetRole::kRemaining};
  out.forget = {{}, train.num_classes, train.num_attrs, DatasetRole::kForget};
  for (std::size_t i = 0; i < train.size(); ++i) {
    (forgotten[i] ? out.forget : out.remaining).examples.push_back(train.examples[i]);
  }
  return out;
}

ReweightResult ReweightAlpha(const GroupStats& train_stats,
                             const GroupStats& remaining_stats) {
  if (train_stats.counts.size() != remaining_stats.counts.size()) {
    throw ShapeError("group statistics have different lengths");
  }
  ReweightResult out;
  out.alpha.resize(train_stats.counts.size(), 0.0);
  for (std::size_t g = 0; g < train_stats.counts.size(); ++g) {
    if (remaining_stats.counts[g] == 0) {
      if (train_stats.counts[g] > 0) {
        out.fully_unlearned.push_back(static_cast<int>(g));
        spdlog::warn("group {} fully unlearned; its sampling weight is 0", g);
      }
      continue;
    }
    out.alpha[g] = static_cast<double>(train_stats.counts[g]) /
                   static_cast<double>(remaining_stats.counts[g]);
  }
  return out;
}

std::vector<double> SamplingDistribution(const GroupedDataset& ds,
                                         std::span<const double> alpha) {
  if (alpha.size() != static_cast<std::size_t>(ds.num_groups())) {
    throw ShapeError("alpha length does not match group count");
  }
  std::vector<double> p(ds.size());
  double total = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    p[i] = alpha[ds.examples[i].g];
    total += p[i];
  }
  if (!(total > 0.0)) {
    throw DistributionError("sampling weights are all zero");
  }
  for (double& v : p) v /= total;
  return p;
}

WeightedBatchSampler::WeightedBatchSampler(std::span<const double> probabilities,
                                           std::size_t batch_size,
                                           std::size_t epoch_length,
                                           std::uint64_t seed)
    : dist_(probabilities.begin(), probabilities.end()),
      batch_size_(batch_size),
      epoch_length_(epoch_length),
      rng_(seed) {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
}

std::vector<std::size_t> WeightedBatchSampler::NextBatch() {
  std::vector<std::size_t> batch(batch_size_);
  for (auto& i : batch) i = dist_(rng_);
  return batch;
}

std::vector<std::vector<std::size_t>> WeightedBatchSampler::NextEpoch() {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(epoch_length_);
  for (std::size_t b = 0; b < epoch_length_; ++b) out.push_back(NextBatch());
  return out;
}

ShuffledBatchSampler::ShuffledBatchSampler(std::size_t n,
                                           std::size_t batch_size,
                                           std::uint64_t seed)
    : n_(n), batch_size_(batch_size), rng_(seed) {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
}

std::size_t ShuffledBatchSampler::epoch_length() const {
  return (n_ + batch_size_ - 1) / batch_size_;
}

std::vector<std::vector<std::size_t>> ShuffledBatchSampler::NextEpoch() {
  std::vector<std::size_t> order(n_);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng_);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < n_; s += batch_size_) {
    out.emplace_back(order.begin() + s,
                     order.begin() + std::min(n_, s + batch_size_));
  }
  return out;
}

void WriteDatasetCsv(const GroupedDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  const std::size_t d = ds.feature_dim();
  for (std::size_t j = 0; j < d; ++j) out << "x" << j << ",";
  out << "y,a\n";
  char buf[32];
  for (const auto& e : ds.examples) {
    for (double v : e.x) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << buf << ",";
    }
    out << e.y << "," << e.a << "\n";
  }
  if (!out) throw IoError("failed writing " + path);
}

GroupedDataset ReadDatasetCsv(const std::string& path, std::size_t feature_dim,
                              int num_classes, int num_attrs,
                              DatasetRole role) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": missing header");
  std::ostringstream expected;
  for (std::size_t j = 0; j < feature_dim; ++j) expected << "x" << j << ",";
  expected << "y,a";
  if (line != expected.str()) {
    throw ConfigError(path + ": header does not match feature_dim " +
                      std::to_string(feature_dim));
  }
  GroupedDataset ds{{}, num_classes, num_attrs, role};
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != feature_dim + 2) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(feature_dim + 2) + " fields");
    }
    LabeledExample e;
    e.id = ds.examples.size();
    try {
      for (std::size_t j = 0; j < feature_dim; ++j) e.x.push_back(std::stod(fields[j]));
      e.y = std::stoi(fields[feature_dim]);
      e.a = std::stoi(fields[feature_dim + 1]);
    } catch (const std::logic_error&) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed number");
    }
    if (e.y < 0 || e.y >= num_classes || e.a < 0 || e.a >= num_attrs) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": label or attribute out of range");
    }
    e.g = GroupIndex(e.y, e.a, num_attrs);
    ds.examples.push_back(std::move(e));
  }
  return ds;
}

}  // namespace unlearn
