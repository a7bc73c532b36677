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

#ifndef UNLEARN_HARNESS_H_
#define UNLEARN_HARNESS_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "unlearn/algorithms.h"
#include "unlearn/config.h"
#include "unlearn/data.h"
#include "unlearn/metrics.h"
#include "unlearn/models.h"

namespace unlearn {

enum class Method { kPretrain, kRetrain, kGroupDro, kFineTune, kL1Sparse, kSalun, kScrub, kMiu };

std::string MethodName(Method m);
Method ParseMethod(const std::string& name);

struct MethodSpec {
  Method method = Method::kRetrain;
  bool reweight = false;

  // "miu+rw" style label.
  std::string Label() const;
  bool operator==(const MethodSpec&) const = default;
};
MethodSpec ParseMethodSpec(const std::string& label);

// Hyperparameters for every method; defaults are the desk-scale recipe.
struct MethodSettings {
  TrainConfig train;  // pretrain / retrain / group-DRO
  std::size_t approx_epochs = 10;
  std::size_t approx_batch_size = 64;
  double approx_weight_decay = 5e-4;
  double finetune_lr = 0.01;
  double l1_lr = 0.01;
  double l1_gamma = 5e-4;
  double salun_lr = 0.01;
  double salun_prune_fraction = 0.5;
  double scrub_lr = 0.01;
  std::size_t scrub_stop_epoch = 5;
  double scrub_ce_weight = 0.99;
  double scrub_kl_weight = 0.001;
  double gdro_eta = 0.01;
  double miu_lr = 0.01;
  double miu_lambda = 1.0;
  double miu_forget_lr_scale = 0.003;
  std::size_t miu_forget_epochs = 5;
  std::size_t miu_mine_steps_first = 100;
  std::size_t miu_mine_steps_rest = 10;
  std::size_t miu_mine_batch_size = 256;
  double miu_mine_lr = 0.05;
  MarginalRule miu_marginal = MarginalRule::kUniformRandom;
  bool miu_retain_term = true;
  bool miu_unlearn_term = true;
  bool miu_calibration_term = true;

  TrainConfig ApproxConfig(double lr, std::uint64_t seed) const;
  MiuConfig Miu(bool reweight, std::uint64_t seed) const;
  BaselineConfig Baseline(double lr, bool reweight, std::uint64_t seed) const;
};

// Default synthetic scenario with a minority group under 1%.
SyntheticConfig CelebaLikeScenario();

struct ExperimentPlan {
  SyntheticConfig data = CelebaLikeScenario();
  ModelShape shape;
  MethodSettings settings;
  ForgetSpec forget{{{3, 0.5}}};
  std::vector<MethodSpec> methods;
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  MethodSpec gold{Method::kRetrain, true};
  std::string output_dir = "results";

  void Validate() const;
  // Every setting that influences results, one key=value per line.
  std::string Canonical() const;
  std::uint64_t Hash() const;
};

// Builds a plan from a configuration (see README for keys). The seed list
// is replaced by {UNLEARN_LAB_SEED} when that environment variable is set.
ExperimentPlan PlanFromConfig(const Config& config);

// Everything one seed needs: data splits, the forget split and the
// pretrained model.
struct SeedContext {
  std::uint64_t seed = 0;
  DatasetSplits splits;
  ForgetSplit forget;
  GroupStats train_stats;
  ModelCheckpoint pretrained;
  EvaluationSets Sets(const ForgetSpec& spec) const;
};

SeedContext PrepareSeed(const ExperimentPlan& plan, std::uint64_t seed);

// Runs one method on a prepared seed.
ModelCheckpoint RunMethod(const ExperimentPlan& plan, const SeedContext& ctx,
                          const MethodSpec& spec);

struct TableRow {
  MethodSpec spec;
  MetricsReport report;
  GapSummary gap;
};

struct TableResult {
  std::vector<TableRow> rows;
  MetricsReport gold;
  std::uint64_t config_hash = 0;
};

TableResult RunTable(const ExperimentPlan& plan);

// CSV text for per-seed + aggregate rows; `prefix` columns (name, value) are
// prepended to every row.
using CsvPrefix = std::vector<std::pair<std::string, std::string>>;
std::string MetricsCsv(const TableResult& table, const CsvPrefix& prefix = {},
                       bool header = true);
// method,reweight,metric,value,delta,avg_gap,config_hash
std::string SummaryCsv(const TableResult& table, const CsvPrefix& prefix = {},
                       bool header = true);

struct SweepResult {
  std::vector<double> ratios;
  std::vector<TableResult> tables;
};
SweepResult SweepRatio(const ExperimentPlan& plan, const std::vector<double>& ratios);

// Forget spec over `count` groups at `ratio`: an s×s block of the first s
// classes and attributes when count = s², otherwise the first `count` groups.
ForgetSpec ForgetSpecForGroupCount(int num_classes, int num_attrs, int count,
                                   double ratio);

struct MultiGroupResult {
  std::vector<int> group_counts;
  std::vector<TableResult> tables;
};
MultiGroupResult MultiGroup(const ExperimentPlan& plan,
                            const std::vector<int>& group_counts);

struct AblationRow {
  bool retain = true;
  bool unlearn = true;
  bool calibration = true;
  bool reweight = true;
  double lambda = 1.0;
};

struct AblationPlan {
  ExperimentPlan base;
  std::vector<AblationRow> rows;
};

// The four component rows plus the λ grid {0, 1, 5, 10} on full MIU.
std::vector<AblationRow> DefaultAblationRows();

struct AblationResult {
  std::vector<AblationRow> rows;
  std::vector<MetricsReport> reports;
  std::vector<GapSummary> gaps;
  std::uint64_t config_hash = 0;
};
AblationResult Ablate(const AblationPlan& plan);
std::string AblationCsv(const AblationResult& result);

struct ProbeResult {
  double before = 0.0;
  double after = 0.0;
  bool degenerate = false;  // forget set spans a single group
};

// Trains a fresh linear group probe on each checkpoint's frozen forget-set
// features and reports held-out probe accuracy (percent).
ProbeResult ProbeValidation(const ModelCheckpoint& before,
                            const ModelCheckpoint& after,
                            const GroupedDataset& forget, std::uint64_t seed);
double ProbeAccuracy(const ParameterSet& backbone, const GroupedDataset& data,
                     std::uint64_t seed);

// Run manifest as JSON text.
std::string ManifestJson(const std::string& command, std::uint64_t config_hash,
                         double wall_seconds,
                         const std::vector<std::string>& outputs);

void WriteTextFile(const std::string& path, const std::string& text);

}  // namespace unlearn

#endif  // UNLEARN_HARNESS_H_
