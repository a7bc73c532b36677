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

#include "unlearn/harness.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "unlearn/error.h"
#include "unlearn/loss.h"
#include "unlearn/optim.h"

namespace unlearn {

namespace {

std::string Fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string Hex(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string Exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string MethodName(Method m) {
  switch (m) {
    case Method::kPretrain:
      return "pretrain";
    case Method::kRetrain:
      return "retrain";
    case Method::kGroupDro:
      return "gdro";
    case Method::kFineTune:
      return "finetune";
    case Method::kL1Sparse:
      return "l1sparse";
    case Method::kSalun:
      return "salun";
    case Method::kScrub:
      return "scrub";
    case Method::kMiu:
      return "miu";
  }
  return "unknown";
}

Method ParseMethod(const std::string& name) {
  for (Method m : {Method::kPretrain, Method::kRetrain, Method::kGroupDro,
                   Method::kFineTune, Method::kL1Sparse, Method::kSalun,
                   Method::kScrub, Method::kMiu}) {
    if (MethodName(m) == name) return m;
  }
  throw ConfigError("unknown method '" + name + "'");
}

std::string MethodSpec::Label() const {
  return MethodName(method) + (reweight ? "+rw" : "");
}

MethodSpec ParseMethodSpec(const std::string& label) {
  const std::string suffix = "+rw";
  if (label.size() > suffix.size() &&
      label.compare(label.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return {ParseMethod(label.substr(0, label.size() - suffix.size())), true};
  }
  return {ParseMethod(label), false};
}

TrainConfig MethodSettings::ApproxConfig(double lr, std::uint64_t seed) const {
  TrainConfig c = ApproximateTrainConfig(seed);
  c.epochs = approx_epochs;
  c.batch_size = approx_batch_size;
  c.weight_decay = approx_weight_decay;
  c.momentum = train.momentum;
  c.base_lr = lr;
  return c;
}

MiuConfig MethodSettings::Miu(bool reweight, std::uint64_t seed) const {
  MiuConfig c;
  c.train = ApproxConfig(miu_lr, seed);
  c.forget_epochs = miu_forget_epochs;
  c.lambda = miu_lambda;
  c.forget_lr_scale = miu_forget_lr_scale;
  c.mine_steps_first = miu_mine_steps_first;
  c.mine_steps_rest = miu_mine_steps_rest;
  c.mine_batch_size = miu_mine_batch_size;
  c.mine_lr = miu_mine_lr;
  c.marginal_rule = miu_marginal;
  c.reweight = reweight;
  c.retain_term = miu_retain_term;
  c.unlearn_term = miu_unlearn_term;
  c.calibration_term = miu_calibration_term;
  return c;
}

BaselineConfig MethodSettings::Baseline(double lr, bool reweight,
                                        std::uint64_t seed) const {
  BaselineConfig c;
  c.train = ApproxConfig(lr, seed);
  c.l1_gamma = l1_gamma;
  c.salun_prune_fraction = salun_prune_fraction;
  c.scrub_stop_epoch = scrub_stop_epoch;
  c.scrub_ce_weight = scrub_ce_weight;
  c.scrub_kl_weight = scrub_kl_weight;
  c.reweight = reweight;
  return c;
}

SyntheticConfig CelebaLikeScenario() {
  SyntheticConfig c;
  c.num_classes = 2;
  c.num_attrs = 2;
  c.feature_dim = 16;
  c.proportions = {0.44, 0.41, 0.14, 0.01};
  c.spurious = 0.6;
  c.class_separation = 2.0;
  c.attr_separation = 8.0;
  c.noise = 1.2;
  c.n_train = 8000;
  c.n_val = 1000;
  c.n_test = 2000;
  return c;
}

void ExperimentPlan::Validate() const {
  data.Validate();
  forget.Validate(data.num_groups());
  if (seeds.empty()) throw PlanError("plan needs at least one seed");
  if (methods.empty()) throw PlanError("plan needs at least one method");
  if (std::find(methods.begin(), methods.end(), gold) == methods.end()) {
    throw PlanError("gold standard " + gold.Label() +
                    " is not one of the plan's methods");
  }
  for (const auto& m : methods) {
    if (m.reweight && (m.method == Method::kPretrain ||
                       m.method == Method::kGroupDro)) {
      throw PlanError(m.Label() + " does not support reweighting");
    }
  }
  if (forget.entries.empty()) throw PlanError("plan needs a forget spec");
}

std::string ExperimentPlan::Canonical() const {
  std::ostringstream os;
  auto kv = [&](const std::string& k, const std::string& v) {
    os << k << "=" << v << "\n";
  };
  kv("data.num_classes", std::to_string(data.num_classes));
  kv("data.num_attrs", std::to_string(data.num_attrs));
  kv("data.feature_dim", std::to_string(data.feature_dim));
  kv("data.noise", Exact(data.noise));
  kv("data.class_separation", Exact(data.class_separation));
  kv("data.attr_separation", Exact(data.attr_separation));
  kv("data.spurious", Exact(data.spurious));
  std::string props;
  for (double p : data.proportions) props += Exact(p) + ",";
  kv("data.proportions", props);
  kv("data.n_train", std::to_string(data.n_train));
  kv("data.n_val", std::to_string(data.n_val));
  kv("data.n_test", std::to_string(data.n_test));
  kv("model.hidden_dim", std::to_string(shape.hidden_dim));
  kv("model.feature_dim", std::to_string(shape.feature_dim));
  kv("model.mine_hidden", std::to_string(shape.mine_hidden));
  const auto& s = settings;
  kv("train.epochs", std::to_string(s.train.epochs));
  kv("train.batch_size", std::to_string(s.train.batch_size));
  kv("train.lr", Exact(s.train.base_lr));
  kv("train.momentum", Exact(s.train.momentum));
  kv("train.weight_decay", Exact(s.train.weight_decay));
  kv("train.warmup_epochs", std::to_string(s.train.warmup_epochs));
  kv("approx.epochs", std::to_string(s.approx_epochs));
  kv("approx.batch_size", std::to_string(s.approx_batch_size));
  kv("approx.weight_decay", Exact(s.approx_weight_decay));
  kv("finetune.lr", Exact(s.finetune_lr));
  kv("l1sparse.lr", Exact(s.l1_lr));
  kv("l1sparse.gamma", Exact(s.l1_gamma));
  kv("salun.lr", Exact(s.salun_lr));
  kv("salun.prune_fraction", Exact(s.salun_prune_fraction));
  kv("scrub.lr", Exact(s.scrub_lr));
  kv("scrub.stop_epoch", std::to_string(s.scrub_stop_epoch));
  kv("scrub.ce_weight", Exact(s.scrub_ce_weight));
  kv("scrub.kl_weight", Exact(s.scrub_kl_weight));
  kv("gdro.eta", Exact(s.gdro_eta));
  kv("miu.lr", Exact(s.miu_lr));
  kv("miu.lambda", Exact(s.miu_lambda));
  kv("miu.forget_lr_scale", Exact(s.miu_forget_lr_scale));
  kv("miu.forget_epochs", std::to_string(s.miu_forget_epochs));
  kv("miu.mine_steps_first", std::to_string(s.miu_mine_steps_first));
  kv("miu.mine_steps_rest", std::to_string(s.miu_mine_steps_rest));
  kv("miu.mine_batch_size", std::to_string(s.miu_mine_batch_size));
  kv("miu.mine_lr", Exact(s.miu_mine_lr));
  kv("miu.marginal",
     s.miu_marginal == MarginalRule::kPermute ? "permute" : "uniform");
  kv("miu.retain_term", s.miu_retain_term ? "true" : "false");
  kv("miu.unlearn_term", s.miu_unlearn_term ? "true" : "false");
  kv("miu.calibration_term", s.miu_calibration_term ? "true" : "false");
  std::string fs;
  for (const auto& e : forget.entries) {
    fs += std::to_string(e.group) + ":" + Exact(e.ratio) + ",";
  }
  kv("forget", fs);
  std::string ms;
  for (const auto& m : methods) ms += m.Label() + ",";
  kv("experiment.methods", ms);
  std::string ss;
  for (auto v : seeds) ss += std::to_string(v) + ",";
  kv("experiment.seeds", ss);
  kv("experiment.gold", gold.Label());
  return os.str();
}

std::uint64_t ExperimentPlan::Hash() const { return Fnv1a(Canonical()); }

ExperimentPlan PlanFromConfig(const Config& c) {
  ExperimentPlan p;
  SyntheticConfig& d = p.data;
  d.num_classes = static_cast<int>(c.GetInt("data.num_classes", d.num_classes));
  d.num_attrs = static_cast<int>(c.GetInt("data.num_attrs", d.num_attrs));
  d.feature_dim = c.GetUint("data.feature_dim", d.feature_dim);
  d.noise = c.GetDouble("data.noise", d.noise);
  d.class_separation = c.GetDouble("data.class_separation", d.class_separation);
  d.attr_separation = c.GetDouble("data.attr_separation", d.attr_separation);
  d.spurious = c.GetDouble("data.spurious", d.spurious);
  if (c.Has("data.proportions")) {
    d.proportions = c.GetDoubleList("data.proportions", {});
  } else if (d.num_groups() != 4) {
    d.proportions.assign(d.num_groups(), 1.0 / d.num_groups());
  }
  d.n_train = c.GetUint("data.n_train", d.n_train);
  d.n_val = c.GetUint("data.n_val", d.n_val);
  d.n_test = c.GetUint("data.n_test", d.n_test);

  p.shape.input_dim = d.feature_dim;
  p.shape.num_classes = d.num_classes;
  p.shape.num_groups = d.num_groups();
  p.shape.hidden_dim = c.GetUint("model.hidden_dim", p.shape.hidden_dim);
  p.shape.feature_dim = c.GetUint("model.feature_dim", p.shape.feature_dim);
  p.shape.mine_hidden = c.GetUint("model.mine_hidden", p.shape.mine_hidden);

  MethodSettings& s = p.settings;
  s.train.epochs = c.GetUint("train.epochs", s.train.epochs);
  s.train.batch_size = c.GetUint("train.batch_size", s.train.batch_size);
  s.train.base_lr = c.GetDouble("train.lr", s.train.base_lr);
  s.train.momentum = c.GetDouble("train.momentum", s.train.momentum);
  s.train.weight_decay = c.GetDouble("train.weight_decay", s.train.weight_decay);
  s.train.warmup_epochs = c.GetUint("train.warmup_epochs", s.train.warmup_epochs);
  s.approx_epochs = c.GetUint("approx.epochs", s.approx_epochs);
  s.approx_batch_size = c.GetUint("approx.batch_size", s.approx_batch_size);
  s.approx_weight_decay = c.GetDouble("approx.weight_decay", s.approx_weight_decay);
  s.finetune_lr = c.GetDouble("finetune.lr", s.finetune_lr);
  s.l1_lr = c.GetDouble("l1sparse.lr", s.l1_lr);
  s.l1_gamma = c.GetDouble("l1sparse.gamma", s.l1_gamma);
  s.salun_lr = c.GetDouble("salun.lr", s.salun_lr);
  s.salun_prune_fraction =
      c.GetDouble("salun.prune_fraction", s.salun_prune_fraction);
  s.scrub_lr = c.GetDouble("scrub.lr", s.scrub_lr);
  s.scrub_stop_epoch = c.GetUint("scrub.stop_epoch", s.scrub_stop_epoch);
  s.scrub_ce_weight = c.GetDouble("scrub.ce_weight", s.scrub_ce_weight);
  s.scrub_kl_weight = c.GetDouble("scrub.kl_weight", s.scrub_kl_weight);
  s.gdro_eta = c.GetDouble("gdro.eta", s.gdro_eta);
  s.miu_lr = c.GetDouble("miu.lr", s.miu_lr);
  s.miu_lambda = c.GetDouble("miu.lambda", s.miu_lambda);
  s.miu_forget_lr_scale =
      c.GetDouble("miu.forget_lr_scale", s.miu_forget_lr_scale);
  s.miu_forget_epochs = c.GetUint("miu.forget_epochs", s.miu_forget_epochs);
  s.miu_mine_steps_first =
      c.GetUint("miu.mine_steps_first", s.miu_mine_steps_first);
  s.miu_mine_steps_rest = c.GetUint("miu.mine_steps_rest", s.miu_mine_steps_rest);
  s.miu_mine_batch_size =
      c.GetUint("miu.mine_batch_size", s.miu_mine_batch_size);
  s.miu_mine_lr = c.GetDouble("miu.mine_lr", s.miu_mine_lr);
  const std::string marginal = c.GetString("miu.marginal", "uniform");
  if (marginal == "uniform") {
    s.miu_marginal = MarginalRule::kUniformRandom;
  } else if (marginal == "permute") {
    s.miu_marginal = MarginalRule::kPermute;
  } else {
    throw ConfigError("miu.marginal must be 'uniform' or 'permute'");
  }
  s.miu_retain_term = c.GetBool("miu.retain_term", s.miu_retain_term);
  s.miu_unlearn_term = c.GetBool("miu.unlearn_term", s.miu_unlearn_term);
  s.miu_calibration_term =
      c.GetBool("miu.calibration_term", s.miu_calibration_term);

  if (c.Has("forget.groups")) {
    const double ratio = c.GetDouble("forget.ratio", 0.5);
    p.forget.entries.clear();
    for (const auto& g : c.GetStringList("forget.groups", {})) {
      try {
        p.forget.entries.push_back({std::stoi(g), ratio});
      } catch (const std::logic_error&) {
        throw ConfigError("forget.groups: '" + g + "' is not a group index");
      }
    }
  } else {
    const double ratio = c.GetDouble("forget.ratio", 0.5);
    // Default forget group: the smallest training group.
    const auto it = std::min_element(d.proportions.begin(), d.proportions.end());
    p.forget.entries = {
        {static_cast<int>(it - d.proportions.begin()), ratio}};
  }

  const std::vector<std::string> default_methods = {
      "pretrain", "retrain",   "gdro",     "retrain+rw", "finetune",
      "l1sparse", "salun",     "scrub",    "miu",        "finetune+rw",
      "l1sparse+rw", "salun+rw", "scrub+rw", "miu+rw"};
  p.methods.clear();
  for (const auto& m : c.GetStringList("experiment.methods", default_methods)) {
    p.methods.push_back(ParseMethodSpec(m));
  }
  p.gold = ParseMethodSpec(c.GetString("experiment.gold", "retrain+rw"));
  p.seeds.clear();
  for (const auto& sd : c.GetStringList("experiment.seeds", {"0", "1", "2"})) {
    try {
      p.seeds.push_back(std::stoull(sd));
    } catch (const std::logic_error&) {
      throw ConfigError("experiment.seeds: '" + sd + "' is not a seed");
    }
  }
  if (const char* env = std::getenv("UNLEARN_LAB_SEED")) {
    try {
      p.seeds = {std::stoull(env)};
    } catch (const std::logic_error&) {
      throw ConfigError("UNLEARN_LAB_SEED is not an unsigned integer");
    }
  }
  p.output_dir = c.GetString("experiment.output_dir", p.output_dir);
  return p;
}

EvaluationSets SeedContext::Sets(const ForgetSpec& spec) const {
  EvaluationSets s;
  s.remaining = &forget.remaining;
  s.forget = &forget.forget;
  s.val = &splits.val;
  s.test = &splits.test;
  s.forget_groups = spec.groups();
  return s;
}

SeedContext PrepareSeed(const ExperimentPlan& plan, std::uint64_t seed) {
  SeedContext ctx;
  ctx.seed = seed;
  SyntheticConfig data = plan.data;
  data.seed = seed;
  ctx.splits = GenerateSynthetic(data);
  ctx.train_stats = GroupFrequencies(ctx.splits.train);
  ctx.forget = SplitForget(ctx.splits.train, plan.forget, seed);
  TrainConfig tc = plan.settings.train;
  tc.seed = seed;
  ctx.pretrained = Pretrain(ctx.splits.train, plan.shape, tc);
  ctx.pretrained.config_hash = plan.Hash();
  return ctx;
}

ModelCheckpoint RunMethod(const ExperimentPlan& plan, const SeedContext& ctx,
                          const MethodSpec& spec) {
  const MethodSettings& s = plan.settings;
  const std::uint64_t seed = ctx.seed;
  const GroupedDataset& remaining = ctx.forget.remaining;
  const GroupedDataset& forget = ctx.forget.forget;
  const GroupStats* stats = spec.reweight ? &ctx.train_stats : nullptr;
  TrainConfig tc = s.train;
  tc.seed = seed;
  ModelCheckpoint out;
  switch (spec.method) {
    case Method::kPretrain:
      out = ctx.pretrained;
      break;
    case Method::kRetrain:
      out = Retrain(remaining, plan.shape, tc, stats);
      break;
    case Method::kGroupDro:
      out = GroupDroRetrain(remaining, plan.shape, tc, s.gdro_eta);
      break;
    case Method::kFineTune:
      out = FineTune(ctx.pretrained, remaining, s.ApproxConfig(s.finetune_lr, seed),
                     stats);
      break;
    case Method::kL1Sparse:
      out = L1Sparse(ctx.pretrained, remaining, s.l1_gamma,
                     s.ApproxConfig(s.l1_lr, seed), stats);
      break;
    case Method::kSalun:
      out = SalunLite(ctx.pretrained, remaining, forget,
                      s.Baseline(s.salun_lr, spec.reweight, seed), stats);
      break;
    case Method::kScrub:
      out = ScrubLite(ctx.pretrained, remaining, forget,
                      s.Baseline(s.scrub_lr, spec.reweight, seed), stats);
      break;
    case Method::kMiu:
      out = Miu(ctx.pretrained, ctx.splits.train, remaining, forget,
                s.Miu(spec.reweight, seed));
      break;
  }
  out.config_hash = plan.Hash();
  return out;
}

TableResult RunTable(const ExperimentPlan& plan) {
  plan.Validate();
  TableResult table;
  table.config_hash = plan.Hash();
  for (const auto& m : plan.methods) table.rows.push_back({m, {}, {}});
  for (std::uint64_t seed : plan.seeds) {
    const SeedContext ctx = PrepareSeed(plan, seed);
    const EvaluationSets sets = ctx.Sets(plan.forget);
    for (auto& row : table.rows) {
      try {
        spdlog::info("seed {}: running {}", seed, row.spec.Label());
        const ModelCheckpoint m = RunMethod(plan, ctx, row.spec);
        row.report.per_seed.push_back({seed, EvaluateAll(m, sets, seed)});
      } catch (const Error& e) {
        throw PlanError("run failed for (" + row.spec.Label() + ", seed " +
                        std::to_string(seed) + "): " + e.what());
      }
    }
  }
  for (const auto& row : table.rows) {
    if (row.spec == plan.gold) table.gold = row.report;
  }
  for (auto& row : table.rows) row.gap = AvgGap(row.report, table.gold);
  return table;
}

namespace {

std::string PrefixHeader(const CsvPrefix& prefix) {
  std::string out;
  for (const auto& [name, value] : prefix) out += name + ",";
  return out;
}

std::string PrefixValues(const CsvPrefix& prefix) {
  std::string out;
  for (const auto& [name, value] : prefix) out += value + ",";
  return out;
}

}  // namespace

std::string MetricsCsv(const TableResult& table, const CsvPrefix& prefix,
                       bool header) {
  std::ostringstream os;
  if (header) {
    os << PrefixHeader(prefix) << "method,reweight,seed";
    for (const char* n : kMetricNames) os << "," << n;
    os << ",config_hash\n";
  }
  const std::string hash = Hex(table.config_hash);
  for (const auto& row : table.rows) {
    const std::string lead = PrefixValues(prefix) +
                             MethodName(row.spec.method) + "," +
                             (row.spec.reweight ? "1" : "0") + ",";
    for (const auto& s : row.report.per_seed) {
      os << lead << s.seed;
      for (double v : s.values.v) os << "," << Fixed(v);
      os << "," << hash << "\n";
    }
    const MetricValues mean = row.report.Mean();
    os << lead << "mean";
    for (double v : mean.v) os << "," << Fixed(v);
    os << "," << hash << "\n";
  }
  return os.str();
}

std::string SummaryCsv(const TableResult& table, const CsvPrefix& prefix,
                       bool header) {
  std::ostringstream os;
  if (header) {
    os << PrefixHeader(prefix)
       << "method,reweight,metric,value,delta,avg_gap,config_hash\n";
  }
  const std::string hash = Hex(table.config_hash);
  for (const auto& row : table.rows) {
    const MetricValues mean = row.report.Mean();
    for (std::size_t k = 0; k < kNumGapMetrics; ++k) {
      os << PrefixValues(prefix) << MethodName(row.spec.method) << ","
         << (row.spec.reweight ? "1" : "0") << "," << kMetricNames[k] << ","
         << Fixed(mean[k]) << "," << Fixed(row.gap.deltas[k]) << ","
         << Fixed(row.gap.avg_gap) << "," << hash << "\n";
    }
  }
  return os.str();
}

SweepResult SweepRatio(const ExperimentPlan& plan,
                       const std::vector<double>& ratios) {
  SweepResult out;
  for (double r : ratios) {
    ExperimentPlan p = plan;
    for (auto& e : p.forget.entries) e.ratio = r;
    out.ratios.push_back(r);
    out.tables.push_back(RunTable(p));
  }
  return out;
}

ForgetSpec ForgetSpecForGroupCount(int num_classes, int num_attrs, int count,
                                   double ratio) {
  const int groups = num_classes * num_attrs;
  if (count < 1 || count > groups) {
    throw PlanError("cannot forget from " + std::to_string(count) +
                    " groups with only " + std::to_string(groups) + " available");
  }
  ForgetSpec spec;
  const int side = static_cast<int>(std::lround(std::sqrt(count)));
  if (side * side == count && side <= num_classes && side <= num_attrs) {
    for (int y = 0; y < side; ++y) {
      for (int a = 0; a < side; ++a) {
        spec.entries.push_back({GroupIndex(y, a, num_attrs), ratio});
      }
    }
  } else {
    for (int g = 0; g < count; ++g) spec.entries.push_back({g, ratio});
  }
  return spec;
}

MultiGroupResult MultiGroup(const ExperimentPlan& plan,
                            const std::vector<int>& group_counts) {
  MultiGroupResult out;
  for (int k : group_counts) {
    ExperimentPlan p = plan;
    p.forget = ForgetSpecForGroupCount(plan.data.num_classes,
                                       plan.data.num_attrs, k, 0.5);
    out.group_counts.push_back(k);
    out.tables.push_back(RunTable(p));
  }
  return out;
}

std::vector<AblationRow> DefaultAblationRows() {
  std::vector<AblationRow> rows = {
      {true, true, false, false, 1.0},
      {true, true, true, false, 1.0},
      {false, true, true, false, 1.0},
      {true, true, true, true, 1.0},
  };
  for (double lambda : {0.0, 1.0, 5.0, 10.0}) {
    rows.push_back({true, true, true, true, lambda});
  }
  return rows;
}

AblationResult Ablate(const AblationPlan& plan) {
  const ExperimentPlan& base = plan.base;
  base.data.Validate();
  base.forget.Validate(base.data.num_groups());
  if (base.seeds.empty()) throw PlanError("plan needs at least one seed");
  for (const auto& r : plan.rows) {
    if (!r.retain && !r.unlearn && !(r.calibration && r.lambda > 0.0)) {
      throw PlanError("ablation row with every term disabled");
    }
  }
  AblationResult out;
  out.rows = plan.rows;
  out.reports.resize(plan.rows.size());
  out.config_hash = base.Hash();
  MetricsReport gold;
  for (std::uint64_t seed : base.seeds) {
    const SeedContext ctx = PrepareSeed(base, seed);
    const EvaluationSets sets = ctx.Sets(base.forget);
    const ModelCheckpoint g = RunMethod(base, ctx, base.gold);
    gold.per_seed.push_back({seed, EvaluateAll(g, sets, seed)});
    for (std::size_t i = 0; i < plan.rows.size(); ++i) {
      const AblationRow& r = plan.rows[i];
      ExperimentPlan p = base;
      p.settings.miu_retain_term = r.retain;
      p.settings.miu_unlearn_term = r.unlearn;
      p.settings.miu_calibration_term = r.calibration;
      p.settings.miu_lambda = r.lambda;
      const ModelCheckpoint m = RunMethod(p, ctx, {Method::kMiu, r.reweight});
      out.reports[i].per_seed.push_back({seed, EvaluateAll(m, sets, seed)});
    }
  }
  for (const auto& rep : out.reports) out.gaps.push_back(AvgGap(rep, gold));
  return out;
}

std::string AblationCsv(const AblationResult& result) {
  std::ostringstream os;
  os << "retain,unlearn,calibration,reweight,lambda,UA,GA,avg_gap,config_hash\n";
  const std::string hash = Hex(result.config_hash);
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const AblationRow& r = result.rows[i];
    const MetricValues mean = result.reports[i].Mean();
    os << r.retain << "," << r.unlearn << "," << r.calibration << ","
       << r.reweight << "," << Fixed(r.lambda) << "," << Fixed(mean[kUA]) << ","
       << Fixed(mean[kGA]) << "," << Fixed(result.gaps[i].avg_gap) << ","
       << hash << "\n";
  }
  return os.str();
}

double ProbeAccuracy(const ParameterSet& backbone, const GroupedDataset& data,
                     std::uint64_t seed) {
  if (data.size() < 2) throw MetricError("probe needs at least two examples");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(DeriveSeed(seed, "probe:split"));
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_fit = std::max<std::size_t>(1, (order.size() * 7) / 10);
  const std::vector<std::size_t> fit(order.begin(), order.begin() + n_fit);
  const std::vector<std::size_t> held(order.begin() + n_fit, order.end());
  if (held.empty()) throw MetricError("probe held-out split is empty");

  Matrix z_fit = ComputeFeatures(backbone, data.Features(fit));
  Matrix z_held = ComputeFeatures(backbone, data.Features(held));
  // Standardize with the fit split's statistics.
  for (std::size_t c = 0; c < z_fit.cols(); ++c) {
    double mean = 0.0, var = 0.0;
    for (std::size_t r = 0; r < z_fit.rows(); ++r) mean += z_fit(r, c);
    mean /= static_cast<double>(z_fit.rows());
    for (std::size_t r = 0; r < z_fit.rows(); ++r) {
      var += (z_fit(r, c) - mean) * (z_fit(r, c) - mean);
    }
    const double sd = std::sqrt(var / static_cast<double>(z_fit.rows())) + 1e-8;
    for (std::size_t r = 0; r < z_fit.rows(); ++r) z_fit(r, c) = (z_fit(r, c) - mean) / sd;
    for (std::size_t r = 0; r < z_held.rows(); ++r) {
      z_held(r, c) = (z_held(r, c) - mean) / sd;
    }
  }
  const std::vector<int> g_fit = data.Groups(fit);
  const std::vector<int> g_held = data.Groups(held);
  ParameterSet probe = InitMlp({z_fit.cols(), static_cast<std::size_t>(data.num_groups())},
                               "probe", DeriveSeed(seed, "probe:init"));
  SgdOptimizer opt(probe, 0.9, 0.0);
  for (int step = 0; step < 500; ++step) {
    const MlpForward f = ForwardMlp(probe, z_fit);
    const LossAndGrad ce = SoftmaxCrossEntropy(f.outputs, g_fit);
    opt.Step(probe, BackwardMlp(probe, f.cache, ce.grad).grads, 0.1);
  }
  const std::vector<int> pred = ArgmaxRows(ForwardMlp(probe, z_held).outputs);
  return AccuracyFromPredictions(pred, g_held);
}

ProbeResult ProbeValidation(const ModelCheckpoint& before,
                            const ModelCheckpoint& after,
                            const GroupedDataset& forget, std::uint64_t seed) {
  if (before.backbone.layers.back().out_dim() !=
      after.backbone.layers.back().out_dim()) {
    throw ShapeError("checkpoints have different feature widths");
  }
  ProbeResult r;
  const GroupStats stats = GroupFrequencies(forget);
  const auto present = std::count_if(stats.counts.begin(), stats.counts.end(),
                                     [](std::size_t c) { return c > 0; });
  r.degenerate = present <= 1;
  if (r.degenerate) {
    spdlog::warn("probe check on a single-group forget set is trivially 100%");
  }
  r.before = ProbeAccuracy(before.backbone, forget, seed);
  r.after = ProbeAccuracy(after.backbone, forget, seed);
  return r;
}

std::string ManifestJson(const std::string& command, std::uint64_t config_hash,
                         double wall_seconds,
                         const std::vector<std::string>& outputs) {
  nlohmann::json j;
  j["command"] = command;
  j["config_hash"] = Hex(config_hash);
  j["version"] = "unlearn-lab 0.1.0";
  j["compiler"] = __VERSION__;
  j["wall_seconds"] = wall_seconds;
  j["outputs"] = outputs;
  return j.dump(2) + "\n";
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace unlearn
