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

// unlearn_lab: command-line front end for data generation, training,
// unlearning, evaluation and the experiment drivers.

#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "unlearn/config.h"
#include "unlearn/error.h"
#include "unlearn/harness.h"

namespace {

using namespace unlearn;

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::string seeds;
  bool verbose = false;

  // unlearn / evaluate
  std::string method = "miu";
  bool reweight = false;
  double lambda = -1.0;
  double ratio = -1.0;
  std::string groups;
  std::string checkpoint;

  std::string ratios = "0.1,0.5,0.9";
  std::string counts = "1,4";
};

std::string Join(const std::vector<std::string>& args) {
  std::string out;
  for (const auto& a : args) out += (out.empty() ? "" : " ") + a;
  return out;
}

std::string Format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

// Config file first, then flag-derived keys, then --set overrides.
Config BuildConfig(const Options& o) {
  Config c = o.config_path.empty() ? Config{} : Config::Load(o.config_path);
  if (!o.seeds.empty()) c.Set("experiment.seeds", o.seeds);
  if (!o.out_dir.empty()) c.Set("experiment.output_dir", o.out_dir);
  if (o.lambda >= 0.0) c.Set("miu.lambda", Format("%.17g", o.lambda));
  if (o.ratio >= 0.0) c.Set("forget.ratio", Format("%.17g", o.ratio));
  if (!o.groups.empty()) c.Set("forget.groups", o.groups);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    c.Set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return c;
}

class Run {
 public:
  Run(const Options& o, std::string command)
      : plan_(PlanFromConfig(BuildConfig(o))),
        command_(std::move(command)),
        start_(std::chrono::steady_clock::now()) {
    std::filesystem::create_directories(plan_.output_dir);
  }

  ExperimentPlan& plan() { return plan_; }

  std::string Path(const std::string& name) const {
    return (std::filesystem::path(plan_.output_dir) / name).string();
  }

  void Write(const std::string& name, const std::string& text) {
    WriteTextFile(Path(name), text);
    outputs_.push_back(Path(name));
    spdlog::info("wrote {}", Path(name));
  }

  void Record(const std::string& path) { outputs_.push_back(path); }

  void Finish(std::uint64_t config_hash) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    WriteTextFile(Path("manifest.json"),
                  ManifestJson(command_, config_hash, secs, outputs_));
  }

  std::uint64_t FirstSeed() const { return plan_.seeds.front(); }

 private:
  ExperimentPlan plan_;
  std::string command_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> outputs_;
};

// A one-row table so single-checkpoint evaluations share the metrics schema.
TableResult SingleRow(const MethodSpec& spec, std::uint64_t seed,
                      const MetricValues& values, std::uint64_t hash) {
  TableResult t;
  t.config_hash = hash;
  TableRow row{spec, {}, {}};
  row.report.per_seed.push_back({seed, values});
  t.rows.push_back(row);
  return t;
}

void GenerateData(Run& run) {
  SyntheticConfig data = run.plan().data;
  data.seed = run.FirstSeed();
  const DatasetSplits s = GenerateSynthetic(data);
  for (const auto& [name, ds] : std::map<std::string, const GroupedDataset*>{
           {"train.csv", &s.train}, {"val.csv", &s.val}, {"test.csv", &s.test}}) {
    WriteDatasetCsv(*ds, run.Path(name));
    run.Record(run.Path(name));
  }
  run.Finish(run.plan().Hash());
}

void PretrainCommand(Run& run) {
  const SeedContext ctx = PrepareSeed(run.plan(), run.FirstSeed());
  SaveCheckpoint(ctx.pretrained, run.Path("pretrained.ckpt"));
  run.Record(run.Path("pretrained.ckpt"));
  run.Finish(run.plan().Hash());
}

void UnlearnCommand(Run& run, const Options& o) {
  MethodSpec spec = ParseMethodSpec(o.method);
  spec.reweight = spec.reweight || o.reweight;
  SeedContext ctx = PrepareSeed(run.plan(), run.FirstSeed());
  if (!o.checkpoint.empty()) ctx.pretrained = LoadCheckpoint(o.checkpoint);
  const ModelCheckpoint m = RunMethod(run.plan(), ctx, spec);
  const std::string name = spec.Label() + ".ckpt";
  SaveCheckpoint(m, run.Path(name));
  run.Record(run.Path(name));
  const MetricValues v = EvaluateAll(m, ctx.Sets(run.plan().forget), ctx.seed);
  run.Write("metrics.csv", MetricsCsv(SingleRow(spec, ctx.seed, v, run.plan().Hash())));
  run.Finish(run.plan().Hash());
}

void EvaluateCommand(Run& run, const Options& o) {
  if (o.checkpoint.empty()) throw ConfigError("evaluate needs --checkpoint");
  MethodSpec spec = ParseMethodSpec(o.method);
  spec.reweight = spec.reweight || o.reweight;
  const ModelCheckpoint m = LoadCheckpoint(o.checkpoint);
  SyntheticConfig data = run.plan().data;
  const std::uint64_t seed = run.FirstSeed();
  data.seed = seed;
  const DatasetSplits s = GenerateSynthetic(data);
  const ForgetSplit f = SplitForget(s.train, run.plan().forget, seed);
  EvaluationSets sets{&f.remaining, &f.forget, &s.val, &s.test,
                      run.plan().forget.groups()};
  const MetricValues v = EvaluateAll(m, sets, seed);
  run.Write("metrics.csv", MetricsCsv(SingleRow(spec, seed, v, m.config_hash)));
  run.Finish(m.config_hash);
}

void TableCommand(Run& run) {
  const TableResult t = RunTable(run.plan());
  run.Write("metrics.csv", MetricsCsv(t));
  run.Write("summary.csv", SummaryCsv(t));
  run.Finish(t.config_hash);
}

std::vector<double> ParseDoubles(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : SplitList(text)) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::logic_error&) {
      throw ConfigError(what + ": '" + item + "' is not a number");
    }
  }
  return out;
}

void SweepCommand(Run& run, const Options& o) {
  const SweepResult r = SweepRatio(run.plan(), ParseDoubles(o.ratios, "--ratios"));
  std::string metrics, summary;
  for (std::size_t i = 0; i < r.ratios.size(); ++i) {
    const CsvPrefix prefix = {{"ratio", Format("%.4f", r.ratios[i])}};
    metrics += MetricsCsv(r.tables[i], prefix, i == 0);
    summary += SummaryCsv(r.tables[i], prefix, i == 0);
  }
  run.Write("sweep_metrics.csv", metrics);
  run.Write("sweep_summary.csv", summary);
  run.Finish(run.plan().Hash());
}

void MultiGroupCommand(Run& run, const Options& o) {
  std::vector<int> counts;
  for (double c : ParseDoubles(o.counts, "--counts")) counts.push_back(static_cast<int>(c));
  const MultiGroupResult r = MultiGroup(run.plan(), counts);
  std::string metrics, summary;
  for (std::size_t i = 0; i < r.group_counts.size(); ++i) {
    const CsvPrefix prefix = {{"groups", std::to_string(r.group_counts[i])}};
    metrics += MetricsCsv(r.tables[i], prefix, i == 0);
    summary += SummaryCsv(r.tables[i], prefix, i == 0);
  }
  run.Write("multigroup_metrics.csv", metrics);
  run.Write("multigroup_summary.csv", summary);
  run.Finish(run.plan().Hash());
}

void AblateCommand(Run& run) {
  const AblationResult r = Ablate({run.plan(), DefaultAblationRows()});
  run.Write("ablation.csv", AblationCsv(r));
  run.Finish(r.config_hash);
}

// Probe accuracy before and after the MIU forget passes alone and after the
// full method, per seed.
void ProbeCommand(Run& run) {
  const ExperimentPlan& plan = run.plan();
  std::ostringstream os;
  os << "seed,before,after_forget_passes,after_full_miu,degenerate,config_hash\n";
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(plan.Hash()));
  for (std::uint64_t seed : plan.seeds) {
    const SeedContext ctx = PrepareSeed(plan, seed);
    MiuConfig cfg = plan.settings.Miu(false, seed);
    cfg.retain_term = false;
    cfg.calibration_term = false;
    cfg.train.epochs = cfg.forget_epochs;
    const ModelCheckpoint forgot = Miu(ctx.pretrained, ctx.splits.train,
                                       ctx.forget.remaining, ctx.forget.forget, cfg);
    const ProbeResult r = ProbeValidation(ctx.pretrained, forgot, ctx.forget.forget, seed);
    const ModelCheckpoint full = RunMethod(plan, ctx, {Method::kMiu, false});
    const double full_probe = ProbeAccuracy(full.backbone, ctx.forget.forget, seed);
    os << seed << "," << Format("%.4f", r.before) << "," << Format("%.4f", r.after)
       << "," << Format("%.4f", full_probe) << "," << (r.degenerate ? 1 : 0) << ","
       << hash << "\n";
  }
  run.Write("probe.csv", os.str());
  run.Finish(plan.Hash());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Group-robust machine unlearning lab"};
  app.require_subcommand(1);
  Options o;
  app.add_option("-c,--config", o.config_path, "key=value configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--set", o.overrides, "override a configuration key (key=value)");
  app.add_option("-o,--out", o.out_dir, "output directory");
  app.add_option("--seeds", o.seeds, "comma separated seeds");
  app.add_flag("-v,--verbose", o.verbose, "log progress");

  auto* gen = app.add_subcommand("generate-data", "write train/val/test CSVs");
  auto* pre = app.add_subcommand("pretrain", "train the original model");
  auto* unl = app.add_subcommand("unlearn", "run one (un)learning method");
  unl->add_option("--method", o.method,
                  "retrain, gdro, finetune, l1sparse, salun, scrub or miu (+rw allowed)");
  unl->add_flag("--reweight", o.reweight, "apply REWEIGHT sampling");
  unl->add_option("--lambda", o.lambda, "MIU calibration weight");
  unl->add_option("--ratio", o.ratio, "unlearning ratio per forget group");
  unl->add_option("--groups", o.groups, "comma separated forget groups");
  unl->add_option("--checkpoint", o.checkpoint, "original model (default: pretrain)");
  auto* ev = app.add_subcommand("evaluate", "metric suite for a checkpoint");
  ev->add_option("--checkpoint", o.checkpoint, "checkpoint to evaluate")->required();
  ev->add_option("--method", o.method, "label for the CSV row");
  ev->add_flag("--reweight", o.reweight, "label the row as reweighted");
  ev->add_option("--ratio", o.ratio, "unlearning ratio per forget group");
  ev->add_option("--groups", o.groups, "comma separated forget groups");
  auto* tab = app.add_subcommand("table", "every method over every seed");
  auto* sw = app.add_subcommand("sweep-ratio", "tables over unlearning ratios");
  sw->add_option("--ratios", o.ratios, "comma separated ratios");
  auto* mg = app.add_subcommand("multi-group", "tables over forget group counts");
  mg->add_option("--counts", o.counts, "comma separated group counts");
  auto* abl = app.add_subcommand("ablate", "MIU component and lambda ablation");
  auto* probe = app.add_subcommand("probe-check", "group probe on forget features");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(o.verbose ? spdlog::level::info : spdlog::level::warn);

  const std::vector<std::string> args(argv, argv + argc);
  try {
    Run run(o, Join(args));
    if (*gen) GenerateData(run);
    if (*pre) PretrainCommand(run);
    if (*unl) UnlearnCommand(run, o);
    if (*ev) EvaluateCommand(run, o);
    if (*tab) TableCommand(run);
    if (*sw) SweepCommand(run, o);
    if (*mg) MultiGroupCommand(run, o);
    if (*abl) AblateCommand(run);
    if (*probe) ProbeCommand(run);
  } catch (const unlearn::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const unlearn::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
