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
#include <cstdlib>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "json.hpp"
#include "unlearn/error.h"
#include "unlearn/harness.h"

namespace unlearn {
namespace {

// Small enough to run a few methods in well under a second.
constexpr const char* kTinyConfig = R"(
data.n_train = 400
data.n_val = 100
data.n_test = 200
data.proportions = 0.4, 0.3, 0.2, 0.1
model.hidden_dim = 8
model.feature_dim = 4
model.mine_hidden = 8
train.epochs = 2
approx.epochs = 2
scrub.stop_epoch = 1
miu.forget_epochs = 1
miu.mine_steps_first = 5
miu.mine_steps_rest = 2
miu.mine_batch_size = 32
forget.groups = 3
forget.ratio = 0.5
experiment.methods = retrain+rw, finetune, miu
experiment.seeds = 4
)";

ExperimentPlan TinyPlan() {
  unsetenv("UNLEARN_LAB_SEED");
  return PlanFromConfig(Config::Parse(kTinyConfig));
}

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

TEST(MethodSpecTest, LabelsRoundTrip) {
  for (const char* label : {"pretrain", "retrain", "retrain+rw", "gdro",
                            "finetune+rw", "l1sparse", "salun+rw", "scrub",
                            "miu", "miu+rw"}) {
    EXPECT_EQ(ParseMethodSpec(label).Label(), label);
  }
  EXPECT_EQ(ParseMethodSpec("miu+rw"), (MethodSpec{Method::kMiu, true}));
  EXPECT_THROW(ParseMethodSpec("sgd"), ConfigError);
  EXPECT_THROW(ParseMethodSpec("+rw"), ConfigError);
}

TEST(PlanTest, DefaultsFromEmptyConfig) {
  unsetenv("UNLEARN_LAB_SEED");
  const ExperimentPlan p = PlanFromConfig(Config{});
  EXPECT_EQ(p.methods.size(), 14u);
  EXPECT_EQ(p.gold, (MethodSpec{Method::kRetrain, true}));
  EXPECT_EQ(p.seeds, (std::vector<std::uint64_t>{0, 1, 2}));
  // The smallest group is the default forget target.
  ASSERT_EQ(p.forget.entries.size(), 1u);
  EXPECT_EQ(p.forget.entries[0].group, 3);
  EXPECT_DOUBLE_EQ(p.forget.entries[0].ratio, 0.5);
  EXPECT_NO_THROW(p.Validate());
}

TEST(PlanTest, ConfigKeysReachSettings) {
  const ExperimentPlan p = TinyPlan();
  EXPECT_EQ(p.data.n_train, 400u);
  EXPECT_EQ(p.shape.hidden_dim, 8u);
  EXPECT_EQ(p.shape.input_dim, p.data.feature_dim);
  EXPECT_EQ(p.settings.train.epochs, 2u);
  EXPECT_EQ(p.settings.miu_mine_steps_first, 5u);
  EXPECT_EQ(p.seeds, (std::vector<std::uint64_t>{4}));
  const MiuConfig m = p.settings.Miu(true, 9);
  EXPECT_TRUE(m.reweight);
  EXPECT_EQ(m.train.seed, 9u);
  EXPECT_EQ(m.forget_epochs, 1u);
  EXPECT_THROW(PlanFromConfig(Config::Parse("miu.marginal = gauss\n")), ConfigError);
  EXPECT_THROW(PlanFromConfig(Config::Parse("forget.groups = x\n")), ConfigError);
}

TEST(PlanTest, SeedEnvironmentOverride) {
  setenv("UNLEARN_LAB_SEED", "17", 1);
  const ExperimentPlan p = PlanFromConfig(Config::Parse(kTinyConfig));
  EXPECT_EQ(p.seeds, (std::vector<std::uint64_t>{17}));
  setenv("UNLEARN_LAB_SEED", "abc", 1);
  EXPECT_THROW(PlanFromConfig(Config{}), ConfigError);
  unsetenv("UNLEARN_LAB_SEED");
}

TEST(PlanTest, ValidationErrors) {
  ExperimentPlan p = TinyPlan();
  EXPECT_NO_THROW(p.Validate());
  ExperimentPlan no_gold = p;
  no_gold.gold = {Method::kRetrain, false};
  EXPECT_THROW(no_gold.Validate(), PlanError);
  ExperimentPlan no_seeds = p;
  no_seeds.seeds.clear();
  EXPECT_THROW(no_seeds.Validate(), PlanError);
  ExperimentPlan no_methods = p;
  no_methods.methods.clear();
  EXPECT_THROW(no_methods.Validate(), PlanError);
  ExperimentPlan gdro_rw = p;
  gdro_rw.methods.push_back({Method::kGroupDro, true});
  EXPECT_THROW(gdro_rw.Validate(), PlanError);
  ExperimentPlan no_forget = p;
  no_forget.forget.entries.clear();
  EXPECT_THROW(no_forget.Validate(), PlanError);
  ExperimentPlan bad_group = p;
  bad_group.forget.entries = {{9, 0.5}};
  EXPECT_THROW(bad_group.Validate(), SpecError);
}

TEST(PlanTest, HashTracksResultAffectingSettings) {
  const ExperimentPlan a = TinyPlan();
  EXPECT_EQ(a.Hash(), TinyPlan().Hash());
  ExperimentPlan b = a;
  b.settings.miu_lambda = 5.0;
  EXPECT_NE(a.Hash(), b.Hash());
  ExperimentPlan c = a;
  c.forget.entries[0].ratio = 0.25;
  EXPECT_NE(a.Hash(), c.Hash());
  ExperimentPlan d = a;
  d.output_dir = "elsewhere";
  EXPECT_EQ(a.Hash(), d.Hash());
}

TEST(ForgetSpecTest, GroupCounts) {
  const ForgetSpec one = ForgetSpecForGroupCount(3, 3, 1, 0.5);
  EXPECT_EQ(one.groups(), (std::vector<int>{0}));
  const ForgetSpec four = ForgetSpecForGroupCount(3, 3, 4, 0.5);
  EXPECT_EQ(four.groups(), (std::vector<int>{0, 1, 3, 4}));
  const ForgetSpec nine = ForgetSpecForGroupCount(3, 3, 9, 0.5);
  EXPECT_EQ(nine.groups().size(), 9u);
  const ForgetSpec two = ForgetSpecForGroupCount(2, 2, 2, 0.3);
  EXPECT_EQ(two.groups(), (std::vector<int>{0, 1}));
  EXPECT_DOUBLE_EQ(two.entries[1].ratio, 0.3);
  EXPECT_THROW(ForgetSpecForGroupCount(2, 2, 5, 0.5), PlanError);
  EXPECT_THROW(ForgetSpecForGroupCount(2, 2, 0, 0.5), PlanError);
}

// Forgetting evenly from every group keeps the remaining set close to the
// training distribution, so REWEIGHT has less to correct.
TEST(ForgetSpecTest, AllGroupsNarrowReweightSpread) {
  const ExperimentPlan p = TinyPlan();
  SyntheticConfig data = p.data;
  data.n_train = 4000;
  const GroupedDataset train = GenerateSynthetic(data).train;
  const GroupStats stats = GroupFrequencies(train);
  auto spread = [&](const ForgetSpec& spec) {
    const ForgetSplit f = SplitForget(train, spec, 1);
    const auto alpha = ReweightAlpha(stats, GroupFrequencies(f.remaining)).alpha;
    return *std::max_element(alpha.begin(), alpha.end()) /
           *std::min_element(alpha.begin(), alpha.end());
  };
  EXPECT_LT(spread(ForgetSpecForGroupCount(2, 2, 4, 0.5)),
            spread(ForgetSpecForGroupCount(2, 2, 1, 0.5)));
}

TEST(PlanTest, SelfComparisonGivesHundred) {
  ExperimentPlan p = TinyPlan();
  p.methods = {{Method::kRetrain, false}};
  p.gold = {Method::kRetrain, false};
  EXPECT_DOUBLE_EQ(RunTable(p).rows[0].gap.avg_gap, 100.0);
}

TEST(AblationTest, DefaultRows) {
  const std::vector<AblationRow> rows = DefaultAblationRows();
  ASSERT_EQ(rows.size(), 8u);
  EXPECT_FALSE(rows[0].calibration);
  EXPECT_FALSE(rows[2].retain);
  EXPECT_TRUE(rows[3].reweight);
  EXPECT_DOUBLE_EQ(rows[7].lambda, 10.0);
}

class TinyTableTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { table_ = new TableResult(RunTable(TinyPlan())); }
  static void TearDownTestSuite() { delete table_; }
  static TableResult* table_;
};
TableResult* TinyTableTest::table_ = nullptr;

TEST_F(TinyTableTest, GoldRowHasPerfectGap) {
  const TableResult& t = *table_;
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows[0].spec, (MethodSpec{Method::kRetrain, true}));
  EXPECT_DOUBLE_EQ(t.rows[0].gap.avg_gap, 100.0);
  for (const auto& row : t.rows) {
    EXPECT_LE(row.gap.avg_gap, 100.0);
    ASSERT_EQ(row.report.per_seed.size(), 1u);
    EXPECT_EQ(row.report.per_seed[0].seed, 4u);
  }
  EXPECT_EQ(t.config_hash, TinyPlan().Hash());
}

TEST_F(TinyTableTest, CsvLayout) {
  const std::vector<std::string> m = Lines(MetricsCsv(*table_));
  EXPECT_EQ(m[0], "method,reweight,seed,RA,UA,TA,MIA,EO,GA,DP,EP,WG,config_hash");
  ASSERT_EQ(m.size(), 1u + 3u * 2u);
  EXPECT_EQ(m[1].rfind("retrain,1,4,", 0), 0u);
  EXPECT_EQ(m[2].rfind("retrain,1,mean,", 0), 0u);
  EXPECT_EQ(m[3].rfind("finetune,0,4,", 0), 0u);
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(table_->config_hash));
  for (std::size_t i = 1; i < m.size(); ++i) {
    EXPECT_EQ(m[i].substr(m[i].size() - 16), hash);
  }
  const std::vector<std::string> s = Lines(SummaryCsv(*table_, {{"ratio", "0.5"}}));
  EXPECT_EQ(s[0], "ratio,method,reweight,metric,value,delta,avg_gap,config_hash");
  EXPECT_EQ(s.size(), 1u + 3u * 6u);
  EXPECT_EQ(s[1].rfind("0.5,retrain,1,RA,", 0), 0u);
  EXPECT_NE(s[1].find(",0.0000,100.0000,"), std::string::npos);
  EXPECT_EQ(Lines(MetricsCsv(*table_, {}, false)).size(), m.size() - 1);
}

TEST_F(TinyTableTest, RerunIsByteIdentical) {
  const TableResult again = RunTable(TinyPlan());
  EXPECT_EQ(MetricsCsv(again), MetricsCsv(*table_));
  EXPECT_EQ(SummaryCsv(again), SummaryCsv(*table_));
}

TEST(HarnessTest, RunMethodStampsHashAndReportsFailures) {
  ExperimentPlan p = TinyPlan();
  const SeedContext ctx = PrepareSeed(p, 4);
  EXPECT_EQ(ctx.pretrained.config_hash, p.Hash());
  EXPECT_EQ(RunMethod(p, ctx, {Method::kPretrain, false}), ctx.pretrained);
  EXPECT_EQ(RunMethod(p, ctx, {Method::kFineTune, false}).config_hash, p.Hash());
  p.methods = {{Method::kRetrain, true}, {Method::kScrub, false}};
  p.settings.scrub_stop_epoch = 50;
  try {
    RunTable(p);
    FAIL() << "expected a PlanError";
  } catch (const PlanError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("scrub"), std::string::npos) << what;
    EXPECT_NE(what.find("seed 4"), std::string::npos) << what;
  }
}

TEST(HarnessTest, AblationRejectsEmptyRowAndWritesCsv) {
  AblationPlan plan{TinyPlan(), {{false, false, false, false, 1.0}}};
  EXPECT_THROW(Ablate(plan), PlanError);
  plan.rows = {{true, true, true, false, 0.0}};
  const AblationResult r = Ablate(plan);
  const std::vector<std::string> lines = Lines(AblationCsv(r));
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0], "retain,unlearn,calibration,reweight,lambda,UA,GA,avg_gap,config_hash");
  EXPECT_EQ(lines[1].rfind("1,1,1,0,0.0000,", 0), 0u);
}

TEST(ProbeTest, DegenerateAndShapeChecks) {
  const ExperimentPlan p = TinyPlan();
  const SeedContext ctx = PrepareSeed(p, 4);
  const ProbeResult single =
      ProbeValidation(ctx.pretrained, ctx.pretrained, ctx.forget.forget, 4);
  EXPECT_TRUE(single.degenerate);
  EXPECT_DOUBLE_EQ(single.before, 100.0);
  EXPECT_EQ(single.before, single.after);
  const ProbeResult full =
      ProbeValidation(ctx.pretrained, ctx.pretrained, ctx.splits.val, 4);
  EXPECT_FALSE(full.degenerate);
  EXPECT_GT(full.before, 25.0);
  ModelCheckpoint wide = InitCheckpoint(ModelShape{}, 1);
  EXPECT_THROW(ProbeValidation(ctx.pretrained, wide, ctx.splits.val, 4), ShapeError);
}

TEST(ManifestTest, JsonFields) {
  const auto j = nlohmann::json::parse(
      ManifestJson("table --config x.cfg", 0xabcULL, 1.5, {"a.csv", "b.csv"}));
  EXPECT_EQ(j["command"], "table --config x.cfg");
  EXPECT_EQ(j["config_hash"], "0000000000000abc");
  EXPECT_EQ(j["outputs"].size(), 2u);
  EXPECT_DOUBLE_EQ(j["wall_seconds"].get<double>(), 1.5);
  EXPECT_TRUE(j.contains("version"));
  EXPECT_TRUE(j.contains("compiler"));
  EXPECT_THROW(WriteTextFile("/nonexistent/dir/out.csv", "x"), IoError);
}

}  // namespace
}  // namespace unlearn
