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

#include "unlearn/algorithms.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "unlearn/error.h"
#include "unlearn/loss.h"
#include "unlearn/optim.h"

namespace unlearn {

TrainConfig ApproximateTrainConfig(std::uint64_t seed) {
  TrainConfig c;
  c.epochs = 10;
  c.warmup_epochs = 0;
  c.base_lr = 0.01;
  c.seed = seed;
  return c;
}

void MiuConfig::Validate() const {
  if (train.epochs < 1) throw ConfigError("MIU needs at least one epoch");
  if (forget_epochs > train.epochs) {
    throw ConfigError("forget_epochs exceeds total epochs");
  }
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  if (!(forget_lr_scale >= 0.0)) {
    throw ConfigError("forget_lr_scale must be non-negative");
  }
  if (mine_steps_first == 0 || mine_steps_rest == 0) {
    throw ConfigError("MINE tuning needs at least one step per epoch");
  }
  if (!retain_term && !unlearn_term && !(calibration_term && lambda > 0.0)) {
    throw ConfigError("MIU with every objective term disabled");
  }
}

void BaselineConfig::Validate() const {
  if (train.epochs < 1) throw ConfigError("baseline needs at least one epoch");
  if (!(salun_prune_fraction > 0.0 && salun_prune_fraction <= 1.0)) {
    throw ConfigError("prune fraction must lie in (0, 1]");
  }
  if (l1_gamma < 0.0 || scrub_ce_weight < 0.0 || scrub_kl_weight < 0.0) {
    throw ConfigError("baseline weights must be non-negative");
  }
}

RetainSampler::RetainSampler(const GroupedDataset& remaining,
                             std::size_t batch_size, std::uint64_t seed,
                             const GroupStats* train_stats) {
  if (remaining.empty()) throw TrainingError("empty training set");
  if (train_stats == nullptr) {
    uniform_.emplace(remaining.size(), batch_size, seed);
    epoch_length_ = uniform_->epoch_length();
  } else {
    const ReweightResult rw =
        ReweightAlpha(*train_stats, GroupFrequencies(remaining));
    const std::vector<double> p = SamplingDistribution(remaining, rw.alpha);
    epoch_length_ = (remaining.size() + batch_size - 1) / batch_size;
    weighted_.emplace(p, batch_size, epoch_length_, seed);
  }
}

std::vector<std::vector<std::size_t>> RetainSampler::NextEpoch() {
  return uniform_ ? uniform_->NextEpoch() : weighted_->NextEpoch();
}

namespace {

struct StepResult {
  double loss = 0.0;
  ModelGrads grads;
};

StepResult CrossEntropyGrads(const ModelCheckpoint& model,
                             const GroupedDataset& ds,
                             const std::vector<std::size_t>& batch,
                             std::span<const int> labels_override = {}) {
  const Matrix x = ds.Features(batch);
  const std::vector<int> y =
      labels_override.empty()
          ? ds.Labels(batch)
          : std::vector<int>(labels_override.begin(), labels_override.end());
  const ClassifierForward pass = ForwardClassifier(model, x);
  LossAndGrad ce = SoftmaxCrossEntropy(pass.logits(), y);
  return {ce.loss, BackwardClassifier(model, pass, ce.grad)};
}

void CheckLoss(double loss, std::size_t step, const char* what) {
  if (!std::isfinite(loss)) {
    throw TrainingError(std::string("non-finite ") + what + " loss at step " +
                        std::to_string(step));
  }
}

ScheduleState MakeSchedule(const TrainConfig& cfg, std::size_t steps_per_epoch) {
  return {cfg.base_lr, cfg.warmup_epochs, cfg.epochs, steps_per_epoch, 0};
}

using AfterStep =
    std::function<void(ModelCheckpoint&, std::size_t epoch, double lr)>;

// Cross-entropy training loop shared by pretraining, retraining and the
// fine-tuning style baselines.
ModelCheckpoint TrainCrossEntropy(ModelCheckpoint model,
                                  const GroupedDataset& ds,
                                  const TrainConfig& cfg,
                                  const GroupStats* train_stats,
                                  const AfterStep& after_step = {}) {
  RetainSampler sampler(ds, cfg.batch_size, DeriveSeed(cfg.seed, "retain"),
                        train_stats);
  ModelOptimizer opt(model, cfg.momentum, cfg.weight_decay);
  ScheduleState schedule = MakeSchedule(cfg, sampler.epoch_length());
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& batch : sampler.NextEpoch()) {
      StepResult r = CrossEntropyGrads(model, ds, batch);
      CheckLoss(r.loss, schedule.current_step, "cross-entropy");
      const double lr = LrAt(schedule);
      opt.Step(model, r.grads, lr);
      if (after_step) after_step(model, epoch, lr);
      ++schedule.current_step;
    }
  }
  return model;
}

}  // namespace

ModelCheckpoint Pretrain(const GroupedDataset& train, const ModelShape& shape,
                         const TrainConfig& cfg) {
  ModelCheckpoint m = TrainCrossEntropy(
      InitCheckpoint(shape, DeriveSeed(cfg.seed, "model")), train, cfg, nullptr);
  m.role = CheckpointRole::kPretrained;
  return m;
}

ModelCheckpoint Retrain(const GroupedDataset& remaining, const ModelShape& shape,
                        const TrainConfig& cfg, const GroupStats* train_stats) {
  ModelCheckpoint m =
      TrainCrossEntropy(InitCheckpoint(shape, DeriveSeed(cfg.seed, "model")),
                        remaining, cfg, train_stats);
  m.role = CheckpointRole::kRetrained;
  return m;
}

ModelCheckpoint GroupDroRetrain(const GroupedDataset& remaining,
                                const ModelShape& shape, const TrainConfig& cfg,
                                double eta,
                                std::vector<double>* final_weights) {
  ModelCheckpoint model = InitCheckpoint(shape, DeriveSeed(cfg.seed, "model"));
  RetainSampler sampler(remaining, cfg.batch_size,
                        DeriveSeed(cfg.seed, "retain"), nullptr);
  ModelOptimizer opt(model, cfg.momentum, cfg.weight_decay);
  ScheduleState schedule = MakeSchedule(cfg, sampler.epoch_length());
  const int groups = remaining.num_groups();
  std::vector<double> w(groups, 1.0 / groups);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& batch : sampler.NextEpoch()) {
      const Matrix x = remaining.Features(batch);
      const std::vector<int> y = remaining.Labels(batch);
      const std::vector<int> g = remaining.Groups(batch);
      const ClassifierForward pass = ForwardClassifier(model, x);
      const std::vector<double> per = PerExampleCrossEntropy(pass.logits(), y);

      std::vector<double> sum(groups, 0.0);
      std::vector<std::size_t> count(groups, 0);
      for (std::size_t i = 0; i < per.size(); ++i) {
        sum[g[i]] += per[i];
        ++count[g[i]];
      }
      double total = 0.0;
      for (int k = 0; k < groups; ++k) {
        if (count[k] > 0) {
          w[k] *= std::exp(eta * sum[k] / static_cast<double>(count[k]));
        }
        total += w[k];
      }
      for (double& v : w) v /= total;

      std::vector<double> scale(per.size());
      for (std::size_t i = 0; i < per.size(); ++i) {
        scale[i] = static_cast<double>(groups) * w[g[i]];
      }
      LossAndGrad ce = SoftmaxCrossEntropy(pass.logits(), y, scale);
      CheckLoss(ce.loss, schedule.current_step, "group-DRO");
      opt.Step(model, BackwardClassifier(model, pass, ce.grad), LrAt(schedule));
      ++schedule.current_step;
    }
  }
  if (final_weights != nullptr) *final_weights = w;
  model.role = CheckpointRole::kRetrained;
  return model;
}

ModelCheckpoint FineTune(const ModelCheckpoint& original,
                         const GroupedDataset& remaining, const TrainConfig& cfg,
                         const GroupStats* train_stats) {
  ModelCheckpoint m = TrainCrossEntropy(CheckpointClone(original), remaining,
                                        cfg, train_stats);
  m.role = CheckpointRole::kUnlearned;
  return m;
}

double L1Strength(double gamma, std::size_t epoch, std::size_t total_epochs) {
  return (1.0 - static_cast<double>(epoch) / static_cast<double>(total_epochs)) *
         gamma;
}

namespace {

// Proximal step for strength·Σ|p|: soft-threshold by lr·strength.
void SoftThreshold(ParameterSet& params, double threshold) {
  params.ForEach([threshold](double& p) {
    if (p > threshold) {
      p -= threshold;
    } else if (p < -threshold) {
      p += threshold;
    } else {
      p = 0.0;
    }
  });
}

}  // namespace

ModelCheckpoint L1Sparse(const ModelCheckpoint& original,
                         const GroupedDataset& remaining, double gamma,
                         const TrainConfig& cfg,
                         const GroupStats* train_stats) {
  if (gamma < 0.0) throw ConfigError("L1 strength must be non-negative");
  AfterStep prox;
  if (gamma > 0.0) {
    prox = [&](ModelCheckpoint& m, std::size_t epoch, double lr) {
      const double threshold = lr * L1Strength(gamma, epoch, cfg.epochs);
      if (threshold <= 0.0) return;
      SoftThreshold(m.backbone, threshold);
      SoftThreshold(m.head, threshold);
    };
  }
  ModelCheckpoint m = TrainCrossEntropy(CheckpointClone(original), remaining,
                                        cfg, train_stats, prox);
  m.role = CheckpointRole::kUnlearned;
  return m;
}

ModelGrads SaliencyMask(const ModelCheckpoint& ckpt,
                        const GroupedDataset& forget, double prune_fraction) {
  if (forget.empty()) throw TrainingError("saliency needs a non-empty forget set");
  std::vector<std::size_t> all(forget.size());
  std::iota(all.begin(), all.end(), 0);
  const StepResult r = CrossEntropyGrads(ckpt, forget, all);

  std::vector<double> magnitude;
  r.grads.backbone.ForEach([&](double v) { magnitude.push_back(std::abs(v)); });
  r.grads.head.ForEach([&](double v) { magnitude.push_back(std::abs(v)); });
  const std::size_t total = magnitude.size();
  const auto keep = static_cast<std::size_t>(
      std::floor(prune_fraction * static_cast<double>(total) + 0.5));
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return magnitude[a] > magnitude[b];
  });
  std::vector<double> flat(total, 0.0);
  for (std::size_t k = 0; k < keep && k < total; ++k) flat[order[k]] = 1.0;

  ModelGrads mask{ckpt.backbone.ZerosLike(), ckpt.head.ZerosLike()};
  std::size_t pos = 0;
  mask.backbone.ForEach([&](double& v) { v = flat[pos++]; });
  mask.head.ForEach([&](double& v) { v = flat[pos++]; });
  return mask;
}

ModelCheckpoint SalunLite(const ModelCheckpoint& original,
                          const GroupedDataset& remaining,
                          const GroupedDataset& forget,
                          const BaselineConfig& cfg,
                          const GroupStats* train_stats) {
  cfg.Validate();
  if (forget.empty()) throw TrainingError("SalUn needs a non-empty forget set");
  const TrainConfig& tc = cfg.train;
  ModelCheckpoint model = CheckpointClone(original);
  const ModelGrads mask = SaliencyMask(model, forget, cfg.salun_prune_fraction);

  RetainSampler retain(remaining, tc.batch_size, DeriveSeed(tc.seed, "retain"),
                       train_stats);
  ShuffledBatchSampler forget_batches(forget.size(), tc.batch_size,
                                      DeriveSeed(tc.seed, "forget"));
  Rng label_rng(DeriveSeed(tc.seed, "salun:labels"));
  std::uniform_int_distribution<int> random_label(0, forget.num_classes - 1);
  ModelOptimizer opt(model, tc.momentum, tc.weight_decay);
  ScheduleState schedule = MakeSchedule(tc, retain.epoch_length());

  for (std::size_t epoch = 0; epoch < tc.epochs; ++epoch) {
    std::vector<int> labels(forget.size());
    for (int& l : labels) l = random_label(label_rng);
    const double forget_lr = LrAt(schedule);
    for (const auto& batch : forget_batches.NextEpoch()) {
      std::vector<int> y;
      for (std::size_t i : batch) y.push_back(labels[i]);
      StepResult r = CrossEntropyGrads(model, forget, batch, y);
      CheckLoss(r.loss, schedule.current_step, "random-label");
      opt.Step(model, r.grads, forget_lr, &mask);
    }
    for (const auto& batch : retain.NextEpoch()) {
      StepResult r = CrossEntropyGrads(model, remaining, batch);
      CheckLoss(r.loss, schedule.current_step, "cross-entropy");
      opt.Step(model, r.grads, LrAt(schedule), &mask);
      ++schedule.current_step;
    }
  }
  model.role = CheckpointRole::kUnlearned;
  return model;
}

ModelCheckpoint ScrubLite(const ModelCheckpoint& original,
                          const GroupedDataset& remaining,
                          const GroupedDataset& forget,
                          const BaselineConfig& cfg,
                          const GroupStats* train_stats) {
  cfg.Validate();
  if (cfg.scrub_stop_epoch > cfg.train.epochs) {
    throw ConfigError("SCRUB stop epoch exceeds total epochs");
  }
  const TrainConfig& tc = cfg.train;
  ModelCheckpoint model = CheckpointClone(original);
  RetainSampler retain(remaining, tc.batch_size, DeriveSeed(tc.seed, "retain"),
                       train_stats);
  std::optional<ShuffledBatchSampler> forget_batches;
  if (!forget.empty()) {
    forget_batches.emplace(forget.size(), tc.batch_size,
                           DeriveSeed(tc.seed, "forget"));
  }
  ModelOptimizer opt(model, tc.momentum, tc.weight_decay);
  ScheduleState schedule = MakeSchedule(tc, retain.epoch_length());

  for (std::size_t epoch = 0; epoch < tc.epochs; ++epoch) {
    if (epoch < cfg.scrub_stop_epoch && forget_batches) {
      const double forget_lr = LrAt(schedule);
      for (const auto& batch : forget_batches->NextEpoch()) {
        const Matrix x = forget.Features(batch);
        const Matrix teacher = ComputeLogits(original, x);
        const ClassifierForward pass = ForwardClassifier(model, x);
        LossAndGrad kl = KlDivergence(teacher, pass.logits());
        CheckLoss(kl.loss, schedule.current_step, "KL");
        for (double& v : kl.grad.data()) v = -v;
        opt.Step(model, BackwardClassifier(model, pass, kl.grad), forget_lr);
      }
    }
    for (const auto& batch : retain.NextEpoch()) {
      const Matrix x = remaining.Features(batch);
      const std::vector<int> y = remaining.Labels(batch);
      const Matrix teacher = ComputeLogits(original, x);
      const ClassifierForward pass = ForwardClassifier(model, x);
      LossAndGrad ce = SoftmaxCrossEntropy(pass.logits(), y);
      LossAndGrad kl = KlDivergence(teacher, pass.logits());
      const double loss =
          cfg.scrub_ce_weight * ce.loss + cfg.scrub_kl_weight * kl.loss;
      CheckLoss(loss, schedule.current_step, "distillation");
      Matrix grad(ce.grad.rows(), ce.grad.cols());
      for (std::size_t i = 0; i < grad.size(); ++i) {
        grad.data()[i] = cfg.scrub_ce_weight * ce.grad.data()[i] +
                         cfg.scrub_kl_weight * kl.grad.data()[i];
      }
      opt.Step(model, BackwardClassifier(model, pass, grad), LrAt(schedule));
      ++schedule.current_step;
    }
  }
  model.role = CheckpointRole::kUnlearned;
  return model;
}

ModelCheckpoint Miu(const ModelCheckpoint& original, const GroupedDataset& train,
                    const GroupedDataset& remaining,
                    const GroupedDataset& forget, const MiuConfig& cfg,
                    MiuTrace* trace) {
  cfg.Validate();
  const bool uses_forget = cfg.unlearn_term && cfg.forget_epochs > 0;
  if (uses_forget && forget.empty()) {
    throw TrainingError("MIU needs a non-empty forget set");
  }
  const TrainConfig& tc = cfg.train;
  const int num_groups = train.num_groups();
  const bool calibrate = cfg.calibration_term && cfg.lambda > 0.0;
  const GroupStats train_stats = GroupFrequencies(train);

  // The reference estimator sees the frozen original backbone. The working
  // estimator starts from the same initialization and, at epoch 0, the same
  // tuning stream, so both agree before the first update.
  const std::vector<std::size_t> mine_dims = {
      original.head.layers.front().in_dim() +
          static_cast<std::size_t>(num_groups),
      cfg.mine_hidden, 1};
  const ParameterSet psi_init =
      InitMlp(mine_dims, "mine", DeriveSeed(tc.seed, "mine:init"));
  auto tune_options = [&](std::size_t epoch) {
    TuneMineOptions o;
    o.steps = epoch == 0 ? cfg.mine_steps_first : cfg.mine_steps_rest;
    o.batch_size = cfg.mine_batch_size;
    o.lr = cfg.mine_lr;
    o.rule = cfg.marginal_rule;
    o.seed = DeriveSeed(tc.seed, "mine:tune", epoch);
    return o;
  };
  ParameterSet psi_original = psi_init;
  ParameterSet psi = psi_init;
  const bool needs_mine = uses_forget || calibrate;
  if (calibrate) TuneMine(psi_original, original.backbone, train, tune_options(0));

  ModelCheckpoint model = CheckpointClone(original);
  RetainSampler retain(remaining, tc.batch_size, DeriveSeed(tc.seed, "retain"),
                       cfg.reweight ? &train_stats : nullptr);
  std::optional<ShuffledBatchSampler> forget_batches;
  if (uses_forget) {
    forget_batches.emplace(forget.size(), tc.batch_size,
                           DeriveSeed(tc.seed, "forget"));
  }
  Rng marginal_rng(DeriveSeed(tc.seed, "miu:marginal"));
  ModelOptimizer opt(model, tc.momentum, tc.weight_decay);
  ScheduleState schedule = MakeSchedule(tc, retain.epoch_length());

  for (std::size_t epoch = 0; epoch < tc.epochs; ++epoch) {
    if (needs_mine) TuneMine(psi, model.backbone, train, tune_options(epoch));

    double forget_sum = 0.0;
    std::size_t forget_count = 0;
    if (uses_forget && epoch < cfg.forget_epochs) {
      const double forget_lr = cfg.forget_lr_scale * LrAt(schedule);
      for (const auto& batch : forget_batches->NextEpoch()) {
        const MlpForward pass = ForwardMlp(model.backbone, forget.Features(batch));
        MiBatch mb{pass.outputs, forget.Groups(batch), {}};
        mb.g_bar = DrawMarginal(mb.g, cfg.marginal_rule, num_groups, marginal_rng);
        const MineGradient mg = MineValueAndGrad(psi, mb, num_groups);
        CheckLoss(mg.value, schedule.current_step, "MINE");
        forget_sum += mg.value;
        ++forget_count;
        // Mutual information is non-negative; below zero the bound only
        // rewards exploiting ψ, so the descent is hinged at 0.
        if (mg.value <= 0.0) continue;
        opt.StepBackbone(model, BackwardFeatures(model, pass, mg.z_grad),
                         forget_lr);
      }
    }

    double retain_sum = 0.0, gap_sum = 0.0;
    std::size_t retain_count = 0;
    for (const auto& batch : retain.NextEpoch()) {
      const Matrix x = remaining.Features(batch);
      const ClassifierForward pass = ForwardClassifier(model, x);
      double loss = 0.0;
      Matrix logits_grad(pass.logits().rows(), pass.logits().cols());
      if (cfg.retain_term) {
        LossAndGrad ce = SoftmaxCrossEntropy(pass.logits(), remaining.Labels(batch));
        loss += ce.loss;
        logits_grad = std::move(ce.grad);
      }
      Matrix feature_grad;
      if (calibrate) {
        MiBatch unlearned{pass.features(), remaining.Groups(batch), {}};
        unlearned.g_bar =
            DrawMarginal(unlearned.g, cfg.marginal_rule, num_groups, marginal_rng);
        MiBatch reference{ComputeFeatures(original.backbone, x), unlearned.g,
                          unlearned.g_bar};
        const MineGradient mu = MineValueAndGrad(psi, unlearned, num_groups);
        const double mo = MineValue(psi_original, reference, num_groups);
        const ScalarLoss calib = SquaredDifference(mu.value, mo);
        loss += cfg.lambda * calib.loss;
        gap_sum += std::abs(mu.value - mo);
        feature_grad = mu.z_grad;
        for (double& v : feature_grad.data()) v *= cfg.lambda * calib.grad;
      }
      CheckLoss(loss, schedule.current_step, "MIU retain");
      retain_sum += loss;
      ++retain_count;
      const double lr = LrAt(schedule);
      if (cfg.retain_term) {
        opt.Step(model,
                 BackwardClassifier(model, pass, logits_grad,
                                    calibrate ? &feature_grad : nullptr),
                 lr);
      } else if (calibrate) {
        opt.StepBackbone(model, BackwardFeatures(model, pass.backbone, feature_grad),
                         lr);
      }
      ++schedule.current_step;
    }

    if (trace != nullptr) {
      trace->forget_mine.push_back(forget_count ? forget_sum / forget_count : 0.0);
      trace->retain_loss.push_back(retain_count ? retain_sum / retain_count : 0.0);
      trace->calibration_gap.push_back(retain_count ? gap_sum / retain_count : 0.0);
    }
  }
  model.role = CheckpointRole::kUnlearned;
  return model;
}

}  // namespace unlearn
