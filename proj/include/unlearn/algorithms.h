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

#ifndef UNLEARN_ALGORITHMS_H_
#define UNLEARN_ALGORITHMS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "unlearn/data.h"
#include "unlearn/mine.h"
#include "unlearn/models.h"

namespace unlearn {

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  double base_lr = 0.05;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::size_t warmup_epochs = 2;
  std::uint64_t seed = 0;
};

// Recipe for approximate methods: ten epochs, no warmup.
TrainConfig ApproximateTrainConfig(std::uint64_t seed);

struct MiuConfig {
  TrainConfig train = ApproximateTrainConfig(0);
  std::size_t forget_epochs = 5;
  double lambda = 1.0;
  // Forget-pass step = scale × the scheduled retain learning rate.
  double forget_lr_scale = 1.0;
  std::size_t mine_steps_first = 100;
  std::size_t mine_steps_rest = 10;
  std::size_t mine_batch_size = 256;
  std::size_t mine_hidden = 100;
  double mine_lr = 0.05;
  bool reweight = false;
  MarginalRule marginal_rule = MarginalRule::kUniformRandom;
  // Ablation switches for the three objective terms.
  bool retain_term = true;
  bool unlearn_term = true;
  bool calibration_term = true;

  void Validate() const;
};

struct BaselineConfig {
  TrainConfig train = ApproximateTrainConfig(0);
  double l1_gamma = 1e-3;
  double salun_prune_fraction = 0.5;
  std::size_t scrub_stop_epoch = 5;
  double scrub_ce_weight = 0.99;
  double scrub_kl_weight = 0.001;
  bool reweight = false;

  void Validate() const;
};

// Retain-set sampling, uniform (shuffled epochs) or reweighted (with
// replacement from the REWEIGHT distribution). Both yield ceil(N / batch)
// batches per epoch.
class RetainSampler {
 public:
  RetainSampler(const GroupedDataset& remaining, std::size_t batch_size,
                std::uint64_t seed, const GroupStats* train_stats);

  std::vector<std::vector<std::size_t>> NextEpoch();
  std::size_t epoch_length() const { return epoch_length_; }

 private:
  std::optional<ShuffledBatchSampler> uniform_;
  std::optional<WeightedBatchSampler> weighted_;
  std::size_t epoch_length_ = 0;
};

ModelCheckpoint Pretrain(const GroupedDataset& train, const ModelShape& shape,
                         const TrainConfig& cfg);

// Training from scratch on the remaining set. With train_stats, batches come
// from the REWEIGHT sampler.
ModelCheckpoint Retrain(const GroupedDataset& remaining, const ModelShape& shape,
                        const TrainConfig& cfg,
                        const GroupStats* train_stats = nullptr);

// Simplified online group-DRO: per-group weights w ← w·exp(η·group_loss),
// renormalized each step; per-sample losses are scaled by |G|·w[g].
ModelCheckpoint GroupDroRetrain(const GroupedDataset& remaining,
                                const ModelShape& shape, const TrainConfig& cfg,
                                double eta,
                                std::vector<double>* final_weights = nullptr);

// Cross-entropy fine-tuning of the original model on the remaining set.
ModelCheckpoint FineTune(const ModelCheckpoint& original,
                         const GroupedDataset& remaining, const TrainConfig& cfg,
                         const GroupStats* train_stats = nullptr);

// γ_t = (1 − t/T)·γ for epoch t of T.
double L1Strength(double gamma, std::size_t epoch, std::size_t total_epochs);

ModelCheckpoint L1Sparse(const ModelCheckpoint& original,
                         const GroupedDataset& remaining, double gamma,
                         const TrainConfig& cfg,
                         const GroupStats* train_stats = nullptr);

// Global top-fraction mask of |∇ CE(forget)| over backbone and head.
ModelGrads SaliencyMask(const ModelCheckpoint& ckpt,
                        const GroupedDataset& forget, double prune_fraction);

ModelCheckpoint SalunLite(const ModelCheckpoint& original,
                          const GroupedDataset& remaining,
                          const GroupedDataset& forget,
                          const BaselineConfig& cfg,
                          const GroupStats* train_stats = nullptr);

ModelCheckpoint ScrubLite(const ModelCheckpoint& original,
                          const GroupedDataset& remaining,
                          const GroupedDataset& forget,
                          const BaselineConfig& cfg,
                          const GroupStats* train_stats = nullptr);

// Per-epoch trace of an MIU run.
struct MiuTrace {
  std::vector<double> forget_mine;       // mean MINE value over forget batches
  std::vector<double> retain_loss;       // mean total retain-pass loss
  std::vector<double> calibration_gap;   // mean |M_u − M_o| in retain batches
};

// Mutual-information-aware unlearning. The reweight flag lives in cfg; the
// training statistics are needed when it is set.
ModelCheckpoint Miu(const ModelCheckpoint& original, const GroupedDataset& train,
                    const GroupedDataset& remaining,
                    const GroupedDataset& forget, const MiuConfig& cfg,
                    MiuTrace* trace = nullptr);

}  // namespace unlearn

#endif  // UNLEARN_ALGORITHMS_H_
