// Copyright 2026 The prunelab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>

#include "prunelab/trainer.hpp"

namespace prunelab {

enum class ScheduleKind { IMP, PARP, PARP_P };
enum class InitKind { TRAINED, RANDOM };
enum class AugKind { NONE, SEQ_AUG, MIX_AUG };

struct ScheduleConfig {
  ScheduleKind kind = ScheduleKind::PARP;
  double target_sparsity = 0.5;
  /// Updates between re-prune events; 0 resolves to one epoch of the
  /// training set.
  int64_t n_updates = 0;
  int32_t imp_iterations = 1;
  /// Initial sparsity of the PARP-P ramp; negative resolves to
  /// max(0, target - 0.2).
  double parp_p_start = -1.0;
  int32_t parp_p_events = 5;
  InitKind init = InitKind::TRAINED;
  double kd_weight = 0.0;
  AugKind aug = AugKind::NONE;
  uint64_t seed = 0;
  TrainOptions train;  // seed field is overridden by `seed`

  double resolved_parp_p_start() const {
    return parp_p_start >= 0.0 ? parp_p_start : std::max(0.0, target_sparsity - 0.2);
  }
};

struct PrunedResult {
  PruneMask final_mask;
  PruneMask initial_mask;
  ParamStore final_weights;  // mask applied
  std::vector<std::pair<int64_t, double>> loss_curve;
  double mask_overlap_m0_mD = 1.0;
  double final_loss = 0.0;  // mean data loss of the subnetwork on the training set
  int64_t total_steps = 0;
};

/// Optional observers; both may be empty.  on_step fires after each
/// optimizer update, on_reprune after each mask (re)computation past the
/// initial prune (the terminal re-prune included).
struct ScheduleHooks {
  std::function<void(int64_t step, double loss_value, const ToyModel& model,
                     const PruneMask& mask)>
      on_step;
  std::function<void(int64_t step, double event_sparsity)> on_reprune;
};

/// Prune at target, zero the pruned weights, train with gradient masking so
/// they stay exactly zero.  With imp_iterations > 1, each iteration keeps the
/// previous zero set fixed and extends it by magnitude over the survivors,
/// reaching the target on the last iteration (per-iteration keep ratio is
/// geometric); every iteration trains a full cfg.train.steps budget.
PrunedResult run_imp(ToyModel model, const SynthDataset& data, const ScheduleConfig& cfg,
                     const KdObjective* kd = nullptr, const ScheduleHooks* hooks = nullptr);

/// Prune at target and zero once, then train with gradients flowing into
/// pruned coordinates; every n_updates the mask is recomputed by UMP on the
/// current weights (and re-applied), and a terminal UMP after the last step
/// yields the returned subnetwork.
PrunedResult run_parp(ToyModel model, const SynthDataset& data, const ScheduleConfig& cfg,
                      const KdObjective* kd = nullptr, const ScheduleHooks* hooks = nullptr);

/// PARP with a sparsity ramp: the initial prune is at parp_p_start and the
/// first parp_p_events re-prunes climb linearly to the target, after which
/// events stay at the target.  start == target reproduces run_parp exactly.
PrunedResult run_parp_p(ToyModel model, const SynthDataset& data,
                        const ScheduleConfig& cfg, const KdObjective* kd = nullptr,
                        const ScheduleHooks* hooks = nullptr);

/// Validates and packages the distillation objective
/// (loss = data loss + kd_weight * MSE(prediction, teacher(X))).
KdObjective attach_kd(const ScheduleConfig& cfg, const ToyModel& teacher);

/// Self-training augmentation.  The passed model doubles as the teacher that
/// labels `unspoken`.  SEQ_AUG runs PARP on the synthesized set first, then
/// PARP on the real data from the resulting subnetwork; MIX_AUG runs PARP
/// once on the concatenation (real data first).  MIX_AUG with no unspoken
/// text degenerates to plain run_parp; SEQ_AUG requires unspoken text.
PrunedResult run_with_aug(ToyModel model, const SynthDataset& data,
                          const std::vector<TokenSeq>& unspoken,
                          const ScheduleConfig& cfg,
                          const ScheduleHooks* hooks = nullptr);

/// Writes checkpoint, masks, loss-curve CSV, and a small summary JSON.
void save_result(const std::filesystem::path& dir, const PrunedResult& result);

}  // namespace prunelab
