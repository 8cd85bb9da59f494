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

#include <stdexcept>
#include <utility>
#include <vector>

#include "prunelab/pruner.hpp"
#include "prunelab/rng.hpp"
#include "prunelab/toy_model.hpp"

namespace prunelab {

struct TrainOptions {
  double learning_rate = 0.2;
  int64_t steps = 2000;
  int32_t batch_size = 16;
  uint64_t seed = 0;
};

/// Thrown when the training loss goes non-finite.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int64_t step, double loss_value)
      : std::runtime_error("training diverged (non-finite loss) at step " +
                           std::to_string(step)),
        step(step),
        loss_value(loss_value) {}
  int64_t step;
  double loss_value;
};

/// Auxiliary distillation objective: weight * MSE(pred frames, teacher frames).
struct KdObjective {
  ToyModel teacher;
  double weight = 0.0;
};

/// Plain SGD with a fixed learning rate.  Epochs are deterministic shuffles
/// of the dataset drawn from one seeded stream; each optimizer step consumes
/// one batch (the final batch of an epoch may be short).  With a grad_mask,
/// gradients at masked coordinates are dropped before the update, so those
/// weights never move.
class Trainer {
 public:
  Trainer(ToyModel& model, const SynthDataset& data, TrainOptions opt,
          const KdObjective* kd = nullptr);

  /// One optimizer update; returns the batch objective at the pre-update
  /// weights.  Throws TrainingDiverged on non-finite loss.
  double step(const PruneMask* grad_mask = nullptr);

  int64_t steps_done() const { return steps_done_; }
  double last_data_loss() const { return last_data_loss_; }

  /// Optimizer steps in one pass over `n_items` examples.
  static int64_t one_epoch_steps(size_t n_items, int32_t batch_size);

 private:
  void refill_batch();

  ToyModel& model_;
  const SynthDataset& data_;
  TrainOptions opt_;
  Rng rng_;
  std::vector<int32_t> order_;
  size_t cursor_ = 0;
  std::vector<int32_t> batch_;
  int64_t steps_done_ = 0;
  double last_data_loss_ = 0.0;

  std::vector<std::vector<double>> kd_frames_;  // per item, precomputed once
  double kd_weight_ = 0.0;
};

/// Runs `opt.steps` updates; returns the per-step loss curve (1-based steps).
struct TrainResult {
  std::vector<std::pair<int64_t, double>> loss_curve;
};
TrainResult train(ToyModel& model, const SynthDataset& data, const TrainOptions& opt,
                  const PruneMask* grad_mask = nullptr, const KdObjective* kd = nullptr);

}  // namespace prunelab
