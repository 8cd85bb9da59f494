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

#include "prunelab/trainer.hpp"

#include <cmath>
#include <numeric>

namespace prunelab {

Trainer::Trainer(ToyModel& model, const SynthDataset& data, TrainOptions opt,
                 const KdObjective* kd)
    : model_(model), data_(data), opt_(opt), rng_(opt.seed) {
  if (opt_.steps < 1) throw std::invalid_argument("train: steps must be >= 1");
  if (opt_.batch_size < 1) throw std::invalid_argument("train: batch size must be >= 1");
  if (data_.items.empty()) throw std::invalid_argument("train: empty dataset");
  order_.resize(data_.items.size());
  std::iota(order_.begin(), order_.end(), 0);
  cursor_ = order_.size();  // forces a shuffle before the first batch

  if (kd && kd->weight < 0.0)
    throw std::invalid_argument("kd weight must be nonnegative");
  if (kd && kd->weight > 0.0) {
    kd_weight_ = kd->weight;
    kd_frames_.reserve(data_.items.size());
    for (const auto& item : data_.items) {
      const FrameSeq out = kd->teacher.forward(item.tokens);
      std::vector<double> frames(out.frames.begin(), out.frames.end());
      kd_frames_.push_back(std::move(frames));
    }
  }
}

int64_t Trainer::one_epoch_steps(size_t n_items, int32_t batch_size) {
  return static_cast<int64_t>((n_items + static_cast<size_t>(batch_size) - 1) /
                              static_cast<size_t>(batch_size));
}

void Trainer::refill_batch() {
  batch_.clear();
  while (batch_.size() < static_cast<size_t>(opt_.batch_size)) {
    if (cursor_ >= order_.size()) {
      if (!batch_.empty()) break;  // short final batch ends the epoch
      rng_.shuffle(order_);
      cursor_ = 0;
    }
    batch_.push_back(order_[cursor_++]);
  }
}

double Trainer::step(const PruneMask* grad_mask) {
  refill_batch();
  const BatchResult batch = batch_gradients(
      model_, data_, batch_, kd_weight_ > 0.0 ? &kd_frames_ : nullptr, kd_weight_);
  ++steps_done_;
  if (!std::isfinite(batch.loss)) throw TrainingDiverged(steps_done_, batch.loss);
  last_data_loss_ = batch.data_loss;

  const double lr = opt_.learning_rate;
  for (const auto& [name, grad] : batch.grads.by_name) {
    Tensor& w = model_.params().at(name);
    const Tensor* mask = nullptr;
    if (grad_mask && grad_mask->contains(name)) mask = &grad_mask->at(name);
    for (size_t i = 0; i < grad.size(); ++i) {
      if (mask && mask->data[i] == 0.0f) continue;
      w.data[i] = static_cast<float>(static_cast<double>(w.data[i]) - lr * grad[i]);
    }
  }
  return batch.loss;
}

TrainResult train(ToyModel& model, const SynthDataset& data, const TrainOptions& opt,
                  const PruneMask* grad_mask, const KdObjective* kd) {
  Trainer trainer(model, data, opt, kd);
  TrainResult result;
  result.loss_curve.reserve(static_cast<size_t>(opt.steps));
  for (int64_t s = 1; s <= opt.steps; ++s)
    result.loss_curve.emplace_back(s, trainer.step(grad_mask));
  return result;
}

}  // namespace prunelab
