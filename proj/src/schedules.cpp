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

#include "prunelab/schedules.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace prunelab {

namespace {

int64_t resolve_n_updates(const ScheduleConfig& cfg, size_t n_items) {
  if (cfg.n_updates > 0) return cfg.n_updates;
  return Trainer::one_epoch_steps(n_items, cfg.train.batch_size);
}

void zero_masked_weights(ToyModel& model, const PruneMask& mask) {
  for (const auto& [name, m] : mask.entries()) {
    Tensor& w = model.params().at(name);
    for (size_t i = 0; i < w.data.size(); ++i)
      if (m.data[i] == 0.0f) w.data[i] = 0.0f;
  }
}

void check_result_invariants(const PrunedResult& result, const ParamStore& store,
                             double target) {
  const int64_t d = store.prunable_count();
  const int64_t k = std::llround(target * static_cast<double>(d));
  if (result.final_mask.zero_count() != k)
    throw std::logic_error("schedule postcondition violated: final mask zero count");
  for (const auto& [name, m] : result.final_mask.entries()) {
    const Tensor& w = store.at(name);
    for (size_t i = 0; i < m.data.size(); ++i)
      if (m.data[i] == 0.0f && w.data[i] != 0.0f)
        throw std::logic_error("schedule postcondition violated: unmasked survivor");
  }
}

// Shared PARP engine; `event_sparsity(i)` gives the target of re-prune event
// i (the initial prune is event 0, events >= 1 fire every N steps, and the
// terminal re-prune always runs at the final target).
PrunedResult run_parp_engine(ToyModel& model, const SynthDataset& data,
                             const ScheduleConfig& cfg, const KdObjective* kd,
                             const ScheduleHooks* hooks,
                             const std::function<double(int64_t)>& event_sparsity) {
  const int64_t n_updates = resolve_n_updates(cfg, data.size());

  PrunedResult result;
  PruneMask mask = ump(model.params(), event_sparsity(0));
  zero_masked_weights(model, mask);
  result.initial_mask = mask;

  TrainOptions opt = cfg.train;
  opt.seed = cfg.seed;
  Trainer trainer(model, data, opt, kd);

  int64_t event = 1;
  result.loss_curve.reserve(static_cast<size_t>(opt.steps));
  for (int64_t step = 1; step <= opt.steps; ++step) {
    const double loss_value = trainer.step(nullptr);
    result.loss_curve.emplace_back(step, loss_value);
    if (hooks && hooks->on_step) hooks->on_step(step, loss_value, model, mask);
    if (step % n_updates == 0 && step < opt.steps) {
      const double s = event_sparsity(event++);
      mask = ump(model.params(), s);
      zero_masked_weights(model, mask);
      if (hooks && hooks->on_reprune) hooks->on_reprune(step, s);
    }
  }

  // terminal re-prune at the target; the returned subnetwork is m_D (.) theta_D*
  mask = ump(model.params(), cfg.target_sparsity);
  zero_masked_weights(model, mask);
  if (hooks && hooks->on_reprune) hooks->on_reprune(opt.steps, cfg.target_sparsity);

  result.final_mask = mask;
  result.final_weights = model.params();
  result.mask_overlap_m0_mD = mask_overlap(result.initial_mask, result.final_mask);
  result.final_loss = eval_loss(model, data);
  result.total_steps = opt.steps;
  check_result_invariants(result, model.params(), cfg.target_sparsity);
  return result;
}

}  // namespace

PrunedResult run_imp(ToyModel model, const SynthDataset& data, const ScheduleConfig& cfg,
                     const KdObjective* kd, const ScheduleHooks* hooks) {
  if (cfg.kind != ScheduleKind::IMP)
    throw std::invalid_argument("run_imp: config kind mismatch");
  if (cfg.imp_iterations < 1)
    throw std::invalid_argument("run_imp: imp_iterations must be >= 1");

  PrunedResult result;
  PruneMask mask = PruneMask::all_ones(model.params());
  const int32_t iterations = cfg.imp_iterations;
  int64_t global_step = 0;

  for (int32_t iter = 1; iter <= iterations; ++iter) {
    // geometric keep ratio so the zero set grows onto the previous one and
    // lands exactly on the target at the last iteration
    const double s =
        iter == iterations
            ? cfg.target_sparsity
            : 1.0 - std::pow(1.0 - cfg.target_sparsity,
                             static_cast<double>(iter) / static_cast<double>(iterations));
    mask = ump_masked(model.params(), s, mask);
    zero_masked_weights(model, mask);
    if (iter == 1) result.initial_mask = mask;
    if (iter > 1 && hooks && hooks->on_reprune) hooks->on_reprune(global_step, s);

    TrainOptions opt = cfg.train;
    opt.seed = iter == 1 ? cfg.seed : derive_seed(cfg.seed, static_cast<uint64_t>(iter));
    Trainer trainer(model, data, opt, kd);
    for (int64_t step = 1; step <= opt.steps; ++step) {
      const double loss_value = trainer.step(&mask);
      ++global_step;
      result.loss_curve.emplace_back(global_step, loss_value);
      if (hooks && hooks->on_step) hooks->on_step(global_step, loss_value, model, mask);
    }
  }

  result.final_mask = mask;
  result.final_weights = model.params();
  result.mask_overlap_m0_mD = mask_overlap(result.initial_mask, result.final_mask);
  result.final_loss = eval_loss(model, data);
  result.total_steps = global_step;
  check_result_invariants(result, model.params(), cfg.target_sparsity);
  return result;
}

PrunedResult run_parp(ToyModel model, const SynthDataset& data, const ScheduleConfig& cfg,
                      const KdObjective* kd, const ScheduleHooks* hooks) {
  if (cfg.kind != ScheduleKind::PARP)
    throw std::invalid_argument("run_parp: config kind mismatch");
  const double target = cfg.target_sparsity;
  return run_parp_engine(model, data, cfg, kd, hooks,
                         [target](int64_t) { return target; });
}

PrunedResult run_parp_p(ToyModel model, const SynthDataset& data,
                        const ScheduleConfig& cfg, const KdObjective* kd,
                        const ScheduleHooks* hooks) {
  if (cfg.kind != ScheduleKind::PARP_P)
    throw std::invalid_argument("run_parp_p: config kind mismatch");
  if (cfg.parp_p_events < 1)
    throw std::invalid_argument("run_parp_p: parp_p_events must be >= 1");
  const double start = cfg.resolved_parp_p_start();
  const double target = cfg.target_sparsity;
  if (!(start >= 0.0 && start <= target))
    throw std::invalid_argument("run_parp_p: start sparsity must lie in [0, target]");
  const int64_t ramp_events = cfg.parp_p_events;
  auto event_sparsity = [start, target, ramp_events](int64_t event) {
    if (ramp_events <= 1 || event >= ramp_events - 1) return target;
    return start + (target - start) * static_cast<double>(event) /
                       static_cast<double>(ramp_events - 1);
  };
  return run_parp_engine(model, data, cfg, kd, hooks, event_sparsity);
}

KdObjective attach_kd(const ScheduleConfig& cfg, const ToyModel& teacher) {
  if (cfg.kd_weight < 0.0)
    throw std::invalid_argument("attach_kd: kd_weight must be nonnegative");
  return KdObjective{teacher, cfg.kd_weight};
}

PrunedResult run_with_aug(ToyModel model, const SynthDataset& data,
                          const std::vector<TokenSeq>& unspoken,
                          const ScheduleConfig& cfg, const ScheduleHooks* hooks) {
  if (cfg.aug == AugKind::NONE)
    throw std::invalid_argument("run_with_aug: aug policy is NONE");
  if (cfg.kind != ScheduleKind::PARP)
    throw std::invalid_argument("run_with_aug: augmentation is defined for PARP");

  const ToyModel teacher = model;  // labels are produced by the initial weights
  KdObjective kd_storage{teacher, cfg.kd_weight};
  const KdObjective* kd = cfg.kd_weight > 0.0 ? &kd_storage : nullptr;

  if (cfg.aug == AugKind::MIX_AUG) {
    const SynthDataset synthesized =
        unspoken.empty() ? SynthDataset{} : synthesize_labels(teacher, unspoken, data.codebook);
    const SynthDataset mixed = SynthDataset::concat(data, synthesized);
    return run_parp_engine(model, mixed, cfg, kd, hooks,
                           [&cfg](int64_t) { return cfg.target_sparsity; });
  }

  // SEQ_AUG
  if (unspoken.empty())
    throw std::invalid_argument("run_with_aug: seq-aug needs a nonempty unspoken set");
  const SynthDataset synthesized = synthesize_labels(teacher, unspoken, data.codebook);

  ScheduleConfig phase1 = cfg;
  PrunedResult first = run_parp_engine(model, synthesized, phase1, kd, hooks,
                                       [&cfg](int64_t) { return cfg.target_sparsity; });

  ScheduleConfig phase2 = cfg;
  phase2.seed = derive_seed(cfg.seed, 1);
  PrunedResult second = run_parp_engine(model, data, phase2, kd, hooks,
                                        [&cfg](int64_t) { return cfg.target_sparsity; });

  // stitch the two phases into one result; m_0 is the very first mask
  PrunedResult result = second;
  result.initial_mask = first.initial_mask;
  result.mask_overlap_m0_mD = mask_overlap(result.initial_mask, result.final_mask);
  result.loss_curve = std::move(first.loss_curve);
  for (const auto& [step, value] : second.loss_curve)
    result.loss_curve.emplace_back(first.total_steps + step, value);
  result.total_steps = first.total_steps + second.total_steps;
  return result;
}

void save_result(const std::filesystem::path& dir, const PrunedResult& result) {
  std::filesystem::create_directories(dir);
  save_checkpoint(result.final_weights, dir / "final_weights.prnt");
  save_mask(dir / "final_mask.prnt", result.final_mask);
  save_mask(dir / "initial_mask.prnt", result.initial_mask);

  std::ofstream curve(dir / "loss_curve.csv", std::ios::trunc);
  if (!curve) throw std::runtime_error("cannot write loss curve in " + dir.string());
  curve << "step,loss\n";
  char line[64];
  for (const auto& [step, value] : result.loss_curve) {
    std::snprintf(line, sizeof(line), "%lld,%.12g\n", static_cast<long long>(step), value);
    curve << line;
  }

  nlohmann::json summary;
  summary["final_loss"] = result.final_loss;
  summary["mask_overlap_m0_mD"] = result.mask_overlap_m0_mD;
  summary["final_sparsity"] = sparsity(result.final_mask);
  summary["total_steps"] = result.total_steps;
  std::ofstream js(dir / "summary.json", std::ios::trunc);
  js << summary.dump(2) << "\n";
}

}  // namespace prunelab
