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

#include <string>
#include <vector>

#include "prunelab/schedules.hpp"

namespace prunelab {

/// Sparsity grids matching the acoustic-model and vocoder experiment axes.
std::vector<double> acoustic_sparsity_grid();  // 0.1 .. 0.99, 13 points
std::vector<double> vocoder_sparsity_grid();   // 0.1 .. 0.88, 11 points

/// Schedule tokens: dense, imp, parp, parp-p, parp-kd, parp-ri,
/// parp-seq-aug, parp-mix-aug.
bool is_known_schedule(const std::string& token);

struct SweepConfig {
  std::vector<std::string> schedules{"imp", "parp", "parp-p"};
  std::vector<double> sparsities = acoustic_sparsity_grid();
  std::vector<uint64_t> seeds{1, 2, 3};
  std::string out_dir;       // empty = no artifacts
  int32_t parallelism = 0;   // 0 = hardware concurrency

  // toy model
  int32_t vocab = 16;
  int32_t hidden = 32;
  int32_t frame_dim = 8;
  int32_t upsample = 2;

  // dataset
  uint64_t dataset_seed = 7;
  int32_t pairs = 512;
  int32_t eval_pairs = 64;
  int32_t len_min = 4;
  int32_t len_max = 10;

  // training
  double learning_rate = 0.2;
  int64_t steps = 2000;
  int32_t batch_size = 16;
  int64_t n_updates = 0;  // 0 = one epoch

  // schedule options
  int32_t imp_iterations = 1;
  double parp_p_start = -1.0;
  int32_t parp_p_events = 5;
  double kd_weight = 1.0;     // used by parp-kd
  int32_t aug_multiplier = 4;  // |X_u| = multiplier * |D|

  bool include_dense = true;
  bool write_artifacts = false;
};

SweepConfig sweep_config_from_json_text(const std::string& text);
std::string sweep_config_to_json_text(const SweepConfig& config);

/// One (schedule, sparsity, seed) outcome.  duration_steps counts optimizer
/// updates executed, the run's deterministic length; wall-clock timing is
/// reported on the log stream only so reruns produce identical CSV bytes.
struct SweepRow {
  std::string schedule;
  double sparsity = 0.0;
  uint64_t seed = 0;
  std::string status;  // "ok", "diverged", or "error"
  double final_loss = 0.0;
  double toy_wer = 0.0;
  double mask_overlap_m0_mD = 1.0;
  int64_t duration_steps = 0;
};

/// Executes every combination; row order is (schedule in config order,
/// sparsity ascending, seed ascending), independent of parallelism.  Failed
/// runs keep their row with a non-ok status.
std::vector<SweepRow> run_sweep(const SweepConfig& config, std::ostream* log = nullptr);

std::string sweep_rows_to_csv(const std::vector<SweepRow>& rows);

}  // namespace prunelab
