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

#include <optional>
#include <vector>

#include "prunelab/audio.hpp"

namespace prunelab {

struct YinOptions {
  int32_t frame = 2048;
  int32_t hop = 512;
  double fmin = 65.0;
  double fmax = 1000.0;
  double threshold = 0.15;
};

struct F0Track {
  std::vector<double> f0_hz;     // 0 for unvoiced frames
  std::vector<uint8_t> voiced;   // 1 voiced, 0 unvoiced
  int32_t frame_size = 0;
  int32_t hop_size = 0;

  size_t frames() const { return f0_hz.size(); }
};

/// Deterministic YIN: difference function over half the frame, cumulative
/// mean normalized difference d'(tau) = d(tau) * tau / sum_{j<=tau} d(j),
/// first dip under the threshold walked to its local minimum, parabolic
/// interpolation, f0 = sample_rate / tau*.  A frame is unvoiced when no lag
/// in [sr/fmax, sr/fmin] dips below the threshold (zero-energy frames have
/// d' = 1 by convention).
F0Track yin_f0(const AudioBuffer& buf, const YinOptions& opt = {});

struct ProsodyStats {
  std::optional<double> mean_f0;  // undefined when no voiced frames
  std::optional<double> std_f0;   // population std over voiced frames
  double duration_s = 0.0;
  double voiced_fraction = 0.0;
};

ProsodyStats prosody_stats(const F0Track& track, const AudioBuffer& buf);

struct MismatchReport {
  double d_duration_s = 0.0;             // mean(system - reference)
  std::optional<double> d_mean_f0;       // over pairs voiced on both sides
  std::optional<double> d_std_f0;
  int64_t f0_pairs_used = 0;
  int64_t f0_pairs_excluded = 0;
};

/// Index-aligned per-utterance deltas (system minus reference), averaged.
/// Pairs with undefined f0 stats on either side are excluded from the f0
/// averages and counted.
MismatchReport mismatch(const std::vector<ProsodyStats>& system,
                        const std::vector<ProsodyStats>& reference);

}  // namespace prunelab
