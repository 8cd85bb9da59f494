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

#include "prunelab/pitch.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace prunelab {

namespace {

// One frame of YIN over window [start, start+frame).  The difference
// function integrates over frame/2 samples so every lag up to frame/2 is
// compared over the same span.
std::optional<double> yin_frame(const float* x, int32_t frame, int32_t sample_rate,
                                const YinOptions& opt) {
  const int32_t window = frame / 2;
  const int32_t tau_max =
      std::min<int32_t>(window, static_cast<int32_t>(std::floor(sample_rate / opt.fmin)));
  const int32_t tau_min =
      std::max<int32_t>(1, static_cast<int32_t>(std::ceil(sample_rate / opt.fmax)));
  if (tau_min > tau_max) return std::nullopt;

  std::vector<double> diff(static_cast<size_t>(tau_max) + 1, 0.0);
  for (int32_t tau = 1; tau <= tau_max; ++tau) {
    double acc = 0.0;
    for (int32_t j = 0; j < window; ++j) {
      const double delta = static_cast<double>(x[j]) - static_cast<double>(x[j + tau]);
      acc += delta * delta;
    }
    diff[static_cast<size_t>(tau)] = acc;
  }

  // cumulative mean normalized difference; 1 everywhere on zero energy
  std::vector<double> cmnd(static_cast<size_t>(tau_max) + 1, 1.0);
  double running = 0.0;
  for (int32_t tau = 1; tau <= tau_max; ++tau) {
    running += diff[static_cast<size_t>(tau)];
    cmnd[static_cast<size_t>(tau)] =
        running > 0.0 ? diff[static_cast<size_t>(tau)] * tau / running : 1.0;
  }

  int32_t tau = -1;
  for (int32_t t = tau_min; t <= tau_max; ++t) {
    if (cmnd[static_cast<size_t>(t)] < opt.threshold) {
      tau = t;
      while (tau + 1 <= tau_max &&
             cmnd[static_cast<size_t>(tau + 1)] < cmnd[static_cast<size_t>(tau)])
        ++tau;
      break;
    }
  }
  if (tau < 0) return std::nullopt;

  double refined = tau;
  if (tau - 1 >= 1 && tau + 1 <= tau_max) {
    const double left = cmnd[static_cast<size_t>(tau - 1)];
    const double mid = cmnd[static_cast<size_t>(tau)];
    const double right = cmnd[static_cast<size_t>(tau + 1)];
    const double denom = left - 2.0 * mid + right;
    if (denom > 0.0) {
      double shift = 0.5 * (left - right) / denom;
      shift = std::min(1.0, std::max(-1.0, shift));
      refined = tau + shift;
    }
  }
  return static_cast<double>(sample_rate) / refined;
}

}  // namespace

F0Track yin_f0(const AudioBuffer& buf, const YinOptions& opt) {
  if (buf.samples.empty() || buf.sample_rate <= 0)
    throw std::invalid_argument("yin_f0: empty buffer");
  if (opt.hop < 1) throw std::invalid_argument("yin_f0: hop must be >= 1");
  if (static_cast<double>(opt.frame) < 2.0 * buf.sample_rate / opt.fmin)
    throw std::invalid_argument("yin_f0: frame too short for fmin");
  if (static_cast<size_t>(opt.frame) > buf.samples.size())
    throw std::invalid_argument("yin_f0: buffer shorter than one frame");

  F0Track track;
  track.frame_size = opt.frame;
  track.hop_size = opt.hop;
  for (size_t start = 0; start + static_cast<size_t>(opt.frame) <= buf.samples.size();
       start += static_cast<size_t>(opt.hop)) {
    const auto f0 = yin_frame(buf.samples.data() + start, opt.frame, buf.sample_rate, opt);
    track.f0_hz.push_back(f0.value_or(0.0));
    track.voiced.push_back(f0.has_value() ? 1 : 0);
  }
  return track;
}

ProsodyStats prosody_stats(const F0Track& track, const AudioBuffer& buf) {
  ProsodyStats stats;
  stats.duration_s = buf.duration_s();

  double sum = 0.0;
  int64_t n = 0;
  for (size_t i = 0; i < track.frames(); ++i)
    if (track.voiced[i]) {
      sum += track.f0_hz[i];
      ++n;
    }
  stats.voiced_fraction =
      track.frames() == 0 ? 0.0
                          : static_cast<double>(n) / static_cast<double>(track.frames());
  if (n == 0) return stats;

  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (size_t i = 0; i < track.frames(); ++i)
    if (track.voiced[i]) {
      const double d = track.f0_hz[i] - mean;
      ss += d * d;
    }
  stats.mean_f0 = mean;
  stats.std_f0 = std::sqrt(ss / static_cast<double>(n));
  return stats;
}

MismatchReport mismatch(const std::vector<ProsodyStats>& system,
                        const std::vector<ProsodyStats>& reference) {
  if (system.size() != reference.size())
    throw std::invalid_argument("mismatch: lists must be index-aligned and equal length");
  if (system.empty()) throw std::invalid_argument("mismatch: empty lists");

  MismatchReport report;
  double dur = 0.0, mean = 0.0, stddev = 0.0;
  for (size_t i = 0; i < system.size(); ++i) {
    dur += system[i].duration_s - reference[i].duration_s;
    const bool usable = system[i].mean_f0.has_value() && reference[i].mean_f0.has_value();
    if (usable) {
      mean += *system[i].mean_f0 - *reference[i].mean_f0;
      stddev += *system[i].std_f0 - *reference[i].std_f0;
      ++report.f0_pairs_used;
    } else {
      ++report.f0_pairs_excluded;
    }
  }
  report.d_duration_s = dur / static_cast<double>(system.size());
  if (report.f0_pairs_used > 0) {
    report.d_mean_f0 = mean / static_cast<double>(report.f0_pairs_used);
    report.d_std_f0 = stddev / static_cast<double>(report.f0_pairs_used);
  }
  return report;
}

}  // namespace prunelab
