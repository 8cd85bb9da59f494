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

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace prunelab {

struct AudioBuffer {
  std::vector<float> samples;  // in [-1, 1]
  int32_t sample_rate = 0;

  double duration_s() const {
    return static_cast<double>(samples.size()) / static_cast<double>(sample_rate);
  }
};

class WavError : public std::runtime_error {
 public:
  enum class Kind { MalformedHeader, NotPcm, NotMono, UnsupportedBitDepth, Io };
  WavError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind(kind) {}
  Kind kind;
};

/// Reads a RIFF/WAVE file.  Only PCM 16-bit mono is accepted; samples are
/// scaled by 1/32768.
AudioBuffer read_wav(const std::filesystem::path& path);

/// Writes PCM 16-bit mono; samples are clamped to [-1, 1] and rounded.
void write_wav(const std::filesystem::path& path, const AudioBuffer& buf);

}  // namespace prunelab
