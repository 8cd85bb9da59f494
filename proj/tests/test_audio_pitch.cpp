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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <fstream>

#include "doctest.h"
#include "prunelab/audio.hpp"
#include "prunelab/pitch.hpp"
#include "prunelab/rng.hpp"

using namespace prunelab;

namespace {

constexpr double kPi = 3.14159265358979323846;

AudioBuffer sine(double freq, double seconds = 1.0, int32_t sr = 22050,
                 double amplitude = 0.5, double phase = 0.0) {
  AudioBuffer buf;
  buf.sample_rate = sr;
  const size_t n = static_cast<size_t>(seconds * sr);
  buf.samples.resize(n);
  for (size_t i = 0; i < n; ++i)
    buf.samples[i] = static_cast<float>(
        amplitude * std::sin(2.0 * kPi * freq * static_cast<double>(i) / sr + phase));
  return buf;
}

AudioBuffer square(double freq, double seconds = 1.0, int32_t sr = 22050,
                   double amplitude = 0.5) {
  AudioBuffer buf = sine(freq, seconds, sr, 1.0);
  for (auto& v : buf.samples)
    v = v >= 0.0f ? static_cast<float>(amplitude) : static_cast<float>(-amplitude);
  return buf;
}

double median_voiced(const F0Track& track) {
  std::vector<double> voiced;
  for (size_t i = 0; i < track.frames(); ++i)
    if (track.voiced[i]) voiced.push_back(track.f0_hz[i]);
  REQUIRE(!voiced.empty());
  std::sort(voiced.begin(), voiced.end());
  return voiced[voiced.size() / 2];
}

std::filesystem::path temp_wav(const char* tag) {
  return std::filesystem::temp_directory_path() /
         (std::string("prunelab_") + tag + ".wav");
}

}  // namespace

TEST_CASE("wav round-trip: zeros at 22050 Hz") {
  AudioBuffer buf;
  buf.sample_rate = 22050;
  buf.samples.assign(22050, 0.0f);
  const auto path = temp_wav("zeros");
  write_wav(path, buf);
  const AudioBuffer loaded = read_wav(path);
  CHECK(loaded.sample_rate == 22050);
  REQUIRE(loaded.samples.size() == 22050);
  for (float v : loaded.samples) CHECK(v == 0.0f);
  CHECK(loaded.duration_s() == 1.0);
  std::filesystem::remove(path);
}

TEST_CASE("sample -32768 maps to exactly -1.0") {
  const auto path = temp_wav("min");
  AudioBuffer buf;
  buf.sample_rate = 8000;
  buf.samples = {-1.0f, 1.0f, 0.0f};
  write_wav(path, buf);
  const AudioBuffer loaded = read_wav(path);
  CHECK(loaded.samples[0] == -1.0f);
  CHECK(loaded.samples[1] == doctest::Approx(32767.0 / 32768.0));
  CHECK(loaded.samples[2] == 0.0f);
  std::filesystem::remove(path);
}

TEST_CASE("wav round-trip preserves random audio to one LSB") {
  Rng rng(8);
  AudioBuffer buf;
  buf.sample_rate = 16000;
  for (int i = 0; i < 4096; ++i)
    buf.samples.push_back(static_cast<float>(rng.uniform_real(-1.0, 1.0)));
  const auto path = temp_wav("rand");
  write_wav(path, buf);
  const AudioBuffer loaded = read_wav(path);
  REQUIRE(loaded.samples.size() == buf.samples.size());
  for (size_t i = 0; i < buf.samples.size(); ++i)
    CHECK(std::fabs(loaded.samples[i] - buf.samples[i]) <= 1.0f / 32768.0f);
  std::filesystem::remove(path);
}

TEST_CASE("stereo, non-pcm, and malformed files raise distinct errors") {
  const auto path = temp_wav("bad");

  auto patch_and_check = [&](size_t offset, uint16_t value, WavError::Kind kind) {
    AudioBuffer buf;
    buf.sample_rate = 8000;
    buf.samples.assign(64, 0.25f);
    write_wav(path, buf);
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(static_cast<std::streamoff>(offset));
    char bytes[2] = {static_cast<char>(value & 0xff), static_cast<char>(value >> 8)};
    f.write(bytes, 2);
    f.close();
    try {
      read_wav(path);
      FAIL("expected WavError");
    } catch (const WavError& e) {
      CHECK(e.kind == kind);
    }
  };
  patch_and_check(22, 2, WavError::Kind::NotMono);             // channel count
  patch_and_check(20, 3, WavError::Kind::NotPcm);              // format tag
  patch_and_check(34, 8, WavError::Kind::UnsupportedBitDepth); // bits per sample

  std::ofstream junk(path, std::ios::binary | std::ios::trunc);
  junk << "RIFFxxxxJUNK";
  junk.close();
  try {
    read_wav(path);
    FAIL("expected WavError");
  } catch (const WavError& e) {
    CHECK(e.kind == WavError::Kind::MalformedHeader);
  }
  std::filesystem::remove(path);
}

TEST_CASE("yin recovers a 440 Hz sine within one percent on every frame") {
  const F0Track track = yin_f0(sine(440.0));
  REQUIRE(track.frames() > 10);
  for (size_t i = 0; i < track.frames(); ++i) {
    REQUIRE(track.voiced[i] == 1);
    CHECK(track.f0_hz[i] == doctest::Approx(440.0).epsilon(0.01));
  }
}

TEST_CASE("yin marks digital silence unvoiced") {
  AudioBuffer buf;
  buf.sample_rate = 22050;
  buf.samples.assign(22050, 0.0f);
  const F0Track track = yin_f0(buf);
  for (size_t i = 0; i < track.frames(); ++i) CHECK(track.voiced[i] == 0);
}

TEST_CASE("yin picks the fundamental of a 220 Hz square wave, not a harmonic") {
  const F0Track track = yin_f0(square(220.0));
  CHECK(median_voiced(track) == doctest::Approx(220.0).epsilon(0.02));
}

TEST_CASE("yin frequency sweep stays within one percent") {
  for (double freq : {110.0, 220.0, 440.0, 880.0}) {
    const F0Track track = yin_f0(sine(freq));
    CHECK(median_voiced(track) == doctest::Approx(freq).epsilon(0.01));
  }
}

TEST_CASE("yin estimate is invariant to phase shifts and amplitude scaling") {
  const double base = median_voiced(yin_f0(sine(330.0)));
  for (double phase : {0.7, 1.9, 3.1, 5.2}) {
    const double shifted = median_voiced(yin_f0(sine(330.0, 1.0, 22050, 0.5, phase)));
    CHECK(shifted == doctest::Approx(base).epsilon(0.005));
  }
  for (double amp : {0.1, 0.35, 1.0}) {
    const double scaled = median_voiced(yin_f0(sine(330.0, 1.0, 22050, amp)));
    CHECK(scaled == doctest::Approx(base).epsilon(0.005));
  }
}

TEST_CASE("yin rejects buffers shorter than one frame") {
  AudioBuffer buf;
  buf.sample_rate = 22050;
  buf.samples.assign(1000, 0.1f);
  CHECK_THROWS_AS(yin_f0(buf), std::invalid_argument);
}

TEST_CASE("prosody stats on a constant track") {
  F0Track track;
  track.f0_hz.assign(10, 440.0);
  track.voiced.assign(10, 1);
  AudioBuffer buf;
  buf.sample_rate = 22050;
  buf.samples.assign(22050, 0.1f);
  const ProsodyStats stats = prosody_stats(track, buf);
  CHECK(*stats.mean_f0 == 440.0);
  CHECK(*stats.std_f0 == 0.0);
  CHECK(stats.duration_s == 1.0);
  CHECK(stats.voiced_fraction == 1.0);
}

TEST_CASE("prosody stats use the population standard deviation") {
  F0Track track;
  track.f0_hz = {100.0, 200.0, 0.0};
  track.voiced = {1, 1, 0};
  AudioBuffer buf;
  buf.sample_rate = 100;
  buf.samples.assign(250, 0.0f);
  const ProsodyStats stats = prosody_stats(track, buf);
  CHECK(*stats.mean_f0 == 150.0);
  CHECK(*stats.std_f0 == 50.0);
  CHECK(stats.duration_s == 2.5);
  CHECK(stats.voiced_fraction == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("all-unvoiced tracks leave f0 stats undefined but duration valid") {
  F0Track track;
  track.f0_hz.assign(5, 0.0);
  track.voiced.assign(5, 0);
  AudioBuffer buf;
  buf.sample_rate = 1000;
  buf.samples.assign(1500, 0.0f);
  const ProsodyStats stats = prosody_stats(track, buf);
  CHECK_FALSE(stats.mean_f0.has_value());
  CHECK_FALSE(stats.std_f0.has_value());
  CHECK(stats.duration_s == 1.5);
}

TEST_CASE("duration round-trips through the sample count") {
  for (size_t n : {1u, 7u, 22050u, 44101u}) {
    AudioBuffer buf;
    buf.sample_rate = 22050;
    buf.samples.assign(n, 0.0f);
    F0Track track;  // duration does not depend on the track
    const ProsodyStats stats = prosody_stats(track, buf);
    CHECK(std::llround(stats.duration_s * buf.sample_rate) == static_cast<int64_t>(n));
  }
}

TEST_CASE("mismatch of identical lists is zero") {
  std::vector<ProsodyStats> stats(3);
  for (size_t i = 0; i < 3; ++i) {
    stats[i].duration_s = 1.0 + static_cast<double>(i);
    stats[i].mean_f0 = 200.0 + static_cast<double>(i);
    stats[i].std_f0 = 10.0;
  }
  const MismatchReport report = mismatch(stats, stats);
  CHECK(report.d_duration_s == 0.0);
  CHECK(*report.d_mean_f0 == 0.0);
  CHECK(*report.d_std_f0 == 0.0);
  CHECK(report.f0_pairs_used == 3);
  CHECK(report.f0_pairs_excluded == 0);
}

TEST_CASE("opposite duration deltas cancel in the average") {
  std::vector<ProsodyStats> sys(2), ref(2);
  sys[0].duration_s = 1.2;
  ref[0].duration_s = 1.0;
  sys[1].duration_s = 0.8;
  ref[1].duration_s = 1.0;
  const MismatchReport report = mismatch(sys, ref);
  CHECK(report.d_duration_s == doctest::Approx(0.0));
  CHECK_FALSE(report.d_mean_f0.has_value());  // no voiced pairs at all
  CHECK(report.f0_pairs_excluded == 2);
}

TEST_CASE("pairs with undefined f0 on either side are excluded and counted") {
  std::vector<ProsodyStats> sys(3), ref(3);
  for (size_t i = 0; i < 3; ++i) {
    sys[i].duration_s = ref[i].duration_s = 1.0;
    sys[i].mean_f0 = 220.0;
    sys[i].std_f0 = 5.0;
    ref[i].mean_f0 = 200.0;
    ref[i].std_f0 = 4.0;
  }
  sys[1].mean_f0.reset();
  sys[1].std_f0.reset();
  const MismatchReport report = mismatch(sys, ref);
  CHECK(report.f0_pairs_used == 2);
  CHECK(report.f0_pairs_excluded == 1);
  CHECK(*report.d_mean_f0 == doctest::Approx(20.0));
  CHECK(*report.d_std_f0 == doctest::Approx(1.0));
}

TEST_CASE("mismatch validates list alignment") {
  std::vector<ProsodyStats> a(2), b(3);
  CHECK_THROWS_AS(mismatch(a, b), std::invalid_argument);
}

TEST_CASE("self-comparison through the full pipeline gives exactly zero deltas") {
  // same audio on both sides: the deterministic pipeline must agree with
  // itself, the desk-scale analog of near-zero f0-std mismatch
  const AudioBuffer buf = sine(440.0, 0.6);
  const ProsodyStats stats = prosody_stats(yin_f0(buf), buf);
  const MismatchReport report = mismatch({stats}, {stats});
  CHECK(report.d_duration_s == 0.0);
  CHECK(*report.d_mean_f0 == 0.0);
  CHECK(*report.d_std_f0 == 0.0);
}
