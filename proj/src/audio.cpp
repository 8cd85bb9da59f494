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

#include "prunelab/audio.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace prunelab {

namespace {

uint32_t read_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void append_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_u16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WavError(WavError::Kind::Io, "cannot open: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());

  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw WavError(WavError::Kind::MalformedHeader,
                   "malformed header: not a RIFF/WAVE file: " + path.string());

  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  const unsigned char* data = nullptr;
  uint32_t data_len = 0;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* chunk_id = bytes.data() + pos;
    const uint32_t chunk_len = read_u32(p + pos + 4);
    const size_t body = pos + 8;
    if (body + chunk_len > bytes.size())
      throw WavError(WavError::Kind::MalformedHeader,
                     "malformed header: chunk extends past end of file");
    if (std::memcmp(chunk_id, "fmt ", 4) == 0) {
      if (chunk_len < 16)
        throw WavError(WavError::Kind::MalformedHeader, "malformed header: short fmt chunk");
      format = read_u16(p + body);
      channels = read_u16(p + body + 2);
      sample_rate = read_u32(p + body + 4);
      bits = read_u16(p + body + 14);
      have_fmt = true;
    } else if (std::memcmp(chunk_id, "data", 4) == 0) {
      data = p + body;
      data_len = chunk_len;
    }
    pos = body + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data == nullptr)
    throw WavError(WavError::Kind::MalformedHeader,
                   "malformed header: missing fmt or data chunk");
  if (format != 1)
    throw WavError(WavError::Kind::NotPcm, "unsupported format: not PCM");
  if (channels != 1)
    throw WavError(WavError::Kind::NotMono, "unsupported format: not mono");
  if (bits != 16)
    throw WavError(WavError::Kind::UnsupportedBitDepth, "unsupported format: not 16-bit");
  if (sample_rate == 0)
    throw WavError(WavError::Kind::MalformedHeader, "malformed header: zero sample rate");

  AudioBuffer buf;
  buf.sample_rate = static_cast<int32_t>(sample_rate);
  const size_t n = data_len / 2;
  if (n == 0) throw WavError(WavError::Kind::MalformedHeader, "empty data chunk");
  buf.samples.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const int16_t s = static_cast<int16_t>(data[2 * i] | (data[2 * i + 1] << 8));
    buf.samples[i] = static_cast<float>(s) / 32768.0f;
  }
  return buf;
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& buf) {
  if (buf.samples.empty() || buf.sample_rate <= 0)
    throw std::invalid_argument("write_wav: empty buffer or bad sample rate");
  const uint32_t data_len = static_cast<uint32_t>(buf.samples.size() * 2);

  std::string bytes;
  bytes.reserve(44 + data_len);
  bytes.append("RIFF");
  append_u32(bytes, 36 + data_len);
  bytes.append("WAVE");
  bytes.append("fmt ");
  append_u32(bytes, 16);
  append_u16(bytes, 1);  // PCM
  append_u16(bytes, 1);  // mono
  append_u32(bytes, static_cast<uint32_t>(buf.sample_rate));
  append_u32(bytes, static_cast<uint32_t>(buf.sample_rate) * 2);  // byte rate
  append_u16(bytes, 2);   // block align
  append_u16(bytes, 16);  // bits
  bytes.append("data");
  append_u32(bytes, data_len);
  for (float v : buf.samples) {
    const double clamped = std::min(1.0, std::max(-1.0, static_cast<double>(v)));
    long s = std::lround(clamped * 32768.0);
    s = std::min(32767L, std::max(-32768L, s));
    append_u16(bytes, static_cast<uint16_t>(static_cast<int16_t>(s)));
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw WavError(WavError::Kind::Io, "cannot open for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw WavError(WavError::Kind::Io, "write failed: " + path.string());
}

}  // namespace prunelab
