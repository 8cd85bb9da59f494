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

#include "prunelab/param_store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace prunelab {

namespace {

constexpr char kMagic[5] = {'P', 'R', 'N', 'T', '1'};

int64_t shape_numel(const std::vector<int64_t>& shape) {
  if (shape.empty()) throw std::invalid_argument("tensor shape must be nonempty");
  int64_t n = 1;
  for (int64_t dim : shape) {
    if (dim <= 0) throw std::invalid_argument("tensor dimensions must be positive");
    n *= dim;
  }
  return n;
}

void append_u64_le(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint64_t read_u64_le(const unsigned char* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return v;
}

void append_f32_le(std::string& out, float f) {
  const uint32_t bits = std::bit_cast<uint32_t>(f);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

float read_f32_le(const unsigned char* p) {
  uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<uint32_t>(p[i]) << (8 * i);
  return std::bit_cast<float>(bits);
}

}  // namespace

Tensor::Tensor(std::vector<int64_t> s, std::vector<float> d)
    : shape(std::move(s)), data(std::move(d)) {
  if (static_cast<int64_t>(data.size()) != shape_numel(shape))
    throw std::invalid_argument("tensor data length does not match shape");
}

Tensor Tensor::zeros(std::vector<int64_t> shape) {
  const int64_t n = shape_numel(shape);
  Tensor t;
  t.shape = std::move(shape);
  t.data.assign(static_cast<size_t>(n), 0.0f);
  return t;
}

Tensor Tensor::ones(std::vector<int64_t> shape) {
  Tensor t = zeros(std::move(shape));
  std::fill(t.data.begin(), t.data.end(), 1.0f);
  return t;
}

int64_t Tensor::numel() const { return static_cast<int64_t>(data.size()); }

bool Tensor::same_shape(const Tensor& other) const { return shape == other.shape; }

bool Tensor::all_finite() const {
  for (float v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

void ParamStore::add(const std::string& name, Tensor t, bool prunable) {
  if (entries_.count(name)) throw std::invalid_argument("duplicate tensor name: " + name);
  shape_numel(t.shape);  // validates
  entries_.emplace(name, std::move(t));
  if (prunable) prunable_.insert(name);
}

bool ParamStore::contains(const std::string& name) const { return entries_.count(name) > 0; }

const Tensor& ParamStore::at(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::out_of_range("no tensor named " + name);
  return it->second;
}

Tensor& ParamStore::at(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::out_of_range("no tensor named " + name);
  return it->second;
}

void ParamStore::set_prunable(const std::string& name, bool prunable) {
  if (!contains(name)) throw std::out_of_range("no tensor named " + name);
  if (prunable)
    prunable_.insert(name);
  else
    prunable_.erase(name);
}

bool ParamStore::is_prunable(const std::string& name) const {
  return prunable_.count(name) > 0;
}

int64_t ParamStore::prunable_count() const {
  int64_t n = 0;
  for (const auto& name : prunable_) n += at(name).numel();
  return n;
}

int64_t ParamStore::total_count() const {
  int64_t n = 0;
  for (const auto& [name, t] : entries_) n += t.numel();
  return n;
}

std::vector<FlatCoord> flatten_prunable(const ParamStore& store) {
  if (store.prunable().empty())
    throw std::invalid_argument("flatten_prunable: prunable set is empty");
  std::vector<FlatCoord> out;
  out.reserve(static_cast<size_t>(store.prunable_count()));
  for (const auto& name : store.prunable()) {
    const Tensor& t = store.at(name);
    for (int64_t i = 0; i < t.numel(); ++i)
      out.push_back(FlatCoord{name, i, t.data[static_cast<size_t>(i)]});
  }
  return out;
}

void write_store_file(const std::filesystem::path& path, const ParamStore& store,
                      bool mask_flag) {
  nlohmann::json manifest;
  manifest["mask"] = mask_flag;
  manifest["tensors"] = nlohmann::json::array();
  int64_t offset = 0;
  for (const auto& [name, t] : store.entries()) {
    if (!t.all_finite())
      throw std::runtime_error("refusing to serialize non-finite values in tensor " + name);
    nlohmann::json entry;
    entry["name"] = name;
    entry["shape"] = t.shape;
    entry["prunable"] = store.is_prunable(name);
    entry["offset"] = offset;
    manifest["tensors"].push_back(entry);
    offset += 4 * t.numel();
  }

  const std::string manifest_str = manifest.dump();
  std::string bytes;
  bytes.reserve(13 + manifest_str.size() + static_cast<size_t>(offset));
  bytes.append(kMagic, sizeof(kMagic));
  append_u64_le(bytes, manifest_str.size());
  bytes.append(manifest_str);
  for (const auto& [name, t] : store.entries())
    for (float v : t.data) append_f32_le(bytes, v);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

LoadedStore read_store_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < sizeof(kMagic) + 8 ||
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("bad magic: not a PRNT1 checkpoint: " + path.string());

  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const uint64_t manifest_len = read_u64_le(p + sizeof(kMagic));
  const size_t manifest_start = sizeof(kMagic) + 8;
  if (manifest_start + manifest_len > bytes.size())
    throw std::runtime_error("length mismatch: manifest extends past end of file");

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(bytes.substr(manifest_start, manifest_len));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed manifest JSON: ") + e.what());
  }

  LoadedStore result;
  result.is_mask = manifest.value("mask", false);

  const size_t blob_start = manifest_start + manifest_len;
  int64_t expected_offset = 0;
  std::string prev_name;
  for (const auto& entry : manifest.at("tensors")) {
    const std::string name = entry.at("name").get<std::string>();
    if (!prev_name.empty() && !(prev_name < name))
      throw std::runtime_error("manifest tensor order is not lexicographic");
    prev_name = name;
    const auto shape = entry.at("shape").get<std::vector<int64_t>>();
    const bool prunable = entry.at("prunable").get<bool>();
    const int64_t offset = entry.at("offset").get<int64_t>();
    if (offset != expected_offset)
      throw std::runtime_error("manifest offset mismatch for tensor " + name);
    const int64_t n = shape_numel(shape);

    const size_t begin = blob_start + static_cast<size_t>(offset);
    if (begin + static_cast<size_t>(4 * n) > bytes.size())
      throw std::runtime_error("length mismatch: blob truncated for tensor " + name);
    std::vector<float> data(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
      data[static_cast<size_t>(i)] = read_f32_le(p + begin + 4 * i);
      if (!std::isfinite(data[static_cast<size_t>(i)]))
        throw std::runtime_error("non-finite value in tensor " + name);
    }
    result.store.add(name, Tensor(shape, std::move(data)), prunable);
    expected_offset += 4 * n;
  }
  if (blob_start + static_cast<size_t>(expected_offset) != bytes.size())
    throw std::runtime_error("length mismatch: trailing bytes after last blob");
  return result;
}

void save_checkpoint(const ParamStore& store, const std::filesystem::path& path) {
  write_store_file(path, store, /*mask_flag=*/false);
}

ParamStore load_checkpoint(const std::filesystem::path& path) {
  return read_store_file(path).store;
}

}  // namespace prunelab
