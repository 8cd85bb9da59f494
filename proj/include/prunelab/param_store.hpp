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
#include <map>
#include <set>
#include <string>
#include <vector>

namespace prunelab {

/// Dense row-major tensor of 32-bit reals.
struct Tensor {
  std::vector<int64_t> shape;
  std::vector<float> data;

  Tensor() = default;
  Tensor(std::vector<int64_t> s, std::vector<float> d);
  static Tensor zeros(std::vector<int64_t> shape);
  static Tensor ones(std::vector<int64_t> shape);

  int64_t numel() const;
  bool same_shape(const Tensor& other) const;
  bool all_finite() const;
};

/// Named tensors plus the subset of names eligible for pruning.
/// Iteration order is always lexicographic by name.
class ParamStore {
 public:
  void add(const std::string& name, Tensor t, bool prunable);
  bool contains(const std::string& name) const;
  const Tensor& at(const std::string& name) const;
  Tensor& at(const std::string& name);
  void set_prunable(const std::string& name, bool prunable);
  bool is_prunable(const std::string& name) const;

  const std::map<std::string, Tensor>& entries() const { return entries_; }
  std::map<std::string, Tensor>& entries() { return entries_; }
  const std::set<std::string>& prunable() const { return prunable_; }

  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Total element count over prunable tensors.
  int64_t prunable_count() const;
  /// Total element count over all tensors.
  int64_t total_count() const;

 private:
  std::map<std::string, Tensor> entries_;
  std::set<std::string> prunable_;
};

/// One prunable coordinate in the store's canonical flattening order
/// (lexicographic name, then ascending flat index within the tensor).
struct FlatCoord {
  std::string name;
  int64_t index = 0;
  float value = 0.0f;
};

/// Enumerates all prunable coordinates in canonical order.
/// Throws std::invalid_argument if the prunable set is empty.
std::vector<FlatCoord> flatten_prunable(const ParamStore& store);

// --- Checkpoint container ---------------------------------------------------
//
// File layout: magic "PRNT1" (5 bytes), u64 little-endian manifest length,
// UTF-8 JSON manifest, then concatenated little-endian f32 blobs in manifest
// order.  The manifest lists name/shape/prunable/offset per tensor in
// lexicographic name order; offsets are bytes from the start of the blob
// section.  A top-level "mask" flag marks mask files (values are 0/1).

void save_checkpoint(const ParamStore& store, const std::filesystem::path& path);
ParamStore load_checkpoint(const std::filesystem::path& path);

/// Lower-level entry points used for mask files.
void write_store_file(const std::filesystem::path& path, const ParamStore& store,
                      bool mask_flag);
struct LoadedStore {
  ParamStore store;
  bool is_mask = false;
};
LoadedStore read_store_file(const std::filesystem::path& path);

}  // namespace prunelab
