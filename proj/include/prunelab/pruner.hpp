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

#include <map>
#include <string>

#include "prunelab/param_store.hpp"

namespace prunelab {

/// Binary mask over a store's prunable tensors.  Values are 0.0f / 1.0f;
/// coverage is exactly the prunable name set of the store it was built from.
class PruneMask {
 public:
  PruneMask() = default;

  static PruneMask all_ones(const ParamStore& store);

  void add(const std::string& name, Tensor t);
  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const;
  const std::map<std::string, Tensor>& entries() const { return entries_; }
  std::map<std::string, Tensor>& entries() { return entries_; }

  /// True when the mask's names and shapes match the store's prunable set.
  bool covers(const ParamStore& store) const;

  int64_t zero_count() const;
  int64_t total_count() const;

  bool operator==(const PruneMask& other) const {
    if (entries_.size() != other.entries_.size()) return false;
    for (const auto& [name, t] : entries_) {
      auto it = other.entries_.find(name);
      if (it == other.entries_.end() || it->second.shape != t.shape ||
          it->second.data != t.data)
        return false;
    }
    return true;
  }

 private:
  std::map<std::string, Tensor> entries_;
};

struct SparsityReport {
  double global_sparsity = 0.0;
  std::map<std::string, double> per_tensor;
  int64_t zero_count = 0;
  int64_t prunable_count = 0;
};

/// Global unstructured magnitude pruning: masks the k = round(s * d) smallest
/// |value| coordinates across all prunable tensors, ties broken by canonical
/// flatten order (earlier coordinate pruned first).
PruneMask ump(const ParamStore& store, double target_sparsity);

/// UMP restricted to coordinates surviving `fixed`: the zero set of `fixed`
/// is kept and extended to round(target * d) total zeros using the smallest
/// surviving magnitudes.  Requires target at least fixed's sparsity.
PruneMask ump_masked(const ParamStore& store, double target_sparsity,
                     const PruneMask& fixed);

/// Element-wise product over prunable tensors; other tensors copied as-is.
ParamStore apply_mask(const ParamStore& store, const PruneMask& mask);

/// Fraction of prunable coordinates masked to zero.
double sparsity(const PruneMask& mask);

/// Intersection-over-union of the two masks' zero sets (1.0 when both empty).
double mask_overlap(const PruneMask& m1, const PruneMask& m2);

SparsityReport sparsity_report(const PruneMask& mask);

/// Masks serialize in the checkpoint container with manifest flag "mask".
void save_mask(const std::filesystem::path& path, const PruneMask& mask);
PruneMask load_mask(const std::filesystem::path& path);

}  // namespace prunelab
