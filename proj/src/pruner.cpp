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

#include "prunelab/pruner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace prunelab {

namespace {

struct Coord {
  float magnitude;
  int32_t tensor_ord;  // ordinal in lexicographic name order
  int64_t index;
};

void check_coverage(const PruneMask& mask, const ParamStore& store) {
  if (!mask.covers(store))
    throw std::invalid_argument("mask does not cover the store's prunable set");
}

}  // namespace

PruneMask PruneMask::all_ones(const ParamStore& store) {
  PruneMask m;
  for (const auto& name : store.prunable())
    m.add(name, Tensor::ones(store.at(name).shape));
  return m;
}

void PruneMask::add(const std::string& name, Tensor t) {
  for (float v : t.data)
    if (v != 0.0f && v != 1.0f)
      throw std::invalid_argument("mask values must be 0 or 1 (tensor " + name + ")");
  if (entries_.count(name)) throw std::invalid_argument("duplicate mask tensor: " + name);
  entries_.emplace(name, std::move(t));
}

const Tensor& PruneMask::at(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::out_of_range("no mask tensor named " + name);
  return it->second;
}

bool PruneMask::contains(const std::string& name) const { return entries_.count(name) > 0; }

bool PruneMask::covers(const ParamStore& store) const {
  if (entries_.size() != store.prunable().size()) return false;
  for (const auto& name : store.prunable()) {
    auto it = entries_.find(name);
    if (it == entries_.end() || it->second.shape != store.at(name).shape) return false;
  }
  return true;
}

int64_t PruneMask::zero_count() const {
  int64_t z = 0;
  for (const auto& [name, t] : entries_)
    for (float v : t.data)
      if (v == 0.0f) ++z;
  return z;
}

int64_t PruneMask::total_count() const {
  int64_t n = 0;
  for (const auto& [name, t] : entries_) n += t.numel();
  return n;
}

PruneMask ump(const ParamStore& store, double target_sparsity) {
  return ump_masked(store, target_sparsity, PruneMask::all_ones(store));
}

PruneMask ump_masked(const ParamStore& store, double target_sparsity,
                     const PruneMask& fixed) {
  if (!(target_sparsity >= 0.0 && target_sparsity < 1.0))
    throw std::invalid_argument("target sparsity must be in [0, 1)");
  if (store.prunable().empty())
    throw std::invalid_argument("ump: prunable set is empty");
  check_coverage(fixed, store);

  const int64_t d = store.prunable_count();
  const int64_t k_total = std::llround(target_sparsity * static_cast<double>(d));
  const int64_t k_fixed = fixed.zero_count();
  if (k_total < k_fixed)
    throw std::invalid_argument("target sparsity below the fixed mask's sparsity");

  // Candidates are the coordinates surviving `fixed`, keyed by magnitude and
  // canonical order.
  std::vector<Coord> coords;
  coords.reserve(static_cast<size_t>(d - k_fixed));
  int32_t ord = 0;
  for (const auto& name : store.prunable()) {
    const Tensor& t = store.at(name);
    const Tensor& f = fixed.at(name);
    for (int64_t i = 0; i < t.numel(); ++i)
      if (f.data[static_cast<size_t>(i)] != 0.0f)
        coords.push_back(Coord{std::fabs(t.data[static_cast<size_t>(i)]), ord, i});
    ++ord;
  }

  const int64_t k_new = k_total - k_fixed;
  auto order = [](const Coord& a, const Coord& b) {
    if (a.magnitude != b.magnitude) return a.magnitude < b.magnitude;
    if (a.tensor_ord != b.tensor_ord) return a.tensor_ord < b.tensor_ord;
    return a.index < b.index;
  };
  if (k_new > 0 && k_new < static_cast<int64_t>(coords.size())) {
    std::nth_element(coords.begin(), coords.begin() + k_new, coords.end(), order);
    coords.resize(static_cast<size_t>(k_new));
  } else if (k_new == 0) {
    coords.clear();
  }

  PruneMask mask;
  ord = 0;
  std::vector<const std::string*> names;
  for (const auto& name : store.prunable()) names.push_back(&name);
  for (const auto& name : store.prunable()) {
    const Tensor& f = fixed.at(name);
    Tensor t = Tensor::ones(store.at(name).shape);
    for (int64_t i = 0; i < t.numel(); ++i)
      if (f.data[static_cast<size_t>(i)] == 0.0f) t.data[static_cast<size_t>(i)] = 0.0f;
    mask.add(name, std::move(t));
  }
  for (const Coord& c : coords)
    mask.entries()[*names[static_cast<size_t>(c.tensor_ord)]]
        .data[static_cast<size_t>(c.index)] = 0.0f;
  return mask;
}

ParamStore apply_mask(const ParamStore& store, const PruneMask& mask) {
  check_coverage(mask, store);
  ParamStore out;
  for (const auto& [name, t] : store.entries()) {
    Tensor copy = t;
    if (store.is_prunable(name)) {
      const Tensor& m = mask.at(name);
      for (size_t i = 0; i < copy.data.size(); ++i)
        if (m.data[i] == 0.0f) copy.data[i] = 0.0f;
    }
    out.add(name, std::move(copy), store.is_prunable(name));
  }
  return out;
}

double sparsity(const PruneMask& mask) {
  const int64_t total = mask.total_count();
  if (total == 0) throw std::invalid_argument("sparsity of an empty mask");
  return static_cast<double>(mask.zero_count()) / static_cast<double>(total);
}

double mask_overlap(const PruneMask& m1, const PruneMask& m2) {
  if (m1.entries().size() != m2.entries().size())
    throw std::invalid_argument("mask_overlap: coverage mismatch");
  int64_t inter = 0, uni = 0;
  auto it2 = m2.entries().begin();
  for (const auto& [name, t1] : m1.entries()) {
    if (it2->first != name || it2->second.shape != t1.shape)
      throw std::invalid_argument("mask_overlap: coverage mismatch");
    const Tensor& t2 = it2->second;
    for (size_t i = 0; i < t1.data.size(); ++i) {
      const bool z1 = t1.data[i] == 0.0f;
      const bool z2 = t2.data[i] == 0.0f;
      if (z1 && z2) ++inter;
      if (z1 || z2) ++uni;
    }
    ++it2;
  }
  if (uni == 0) return 1.0;  // both all-ones
  return static_cast<double>(inter) / static_cast<double>(uni);
}

SparsityReport sparsity_report(const PruneMask& mask) {
  SparsityReport report;
  report.prunable_count = mask.total_count();
  for (const auto& [name, t] : mask.entries()) {
    int64_t z = 0;
    for (float v : t.data)
      if (v == 0.0f) ++z;
    report.per_tensor[name] =
        static_cast<double>(z) / static_cast<double>(t.numel());
    report.zero_count += z;
  }
  report.global_sparsity = report.prunable_count == 0
                               ? 0.0
                               : static_cast<double>(report.zero_count) /
                                     static_cast<double>(report.prunable_count);
  return report;
}

void save_mask(const std::filesystem::path& path, const PruneMask& mask) {
  ParamStore store;
  for (const auto& [name, t] : mask.entries()) store.add(name, t, /*prunable=*/true);
  write_store_file(path, store, /*mask_flag=*/true);
}

PruneMask load_mask(const std::filesystem::path& path) {
  LoadedStore loaded = read_store_file(path);
  if (!loaded.is_mask)
    throw std::runtime_error("not a mask file (manifest flag missing): " + path.string());
  PruneMask mask;
  for (const auto& [name, t] : loaded.store.entries()) mask.add(name, t);
  return mask;
}

}  // namespace prunelab
