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
#include <algorithm>
#include <cmath>
#include <unistd.h>

#include "doctest.h"
#include "prunelab/pruner.hpp"
#include "prunelab/rng.hpp"

using namespace prunelab;

namespace {

// Reference pruner: full stable sort of (|value|, canonical order), zero the
// first k.  Independent of the nth_element path used by ump().
PruneMask brute_force_ump(const ParamStore& store, double target) {
  const auto coords = flatten_prunable(store);
  const int64_t d = static_cast<int64_t>(coords.size());
  const int64_t k = std::llround(target * static_cast<double>(d));

  std::vector<size_t> order(coords.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return std::fabs(coords[a].value) < std::fabs(coords[b].value);
  });

  PruneMask mask = PruneMask::all_ones(store);
  for (int64_t i = 0; i < k; ++i) {
    const FlatCoord& c = coords[order[static_cast<size_t>(i)]];
    mask.entries().at(c.name).data[static_cast<size_t>(c.index)] = 0.0f;
  }
  return mask;
}

ParamStore example_store() {
  ParamStore store;
  store.add("a", Tensor({3}, {0.1f, -2.0f, 0.3f}), true);
  store.add("b", Tensor({4}, {1.5f, -0.2f, 0.05f, 4.0f}), true);
  return store;
}

ParamStore gaussian_store(uint64_t seed, int64_t n) {
  Rng rng(seed);
  Tensor t = Tensor::zeros({n});
  for (auto& v : t.data) v = static_cast<float>(rng.normal());
  ParamStore store;
  store.add("w", std::move(t), true);
  return store;
}

std::vector<std::pair<std::string, int64_t>> zero_set(const PruneMask& mask) {
  std::vector<std::pair<std::string, int64_t>> zeros;
  for (const auto& [name, t] : mask.entries())
    for (int64_t i = 0; i < t.numel(); ++i)
      if (t.data[static_cast<size_t>(i)] == 0.0f) zeros.emplace_back(name, i);
  return zeros;
}

bool subset_of(const std::vector<std::pair<std::string, int64_t>>& small,
               const std::vector<std::pair<std::string, int64_t>>& big) {
  for (const auto& z : small)
    if (std::find(big.begin(), big.end(), z) == big.end()) return false;
  return true;
}

}  // namespace

TEST_CASE("ump prunes the globally smallest magnitudes") {
  const ParamStore store = example_store();
  const PruneMask mask = ump(store, 3.0 / 7.0);
  // magnitudes 0.1 (a[0]), 0.2 (b[1]), 0.05 (b[2]) are the three smallest
  CHECK(mask.at("a").data == std::vector<float>{0.0f, 1.0f, 1.0f});
  CHECK(mask.at("b").data == std::vector<float>{1.0f, 0.0f, 0.0f, 1.0f});
}

TEST_CASE("ump at zero sparsity is all ones") {
  const ParamStore store = example_store();
  const PruneMask mask = ump(store, 0.0);
  CHECK(mask.zero_count() == 0);
  CHECK(sparsity(mask) == 0.0);
}

TEST_CASE("ump matches the brute-force sort oracle on gaussian weights") {
  const ParamStore store = gaussian_store(7, 1000);
  const PruneMask mask = ump(store, 0.9);
  CHECK(mask.zero_count() == 900);
  CHECK(mask == brute_force_ump(store, 0.9));

  // threshold property: no kept weight is smaller than a pruned one
  float max_pruned = 0.0f, min_kept = std::numeric_limits<float>::infinity();
  const Tensor& w = store.at("w");
  const Tensor& m = mask.at("w");
  for (size_t i = 0; i < w.data.size(); ++i) {
    const float mag = std::fabs(w.data[i]);
    if (m.data[i] == 0.0f)
      max_pruned = std::max(max_pruned, mag);
    else
      min_kept = std::min(min_kept, mag);
  }
  CHECK(max_pruned <= min_kept);
}

TEST_CASE("ump input validation") {
  const ParamStore store = example_store();
  CHECK_THROWS_AS(ump(store, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ump(store, -0.1), std::invalid_argument);
  ParamStore no_prunable;
  no_prunable.add("a", Tensor({1}, {1.0f}), false);
  CHECK_THROWS_AS(ump(no_prunable, 0.5), std::invalid_argument);
}

TEST_CASE("apply_mask zeroes exactly the masked coordinates") {
  ParamStore store;
  store.add("a", Tensor({2}, {5.0f, -3.0f}), true);
  PruneMask mask;
  mask.add("a", Tensor({2}, {0.0f, 1.0f}));
  const ParamStore out = apply_mask(store, mask);
  CHECK(out.at("a").data == std::vector<float>{0.0f, -3.0f});

  const PruneMask ones = PruneMask::all_ones(store);
  const ParamStore same = apply_mask(store, ones);
  CHECK(same.at("a").data == store.at("a").data);
}

TEST_CASE("apply_mask leaves non-prunable tensors untouched") {
  ParamStore store;
  store.add("w", Tensor({2}, {5.0f, -3.0f}), true);
  store.add("bias", Tensor({2}, {0.01f, 0.02f}), false);
  const PruneMask mask = ump(store, 0.5);
  const ParamStore out = apply_mask(store, mask);
  CHECK(out.at("bias").data == store.at("bias").data);
  CHECK_FALSE(mask.contains("bias"));
}

TEST_CASE("apply_mask rejects masks that miss a prunable tensor") {
  ParamStore store;
  store.add("a", Tensor({2}, {5.0f, -3.0f}), true);
  store.add("b", Tensor({1}, {1.0f}), true);
  PruneMask mask;
  mask.add("a", Tensor({2}, {0.0f, 1.0f}));
  CHECK_THROWS_AS(apply_mask(store, mask), std::invalid_argument);
}

TEST_CASE("sparsity is the exact zero fraction") {
  PruneMask mask;
  mask.add("a", Tensor({4}, {0.0f, 1.0f, 1.0f, 0.0f}));
  CHECK(sparsity(mask) == 0.5);
  PruneMask ones;
  ones.add("a", Tensor({4}, {1.0f, 1.0f, 1.0f, 1.0f}));
  CHECK(sparsity(ones) == 0.0);
}

TEST_CASE("ump sparsity equals round(s*d)/d across a grid") {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    const ParamStore store = gaussian_store(seed, 137);  // odd size to exercise rounding
    const int64_t d = store.prunable_count();
    for (double s = 0.0; s < 1.0; s += 0.1) {
      const PruneMask mask = ump(store, s);
      const int64_t k = std::llround(s * static_cast<double>(d));
      CHECK(mask.zero_count() == k);
      CHECK(sparsity(mask) == static_cast<double>(k) / static_cast<double>(d));
    }
  }
}

TEST_CASE("nestedness: lower-sparsity zero sets are contained in higher ones") {
  const ParamStore store = gaussian_store(3, 211);
  const PruneMask low = ump(store, 0.3);
  const PruneMask high = ump(store, 0.8);
  CHECK(subset_of(zero_set(low), zero_set(high)));
}

TEST_CASE("idempotence: re-pruning a pruned store reproduces the mask") {
  const ParamStore store = gaussian_store(11, 300);
  const PruneMask mask = ump(store, 0.6);
  const ParamStore pruned = apply_mask(store, mask);
  const PruneMask again = ump(pruned, 0.6);
  CHECK(mask == again);
}

TEST_CASE("ties are broken by canonical coordinate order") {
  ParamStore store;
  store.add("a", Tensor({2}, {1.0f, -1.0f}), true);
  store.add("b", Tensor({2}, {1.0f, 2.0f}), true);
  const PruneMask mask = ump(store, 0.5);  // k = 2 of 4; all of a ties at |1|
  CHECK(mask.at("a").data == std::vector<float>{0.0f, 0.0f});
  CHECK(mask.at("b").data == std::vector<float>{1.0f, 1.0f});
}

TEST_CASE("mask_overlap is IoU of zero sets") {
  PruneMask m1, m2, m3;
  m1.add("a", Tensor({5}, {1.f, 0.f, 0.f, 0.f, 1.f}));
  m2.add("a", Tensor({5}, {1.f, 0.f, 0.f, 0.f, 1.f}));
  CHECK(mask_overlap(m1, m2) == 1.0);

  m3.add("a", Tensor({5}, {0.f, 1.f, 1.f, 1.f, 0.f}));  // disjoint zeros, equal size
  CHECK(mask_overlap(m1, m3) == 0.0);

  PruneMask m4, m5;
  m4.add("a", Tensor({5}, {1.f, 0.f, 0.f, 0.f, 1.f}));  // zeros {1,2,3}
  m5.add("a", Tensor({5}, {1.f, 1.f, 0.f, 0.f, 0.f}));  // zeros {2,3,4}
  CHECK(mask_overlap(m4, m5) == 0.5);

  PruneMask ones1, ones2;
  ones1.add("a", Tensor({3}, {1.f, 1.f, 1.f}));
  ones2.add("a", Tensor({3}, {1.f, 1.f, 1.f}));
  CHECK(mask_overlap(ones1, ones2) == 1.0);  // convention

  PruneMask other;
  other.add("b", Tensor({3}, {1.f, 1.f, 1.f}));
  CHECK_THROWS_AS(mask_overlap(ones1, other), std::invalid_argument);
}

TEST_CASE("sparsity report matches per-tensor counts") {
  const ParamStore store = example_store();
  const PruneMask mask = ump(store, 3.0 / 7.0);
  const SparsityReport report = sparsity_report(mask);
  CHECK(report.zero_count == 3);
  CHECK(report.prunable_count == 7);
  CHECK(report.global_sparsity == doctest::Approx(3.0 / 7.0));
  CHECK(report.per_tensor.at("a") == doctest::Approx(1.0 / 3.0));
  CHECK(report.per_tensor.at("b") == doctest::Approx(0.5));
}

TEST_CASE("masks round-trip through the container format") {
  const ParamStore store = gaussian_store(5, 64);
  const PruneMask mask = ump(store, 0.4);
  const auto path = std::filesystem::temp_directory_path() /
                    ("prunelab_mask_" + std::to_string(::getpid()) + ".prnt");
  save_mask(path, mask);
  const PruneMask loaded = load_mask(path);
  CHECK(mask == loaded);

  // plain checkpoints must not load as masks
  const auto ckpt = path.string() + ".ckpt";
  save_checkpoint(store, ckpt);
  CHECK_THROWS_AS(load_mask(ckpt), std::runtime_error);
  std::filesystem::remove(path);
  std::filesystem::remove(ckpt);
}

TEST_CASE("ump_masked extends a fixed zero set over survivors only") {
  const ParamStore store = gaussian_store(9, 100);
  const PruneMask first = ump(store, 0.5);
  // pretend training made every weight large; survivors-only pruning must
  // still keep the first zero set
  ParamStore trained = store;
  for (auto& [name, t] : trained.entries())
    for (auto& v : t.data) v += (v >= 0 ? 10.0f : -10.0f);
  const PruneMask second = ump_masked(trained, 0.75, first);
  CHECK(second.zero_count() == 75);
  CHECK(subset_of(zero_set(first), zero_set(second)));
  CHECK_THROWS_AS(ump_masked(trained, 0.3, first), std::invalid_argument);
}
