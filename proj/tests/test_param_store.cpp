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
#include <bit>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "prunelab/param_store.hpp"
#include "prunelab/rng.hpp"

using namespace prunelab;

namespace {

std::filesystem::path temp_file(const char* tag) {
  static int counter = 0;
  return std::filesystem::temp_directory_path() /
         ("prunelab_ps_" + std::to_string(::getpid()) + "_" + tag + "_" +
          std::to_string(counter++) + ".prnt");
}

bool bit_equal(const ParamStore& a, const ParamStore& b) {
  if (a.size() != b.size() || a.prunable() != b.prunable()) return false;
  for (const auto& [name, t] : a.entries()) {
    if (!b.contains(name)) return false;
    const Tensor& u = b.at(name);
    if (u.shape != t.shape) return false;
    for (size_t i = 0; i < t.data.size(); ++i)
      if (std::bit_cast<uint32_t>(t.data[i]) != std::bit_cast<uint32_t>(u.data[i]))
        return false;
  }
  return true;
}

ParamStore random_store(uint64_t seed) {
  Rng rng(seed);
  ParamStore store;
  const int n_tensors = 2 + static_cast<int>(rng.uniform_int(4));
  for (int i = 0; i < n_tensors; ++i) {
    const int64_t rows = 1 + rng.uniform_int(6);
    const int64_t cols = 1 + rng.uniform_int(6);
    Tensor t = Tensor::zeros({rows, cols});
    for (auto& v : t.data) v = static_cast<float>(rng.normal());
    store.add("t" + std::to_string(i), std::move(t), rng.uniform_int(2) == 0);
  }
  return store;
}

}  // namespace

TEST_CASE("round-trip of a single tensor is bit-exact") {
  ParamStore store;
  store.add("a", Tensor({2}, {1.0f, 2.0f}), true);
  const auto path = temp_file("single");
  save_checkpoint(store, path);
  const ParamStore loaded = load_checkpoint(path);
  CHECK(bit_equal(store, loaded));
  std::filesystem::remove(path);
}

TEST_CASE("empty store round-trips") {
  ParamStore store;
  const auto path = temp_file("empty");
  save_checkpoint(store, path);
  const ParamStore loaded = load_checkpoint(path);
  CHECK(loaded.empty());
  std::filesystem::remove(path);
}

TEST_CASE("random stores round-trip bit-exactly") {
  for (uint64_t seed = 0; seed < 8; ++seed) {
    ParamStore store = random_store(seed);
    const auto path = temp_file("rand");
    save_checkpoint(store, path);
    CHECK(bit_equal(store, load_checkpoint(path)));
    std::filesystem::remove(path);
  }
}

TEST_CASE("negative zero and denormals survive the round trip") {
  ParamStore store;
  store.add("z", Tensor({3}, {-0.0f, 1e-42f, -1e-42f}), true);
  const auto path = temp_file("nz");
  save_checkpoint(store, path);
  CHECK(bit_equal(store, load_checkpoint(path)));
  std::filesystem::remove(path);
}

TEST_CASE("non-finite values are refused on save") {
  ParamStore store;
  store.add("a", Tensor({2}, {1.0f, std::numeric_limits<float>::quiet_NaN()}), true);
  const auto path = temp_file("nan");
  CHECK_THROWS_WITH_AS(save_checkpoint(store, path),
                       doctest::Contains("non-finite"), std::runtime_error);

  ParamStore inf_store;
  inf_store.add("a", Tensor({1}, {std::numeric_limits<float>::infinity()}), false);
  CHECK_THROWS_AS(save_checkpoint(inf_store, path), std::runtime_error);
}

TEST_CASE("wrong magic bytes are rejected") {
  const auto path = temp_file("magic");
  std::ofstream out(path, std::ios::binary);
  out << "NOTPRNT1 some garbage bytes";
  out.close();
  CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("magic"),
                       std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("truncated blob is a length-mismatch error") {
  ParamStore store;
  store.add("a", Tensor({4}, {1.0f, 2.0f, 3.0f, 4.0f}), true);
  const auto path = temp_file("trunc");
  save_checkpoint(store, path);

  const auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size - 5);
  CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("mismatch"),
                       std::runtime_error);

  // trailing junk is also a mismatch
  save_checkpoint(store, path);
  std::ofstream out(path, std::ios::binary | std::ios::app);
  out << "xx";
  out.close();
  CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("flatten order is lexicographic name then flat index") {
  ParamStore store;
  store.add("a", Tensor({2}, {3.0f, 1.0f}), true);
  store.add("b", Tensor({1}, {2.0f}), true);

  const auto coords = flatten_prunable(store);
  REQUIRE(coords.size() == 3);
  CHECK(coords[0].name == "a");
  CHECK(coords[0].index == 0);
  CHECK(coords[0].value == 3.0f);
  CHECK(coords[1].name == "a");
  CHECK(coords[1].index == 1);
  CHECK(coords[1].value == 1.0f);
  CHECK(coords[2].name == "b");
  CHECK(coords[2].index == 0);
  CHECK(coords[2].value == 2.0f);
}

TEST_CASE("flatten respects the prunable subset") {
  ParamStore store;
  store.add("a", Tensor({2}, {3.0f, 1.0f}), false);
  store.add("b", Tensor({1}, {2.0f}), true);
  const auto coords = flatten_prunable(store);
  REQUIRE(coords.size() == 1);
  CHECK(coords[0].name == "b");
}

TEST_CASE("flatten of an empty prunable set throws") {
  ParamStore store;
  store.add("a", Tensor({1}, {1.0f}), false);
  CHECK_THROWS_AS(flatten_prunable(store), std::invalid_argument);
}

TEST_CASE("flattening twice yields identical sequences") {
  ParamStore store = random_store(42);
  if (store.prunable().empty()) store.set_prunable("t0", true);
  const auto first = flatten_prunable(store);
  const auto second = flatten_prunable(store);
  REQUIRE(first.size() == second.size());
  for (size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].name == second[i].name);
    CHECK(first[i].index == second[i].index);
    CHECK(first[i].value == second[i].value);
  }
}

TEST_CASE("tensor shape validation") {
  CHECK_THROWS_AS(Tensor({2}, {1.0f}), std::invalid_argument);
  CHECK_THROWS_AS(Tensor({0}, {}), std::invalid_argument);
  ParamStore store;
  store.add("a", Tensor({1}, {1.0f}), true);
  CHECK_THROWS_AS(store.add("a", Tensor({1}, {2.0f}), true), std::invalid_argument);
}
