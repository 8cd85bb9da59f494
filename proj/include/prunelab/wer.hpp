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
#include <span>

namespace prunelab {

/// Levenshtein distance with unit substitution/deletion/insertion costs.
int64_t edit_distance(std::span<const int32_t> a, std::span<const int32_t> b);

/// (S + D + I) / |reference|; may exceed 1.  Throws on an empty reference.
double wer(std::span<const int32_t> reference, std::span<const int32_t> hypothesis);

}  // namespace prunelab
