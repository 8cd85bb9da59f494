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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "prunelab/param_store.hpp"

namespace prunelab {

/// Token ids in [0, vocab).
using TokenSeq = std::vector<int32_t>;

/// T x frame_dim output frames (row-major) plus one stop value per frame.
/// Model outputs carry raw stop logits; dataset targets carry stop
/// probabilities (0/1 for generated data).
struct FrameSeq {
  int64_t frame_dim = 0;
  std::vector<float> frames;
  std::vector<float> stop;

  int64_t num_frames() const {
    return frame_dim == 0 ? 0 : static_cast<int64_t>(frames.size()) / frame_dim;
  }
  float frame_at(int64_t t, int64_t d) const {
    return frames[static_cast<size_t>(t * frame_dim + d)];
  }
};

/// Fixed token -> frame mapping defining the synthetic task.  Rows are kept
/// pairwise at least 0.1 apart in L2 so nearest-row decoding has margin.
struct Codebook {
  int64_t dim = 0;
  std::vector<float> rows;  // size x dim, row-major

  int64_t size() const { return dim == 0 ? 0 : static_cast<int64_t>(rows.size()) / dim; }
  std::span<const float> row(int64_t k) const {
    return {rows.data() + k * dim, static_cast<size_t>(dim)};
  }
  static Codebook generate(uint64_t seed, int32_t vocab, int32_t dim);
  double min_pairwise_distance() const;
};

struct ToyModelConfig {
  int32_t vocab = 16;      // K
  int32_t hidden = 32;     // H
  int32_t frame_dim = 8;   // D
  int32_t upsample = 2;    // r: frames emitted per token
  bool prune_embedding = true;

  int32_t head_dim() const { return upsample * (frame_dim + 1); }
};

/// Non-autoregressive token-to-frames model: embedding, width-3 convolution
/// across positions, two affine+tanh layers, linear head emitting r frames
/// plus r stop logits per position.  Weight matrices are prunable; biases
/// are not.
class ToyModel {
 public:
  ToyModel(ToyModelConfig cfg, ParamStore params);
  static ToyModel random_init(const ToyModelConfig& cfg, uint64_t seed);

  const ToyModelConfig& config() const { return cfg_; }
  const ParamStore& params() const { return params_; }
  ParamStore& params() { return params_; }

  FrameSeq forward(const TokenSeq& tokens) const;

 private:
  ToyModelConfig cfg_;
  ParamStore params_;
};

// Parameter tensor names, in the lexicographic order the store iterates:
//   embed.weight [K,H]; ffn1.bias [H]; ffn1.weight [H,H]; ffn2.bias [H];
//   ffn2.weight [H,H]; head.bias [r(D+1)]; head.weight [r(D+1),H];
//   mix.bias [H]; mix.weight [3,H,H]  (taps at offsets -1, 0, +1)

struct SynthItem {
  TokenSeq tokens;
  FrameSeq target;
};

struct SynthDataset {
  Codebook codebook;
  std::vector<SynthItem> items;
  uint64_t seed = 0;
  int32_t vocab = 0, frame_dim = 0, upsample = 0;
  int32_t len_min = 0, len_max = 0;

  size_t size() const { return items.size(); }
  SynthDataset slice(size_t begin, size_t end) const;
  static SynthDataset concat(const SynthDataset& a, const SynthDataset& b);
};

/// Deterministic synthetic dataset: token sequences uniform over [0,K)^L
/// with L uniform in [len_min, len_max]; each token's target block is its
/// codebook row repeated r times; stop target is 1 on the last frame only.
SynthDataset gen_dataset(uint64_t seed, int32_t n_pairs, int32_t vocab,
                         int32_t frame_dim, int32_t len_min, int32_t len_max,
                         int32_t upsample);

/// Mean frame MSE plus mean stop binary cross-entropy (sigmoid on pred stop
/// logits; target stop values are probabilities).
double loss(const FrameSeq& pred, const FrameSeq& target);

/// Per-parameter gradients, same shapes as the model's ParamStore.
struct Gradients {
  std::map<std::string, std::vector<double>> by_name;
};

/// Exact reverse-mode gradients of the mean batch loss.  `kd_frames`, when
/// non-null, holds a per-item teacher frame matrix added as
/// kd_weight * MSE(pred.frames, teacher frames).
struct BatchResult {
  Gradients grads;
  double loss = 0.0;       // optimized objective (data + KD term)
  double data_loss = 0.0;  // frame MSE + stop BCE only
};
BatchResult batch_gradients(const ToyModel& model, const SynthDataset& data,
                            std::span<const int32_t> indices,
                            const std::vector<std::vector<double>>* kd_frames = nullptr,
                            double kd_weight = 0.0);

/// Spec-level convenience: gradients of the mean loss over a batch.
Gradients gradients(const ToyModel& model, const SynthDataset& data,
                    std::span<const int32_t> indices);

/// Mean per-item data loss over a whole dataset (double-precision path).
double eval_loss(const ToyModel& model, const SynthDataset& data);

/// Teacher-labels token sequences: targets are the teacher's forward outputs
/// verbatim, with stop targets hardened at sigmoid(logit) > 0.5.
SynthDataset synthesize_labels(const ToyModel& teacher,
                               const std::vector<TokenSeq>& xs,
                               const Codebook& codebook);

/// Nearest-codebook-row decoding per r-frame block; stops after the first
/// block whose mean stop sigmoid exceeds 0.5.
TokenSeq transcribe(const FrameSeq& frames, const Codebook& codebook,
                    int32_t upsample);

/// JSON round-trip for datasets (tokens, frames, seeds, hyperparameters).
void save_dataset_json(const std::filesystem::path& path, const SynthDataset& data);
SynthDataset load_dataset_json(const std::filesystem::path& path);

}  // namespace prunelab
