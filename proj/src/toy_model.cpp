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

#include "prunelab/toy_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "prunelab/rng.hpp"

namespace prunelab {

namespace {

double stable_bce(double logit, double target) {
  return std::max(logit, 0.0) - logit * target + std::log1p(std::exp(-std::fabs(logit)));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Raw double-precision views over the model's f32 parameters.
struct ModelView {
  const float* embed;
  const float* mix_w;
  const float* mix_b;
  const float* w1;
  const float* b1;
  const float* w2;
  const float* b2;
  const float* head_w;
  const float* head_b;
  int32_t K, H, D, r, OD;
};

ModelView make_view(const ToyModel& model) {
  const ParamStore& p = model.params();
  const ToyModelConfig& c = model.config();
  return ModelView{p.at("embed.weight").data.data(), p.at("mix.weight").data.data(),
                   p.at("mix.bias").data.data(),     p.at("ffn1.weight").data.data(),
                   p.at("ffn1.bias").data.data(),    p.at("ffn2.weight").data.data(),
                   p.at("ffn2.bias").data.data(),    p.at("head.weight").data.data(),
                   p.at("head.bias").data.data(),    c.vocab,
                   c.hidden,                         c.frame_dim,
                   c.upsample,                       c.head_dim()};
}

// Per-item activations, all double.
struct Trace {
  int64_t L = 0;
  std::vector<double> e, h0, h1, h2, out;  // L*H, L*H, L*H, L*H, L*OD
};

void forward_item(const ModelView& v, const TokenSeq& tokens, Trace& tr) {
  const int64_t L = static_cast<int64_t>(tokens.size());
  if (L < 1) throw std::invalid_argument("token sequence must be nonempty");
  const int32_t H = v.H, OD = v.OD;
  tr.L = L;
  tr.e.assign(static_cast<size_t>(L * H), 0.0);
  tr.h0.assign(static_cast<size_t>(L * H), 0.0);
  tr.h1.assign(static_cast<size_t>(L * H), 0.0);
  tr.h2.assign(static_cast<size_t>(L * H), 0.0);
  tr.out.assign(static_cast<size_t>(L * OD), 0.0);

  for (int64_t t = 0; t < L; ++t) {
    const int32_t tok = tokens[static_cast<size_t>(t)];
    if (tok < 0 || tok >= v.K) throw std::out_of_range("token id out of range");
    const float* row = v.embed + static_cast<int64_t>(tok) * H;
    for (int32_t i = 0; i < H; ++i) tr.e[static_cast<size_t>(t * H + i)] = row[i];
  }

  // width-3 convolution across positions, zero padding at both ends
  for (int64_t t = 0; t < L; ++t) {
    double* h0t = tr.h0.data() + t * H;
    for (int32_t o = 0; o < H; ++o) h0t[o] = v.mix_b[o];
    for (int32_t k = 0; k < 3; ++k) {
      const int64_t src = t + k - 1;
      if (src < 0 || src >= L) continue;
      const double* et = tr.e.data() + src * H;
      const float* wk = v.mix_w + static_cast<int64_t>(k) * H * H;
      for (int32_t o = 0; o < H; ++o) {
        const float* wrow = wk + static_cast<int64_t>(o) * H;
        double acc = 0.0;
        for (int32_t i = 0; i < H; ++i) acc += static_cast<double>(wrow[i]) * et[i];
        h0t[o] += acc;
      }
    }
  }

  for (int64_t t = 0; t < L; ++t) {
    const double* h0t = tr.h0.data() + t * H;
    double* h1t = tr.h1.data() + t * H;
    for (int32_t o = 0; o < H; ++o) {
      const float* wrow = v.w1 + static_cast<int64_t>(o) * H;
      double acc = v.b1[o];
      for (int32_t i = 0; i < H; ++i) acc += static_cast<double>(wrow[i]) * h0t[i];
      h1t[o] = std::tanh(acc);
    }
    const double* h1c = h1t;
    double* h2t = tr.h2.data() + t * H;
    for (int32_t o = 0; o < H; ++o) {
      const float* wrow = v.w2 + static_cast<int64_t>(o) * H;
      double acc = v.b2[o];
      for (int32_t i = 0; i < H; ++i) acc += static_cast<double>(wrow[i]) * h1c[i];
      h2t[o] = std::tanh(acc);
    }
    double* outt = tr.out.data() + t * OD;
    for (int32_t o = 0; o < OD; ++o) {
      const float* wrow = v.head_w + static_cast<int64_t>(o) * H;
      double acc = v.head_b[o];
      for (int32_t i = 0; i < H; ++i) acc += static_cast<double>(wrow[i]) * h2t[i];
      outt[o] = acc;
    }
  }
}

// Data loss of a traced item and, when grads requested, d(loss)/d(out).
double item_loss_from_trace(const ModelView& v, const Trace& tr, const FrameSeq& target,
                            const std::vector<double>* kd_frames, double kd_weight,
                            std::vector<double>* dout, double* data_loss_out) {
  const int32_t D = v.D, r = v.r, OD = v.OD;
  const int64_t T = tr.L * r;
  if (target.frame_dim != D || target.num_frames() != T ||
      static_cast<int64_t>(target.stop.size()) != T)
    throw std::invalid_argument("target shape mismatch");
  if (kd_frames && static_cast<int64_t>(kd_frames->size()) != T * D)
    throw std::invalid_argument("kd target shape mismatch");

  if (dout) dout->assign(static_cast<size_t>(tr.L * OD), 0.0);

  const double frame_scale = 1.0 / static_cast<double>(T * D);
  const double stop_scale = 1.0 / static_cast<double>(T);
  double mse = 0.0, bce = 0.0, kd_mse = 0.0;
  for (int64_t t = 0; t < tr.L; ++t) {
    const double* outt = tr.out.data() + t * OD;
    double* doutt = dout ? dout->data() + t * OD : nullptr;
    for (int32_t j = 0; j < r; ++j) {
      const int64_t frame = t * r + j;
      for (int32_t d = 0; d < D; ++d) {
        const double pred = outt[j * (D + 1) + d];
        const double want = target.frames[static_cast<size_t>(frame * D + d)];
        const double diff = pred - want;
        mse += diff * diff * frame_scale;
        double g = 2.0 * diff * frame_scale;
        if (kd_frames) {
          const double kd_diff = pred - (*kd_frames)[static_cast<size_t>(frame * D + d)];
          kd_mse += kd_diff * kd_diff * frame_scale;
          g += 2.0 * kd_weight * kd_diff * frame_scale;
        }
        if (doutt) doutt[j * (D + 1) + d] = g;
      }
      const double logit = outt[j * (D + 1) + D];
      const double want_stop = target.stop[static_cast<size_t>(frame)];
      bce += stable_bce(logit, want_stop) * stop_scale;
      if (doutt) doutt[j * (D + 1) + D] = (sigmoid(logit) - want_stop) * stop_scale;
    }
  }
  const double data_loss = mse + bce;
  if (data_loss_out) *data_loss_out = data_loss;
  return data_loss + kd_weight * kd_mse;
}

void backward_item(const ModelView& v, const TokenSeq& tokens, const Trace& tr,
                   const std::vector<double>& dout, double scale, Gradients& grads) {
  const int32_t H = v.H, OD = v.OD;
  const int64_t L = tr.L;
  double* g_embed = grads.by_name.at("embed.weight").data();
  double* g_mix_w = grads.by_name.at("mix.weight").data();
  double* g_mix_b = grads.by_name.at("mix.bias").data();
  double* g_w1 = grads.by_name.at("ffn1.weight").data();
  double* g_b1 = grads.by_name.at("ffn1.bias").data();
  double* g_w2 = grads.by_name.at("ffn2.weight").data();
  double* g_b2 = grads.by_name.at("ffn2.bias").data();
  double* g_head_w = grads.by_name.at("head.weight").data();
  double* g_head_b = grads.by_name.at("head.bias").data();

  std::vector<double> dh2(static_cast<size_t>(H)), dh1(static_cast<size_t>(H)),
      dh0(static_cast<size_t>(L * H), 0.0), de(static_cast<size_t>(L * H), 0.0);

  for (int64_t t = 0; t < L; ++t) {
    const double* doutt = dout.data() + t * OD;
    const double* h2t = tr.h2.data() + t * H;
    const double* h1t = tr.h1.data() + t * H;
    const double* h0t = tr.h0.data() + t * H;

    std::fill(dh2.begin(), dh2.end(), 0.0);
    for (int32_t o = 0; o < OD; ++o) {
      const double g = doutt[o] * scale;
      if (g == 0.0) continue;
      const float* wrow = v.head_w + static_cast<int64_t>(o) * H;
      double* grow = g_head_w + static_cast<int64_t>(o) * H;
      for (int32_t i = 0; i < H; ++i) {
        grow[i] += g * h2t[i];
        dh2[static_cast<size_t>(i)] += g * static_cast<double>(wrow[i]);
      }
      g_head_b[o] += g;
    }

    std::fill(dh1.begin(), dh1.end(), 0.0);
    for (int32_t o = 0; o < H; ++o) {
      const double g = dh2[static_cast<size_t>(o)] * (1.0 - h2t[o] * h2t[o]);
      if (g == 0.0) continue;
      const float* wrow = v.w2 + static_cast<int64_t>(o) * H;
      double* grow = g_w2 + static_cast<int64_t>(o) * H;
      for (int32_t i = 0; i < H; ++i) {
        grow[i] += g * h1t[i];
        dh1[static_cast<size_t>(i)] += g * static_cast<double>(wrow[i]);
      }
      g_b2[o] += g;
    }

    double* dh0t = dh0.data() + t * H;
    for (int32_t o = 0; o < H; ++o) {
      const double g = dh1[static_cast<size_t>(o)] * (1.0 - h1t[o] * h1t[o]);
      if (g == 0.0) continue;
      const float* wrow = v.w1 + static_cast<int64_t>(o) * H;
      double* grow = g_w1 + static_cast<int64_t>(o) * H;
      for (int32_t i = 0; i < H; ++i) {
        grow[i] += g * h0t[i];
        dh0t[i] += g * static_cast<double>(wrow[i]);
      }
      g_b1[o] += g;
    }
  }

  for (int64_t t = 0; t < L; ++t) {
    const double* dh0t = dh0.data() + t * H;
    for (int32_t o = 0; o < H; ++o) g_mix_b[o] += dh0t[o];
    for (int32_t k = 0; k < 3; ++k) {
      const int64_t src = t + k - 1;
      if (src < 0 || src >= L) continue;
      const double* et = tr.e.data() + src * H;
      double* det = de.data() + src * H;
      const float* wk = v.mix_w + static_cast<int64_t>(k) * H * H;
      double* gk = g_mix_w + static_cast<int64_t>(k) * H * H;
      for (int32_t o = 0; o < H; ++o) {
        const double g = dh0t[o];
        if (g == 0.0) continue;
        const float* wrow = wk + static_cast<int64_t>(o) * H;
        double* grow = gk + static_cast<int64_t>(o) * H;
        for (int32_t i = 0; i < H; ++i) {
          grow[i] += g * et[i];
          det[i] += g * static_cast<double>(wrow[i]);
        }
      }
    }
  }

  for (int64_t t = 0; t < L; ++t) {
    const int32_t tok = tokens[static_cast<size_t>(t)];
    double* grow = g_embed + static_cast<int64_t>(tok) * H;
    const double* det = de.data() + t * H;
    for (int32_t i = 0; i < H; ++i) grow[i] += det[i];
  }
}

FrameSeq trace_to_frames(const ModelView& v, const Trace& tr) {
  FrameSeq fs;
  fs.frame_dim = v.D;
  const int64_t T = tr.L * v.r;
  fs.frames.resize(static_cast<size_t>(T * v.D));
  fs.stop.resize(static_cast<size_t>(T));
  for (int64_t t = 0; t < tr.L; ++t) {
    const double* outt = tr.out.data() + t * v.OD;
    for (int32_t j = 0; j < v.r; ++j) {
      const int64_t frame = t * v.r + j;
      for (int32_t d = 0; d < v.D; ++d)
        fs.frames[static_cast<size_t>(frame * v.D + d)] =
            static_cast<float>(outt[j * (v.D + 1) + d]);
      fs.stop[static_cast<size_t>(frame)] = static_cast<float>(outt[j * (v.D + 1) + v.D]);
    }
  }
  return fs;
}

}  // namespace

Codebook Codebook::generate(uint64_t seed, int32_t vocab, int32_t dim) {
  if (vocab < 2 || dim < 1) throw std::invalid_argument("codebook needs vocab >= 2, dim >= 1");
  for (uint64_t attempt = 0;; ++attempt) {
    Rng rng(derive_seed(seed, attempt));
    Codebook cb;
    cb.dim = dim;
    cb.rows.resize(static_cast<size_t>(vocab) * dim);
    for (auto& v : cb.rows) v = static_cast<float>(rng.uniform_real(-1.0, 1.0));
    if (cb.min_pairwise_distance() > 0.1) return cb;
  }
}

double Codebook::min_pairwise_distance() const {
  double best = std::numeric_limits<double>::infinity();
  const int64_t n = size();
  for (int64_t a = 0; a < n; ++a)
    for (int64_t b = a + 1; b < n; ++b) {
      double acc = 0.0;
      for (int64_t d = 0; d < dim; ++d) {
        const double diff = static_cast<double>(rows[static_cast<size_t>(a * dim + d)]) -
                            static_cast<double>(rows[static_cast<size_t>(b * dim + d)]);
        acc += diff * diff;
      }
      best = std::min(best, std::sqrt(acc));
    }
  return best;
}

ToyModel::ToyModel(ToyModelConfig cfg, ParamStore params)
    : cfg_(cfg), params_(std::move(params)) {
  const int64_t K = cfg.vocab, H = cfg.hidden, OD = cfg.head_dim();
  auto expect = [&](const std::string& name, std::vector<int64_t> shape) {
    if (!params_.contains(name) || params_.at(name).shape != shape)
      throw std::invalid_argument("model parameter missing or misshaped: " + name);
  };
  expect("embed.weight", {K, H});
  expect("mix.weight", {3, H, H});
  expect("mix.bias", {H});
  expect("ffn1.weight", {H, H});
  expect("ffn1.bias", {H});
  expect("ffn2.weight", {H, H});
  expect("ffn2.bias", {H});
  expect("head.weight", {OD, H});
  expect("head.bias", {OD});
}

ToyModel ToyModel::random_init(const ToyModelConfig& cfg, uint64_t seed) {
  Rng rng(seed);
  const int64_t K = cfg.vocab, H = cfg.hidden, OD = cfg.head_dim();
  auto uniform_tensor = [&](std::vector<int64_t> shape, double bound) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (auto& v : t.data) v = static_cast<float>(rng.uniform_real(-bound, bound));
    return t;
  };
  ParamStore p;
  p.add("embed.weight", uniform_tensor({K, H}, 1.0), cfg.prune_embedding);
  p.add("mix.weight", uniform_tensor({3, H, H}, 1.0 / std::sqrt(3.0 * H)), true);
  p.add("mix.bias", Tensor::zeros({H}), false);
  p.add("ffn1.weight", uniform_tensor({H, H}, 1.0 / std::sqrt(1.0 * H)), true);
  p.add("ffn1.bias", Tensor::zeros({H}), false);
  p.add("ffn2.weight", uniform_tensor({H, H}, 1.0 / std::sqrt(1.0 * H)), true);
  p.add("ffn2.bias", Tensor::zeros({H}), false);
  p.add("head.weight", uniform_tensor({OD, H}, 1.0 / std::sqrt(1.0 * H)), true);
  p.add("head.bias", Tensor::zeros({OD}), false);
  return ToyModel(cfg, std::move(p));
}

FrameSeq ToyModel::forward(const TokenSeq& tokens) const {
  const ModelView v = make_view(*this);
  Trace tr;
  forward_item(v, tokens, tr);
  return trace_to_frames(v, tr);
}

SynthDataset SynthDataset::slice(size_t begin, size_t end) const {
  if (begin > end || end > items.size()) throw std::out_of_range("bad dataset slice");
  SynthDataset out = *this;
  out.items.assign(items.begin() + static_cast<std::ptrdiff_t>(begin),
                   items.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

SynthDataset SynthDataset::concat(const SynthDataset& a, const SynthDataset& b) {
  if (b.items.empty()) return a;
  if (a.items.empty()) return b;
  if (a.frame_dim != b.frame_dim || a.upsample != b.upsample || a.vocab != b.vocab)
    throw std::invalid_argument("cannot concat datasets with different geometry");
  SynthDataset out = a;
  out.items.insert(out.items.end(), b.items.begin(), b.items.end());
  return out;
}

SynthDataset gen_dataset(uint64_t seed, int32_t n_pairs, int32_t vocab,
                         int32_t frame_dim, int32_t len_min, int32_t len_max,
                         int32_t upsample) {
  if (n_pairs < 1 || vocab < 2 || frame_dim < 1 || upsample < 1 || len_min < 1 ||
      len_max < len_min)
    throw std::invalid_argument("gen_dataset: invalid dimensions");
  SynthDataset ds;
  ds.codebook = Codebook::generate(derive_seed(seed, 0), vocab, frame_dim);
  ds.seed = seed;
  ds.vocab = vocab;
  ds.frame_dim = frame_dim;
  ds.upsample = upsample;
  ds.len_min = len_min;
  ds.len_max = len_max;

  Rng rng(derive_seed(seed, 1));
  ds.items.reserve(static_cast<size_t>(n_pairs));
  for (int32_t n = 0; n < n_pairs; ++n) {
    const int64_t L = len_min + rng.uniform_int(len_max - len_min + 1);
    SynthItem item;
    item.tokens.resize(static_cast<size_t>(L));
    for (auto& tok : item.tokens) tok = static_cast<int32_t>(rng.uniform_int(vocab));
    const int64_t T = L * upsample;
    item.target.frame_dim = frame_dim;
    item.target.frames.resize(static_cast<size_t>(T * frame_dim));
    item.target.stop.assign(static_cast<size_t>(T), 0.0f);
    item.target.stop.back() = 1.0f;
    for (int64_t t = 0; t < L; ++t) {
      const auto row = ds.codebook.row(item.tokens[static_cast<size_t>(t)]);
      for (int32_t j = 0; j < upsample; ++j)
        std::copy(row.begin(), row.end(),
                  item.target.frames.begin() +
                      static_cast<std::ptrdiff_t>(((t * upsample) + j) * frame_dim));
    }
    ds.items.push_back(std::move(item));
  }
  return ds;
}

double loss(const FrameSeq& pred, const FrameSeq& target) {
  if (pred.frame_dim != target.frame_dim || pred.num_frames() != target.num_frames() ||
      pred.stop.size() != target.stop.size())
    throw std::invalid_argument("loss: shape mismatch");
  const int64_t T = pred.num_frames();
  const int64_t D = pred.frame_dim;
  if (T == 0) throw std::invalid_argument("loss: empty sequences");
  double mse = 0.0;
  for (size_t i = 0; i < pred.frames.size(); ++i) {
    const double diff =
        static_cast<double>(pred.frames[i]) - static_cast<double>(target.frames[i]);
    mse += diff * diff;
  }
  mse /= static_cast<double>(T * D);
  double bce = 0.0;
  for (size_t i = 0; i < pred.stop.size(); ++i)
    bce += stable_bce(pred.stop[i], target.stop[i]);
  bce /= static_cast<double>(T);
  return mse + bce;
}

BatchResult batch_gradients(const ToyModel& model, const SynthDataset& data,
                            std::span<const int32_t> indices,
                            const std::vector<std::vector<double>>* kd_frames,
                            double kd_weight) {
  if (indices.empty()) throw std::invalid_argument("batch_gradients: empty batch");
  const ModelView v = make_view(model);

  BatchResult result;
  for (const auto& [name, t] : model.params().entries())
    result.grads.by_name[name].assign(static_cast<size_t>(t.numel()), 0.0);

  const double scale = 1.0 / static_cast<double>(indices.size());
  Trace tr;
  std::vector<double> dout;
  for (int32_t idx : indices) {
    if (idx < 0 || static_cast<size_t>(idx) >= data.items.size())
      throw std::out_of_range("batch index out of range");
    const SynthItem& item = data.items[static_cast<size_t>(idx)];
    forward_item(v, item.tokens, tr);
    const std::vector<double>* kd =
        kd_frames ? &(*kd_frames)[static_cast<size_t>(idx)] : nullptr;
    double data_loss = 0.0;
    const double obj =
        item_loss_from_trace(v, tr, item.target, kd, kd_weight, &dout, &data_loss);
    if (!std::isfinite(obj))
      throw std::runtime_error("non-finite loss in batch_gradients");
    result.loss += obj * scale;
    result.data_loss += data_loss * scale;
    backward_item(v, item.tokens, tr, dout, scale, result.grads);
  }
  return result;
}

Gradients gradients(const ToyModel& model, const SynthDataset& data,
                    std::span<const int32_t> indices) {
  return batch_gradients(model, data, indices).grads;
}

double eval_loss(const ToyModel& model, const SynthDataset& data) {
  if (data.items.empty()) throw std::invalid_argument("eval_loss: empty dataset");
  const ModelView v = make_view(model);
  Trace tr;
  double acc = 0.0;
  for (const auto& item : data.items) {
    forward_item(v, item.tokens, tr);
    acc += item_loss_from_trace(v, tr, item.target, nullptr, 0.0, nullptr, nullptr);
  }
  return acc / static_cast<double>(data.items.size());
}

SynthDataset synthesize_labels(const ToyModel& teacher,
                               const std::vector<TokenSeq>& xs,
                               const Codebook& codebook) {
  const ToyModelConfig& cfg = teacher.config();
  SynthDataset ds;
  ds.codebook = codebook;
  ds.vocab = cfg.vocab;
  ds.frame_dim = cfg.frame_dim;
  ds.upsample = cfg.upsample;
  ds.len_min = 0;
  ds.len_max = 0;
  for (const auto& x : xs) {
    SynthItem item;
    item.tokens = x;
    item.target = teacher.forward(x);
    for (auto& s : item.target.stop) s = (s > 0.0f) ? 1.0f : 0.0f;
    ds.items.push_back(std::move(item));
  }
  return ds;
}

TokenSeq transcribe(const FrameSeq& frames, const Codebook& codebook, int32_t upsample) {
  const int64_t T = frames.num_frames();
  if (upsample < 1 || T % upsample != 0)
    throw std::invalid_argument("transcribe: frame count not divisible by upsample factor");
  if (frames.frame_dim != codebook.dim)
    throw std::invalid_argument("transcribe: frame dim does not match codebook");
  const int64_t blocks = T / upsample;
  TokenSeq out;
  out.reserve(static_cast<size_t>(blocks));
  for (int64_t b = 0; b < blocks; ++b) {
    int64_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int64_t k = 0; k < codebook.size(); ++k) {
      const auto row = codebook.row(k);
      double mean_dist = 0.0;
      for (int32_t j = 0; j < upsample; ++j) {
        const int64_t frame = b * upsample + j;
        double acc = 0.0;
        for (int64_t d = 0; d < codebook.dim; ++d) {
          const double diff =
              static_cast<double>(frames.frame_at(frame, d)) - static_cast<double>(row[d]);
          acc += diff * diff;
        }
        mean_dist += std::sqrt(acc);
      }
      mean_dist /= static_cast<double>(upsample);
      if (mean_dist < best_dist) {
        best_dist = mean_dist;
        best = k;
      }
    }
    out.push_back(static_cast<int32_t>(best));

    double mean_stop = 0.0;
    for (int32_t j = 0; j < upsample; ++j)
      mean_stop += sigmoid(frames.stop[static_cast<size_t>(b * upsample + j)]);
    mean_stop /= static_cast<double>(upsample);
    if (mean_stop > 0.5) break;
  }
  return out;
}

void save_dataset_json(const std::filesystem::path& path, const SynthDataset& data) {
  nlohmann::json j;
  j["seed"] = data.seed;
  j["vocab"] = data.vocab;
  j["frame_dim"] = data.frame_dim;
  j["upsample"] = data.upsample;
  j["len_min"] = data.len_min;
  j["len_max"] = data.len_max;
  j["codebook"] = {{"dim", data.codebook.dim}, {"rows", data.codebook.rows}};
  auto& items = j["items"] = nlohmann::json::array();
  for (const auto& item : data.items) {
    nlohmann::json ji;
    ji["tokens"] = item.tokens;
    ji["frames"] = item.target.frames;
    ji["stop"] = item.target.stop;
    items.push_back(std::move(ji));
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << j.dump();
}

SynthDataset load_dataset_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  nlohmann::json j = nlohmann::json::parse(in);
  SynthDataset ds;
  ds.seed = j.at("seed").get<uint64_t>();
  ds.vocab = j.at("vocab").get<int32_t>();
  ds.frame_dim = j.at("frame_dim").get<int32_t>();
  ds.upsample = j.at("upsample").get<int32_t>();
  ds.len_min = j.at("len_min").get<int32_t>();
  ds.len_max = j.at("len_max").get<int32_t>();
  ds.codebook.dim = j.at("codebook").at("dim").get<int64_t>();
  ds.codebook.rows = j.at("codebook").at("rows").get<std::vector<float>>();
  for (const auto& ji : j.at("items")) {
    SynthItem item;
    item.tokens = ji.at("tokens").get<TokenSeq>();
    item.target.frame_dim = ds.frame_dim;
    item.target.frames = ji.at("frames").get<std::vector<float>>();
    item.target.stop = ji.at("stop").get<std::vector<float>>();
    ds.items.push_back(std::move(item));
  }
  return ds;
}

}  // namespace prunelab
