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

#include "prunelab/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include "json.hpp"
#include "prunelab/wer.hpp"

namespace prunelab {

namespace {

std::string format_double(double v, const char* fmt = "%.12g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

void run_jobs(int32_t parallelism, size_t count, const std::function<void(size_t)>& job) {
  uint32_t workers = parallelism > 0 ? static_cast<uint32_t>(parallelism)
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<uint32_t>(workers, static_cast<uint32_t>(std::max<size_t>(count, 1)));
  if (workers <= 1) {
    for (size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (uint32_t w = 0; w < workers; ++w)
    pool.emplace_back([&]() {
      while (true) {
        const size_t i = next.fetch_add(1);
        if (i >= count) return;
        job(i);
      }
    });
  for (auto& t : pool) t.join();
}

struct SweepContext {
  const SweepConfig* config = nullptr;
  SynthDataset train_split;
  SynthDataset eval_split;
  std::vector<TokenSeq> unspoken;
  std::map<uint64_t, ToyModel> dense_by_seed;
  ToyModelConfig model_config;
};

double corpus_wer(const ToyModel& model, const SynthDataset& eval_set) {
  int64_t edits = 0, ref_len = 0;
  for (const auto& item : eval_set.items) {
    const TokenSeq hyp =
        transcribe(model.forward(item.tokens), eval_set.codebook, eval_set.upsample);
    edits += edit_distance(item.tokens, hyp);
    ref_len += static_cast<int64_t>(item.tokens.size());
  }
  return static_cast<double>(edits) / static_cast<double>(ref_len);
}

TrainOptions train_options(const SweepConfig& config) {
  TrainOptions opt;
  opt.learning_rate = config.learning_rate;
  opt.steps = config.steps;
  opt.batch_size = config.batch_size;
  return opt;
}

ScheduleConfig schedule_config(const SweepConfig& config, double target, uint64_t seed) {
  ScheduleConfig cfg;
  cfg.target_sparsity = target;
  cfg.n_updates = config.n_updates;
  cfg.imp_iterations = config.imp_iterations;
  cfg.parp_p_start = config.parp_p_start;
  cfg.parp_p_events = config.parp_p_events;
  cfg.seed = seed;
  cfg.train = train_options(config);
  return cfg;
}

std::string run_dir_name(const std::string& schedule, double sparsity, uint64_t seed) {
  return schedule + "_s" + format_double(sparsity, "%g") + "_seed" + std::to_string(seed);
}

SweepRow execute_one(const SweepContext& ctx, const std::string& schedule, double sparsity,
                     uint64_t seed) {
  const SweepConfig& config = *ctx.config;
  SweepRow row;
  row.schedule = schedule;
  row.sparsity = sparsity;
  row.seed = seed;
  row.status = "ok";

  if (schedule == "dense") {
    const ToyModel& dense = ctx.dense_by_seed.at(seed);
    row.final_loss = eval_loss(dense, ctx.train_split);
    row.toy_wer = corpus_wer(dense, ctx.eval_split);
    row.mask_overlap_m0_mD = 1.0;
    row.duration_steps = config.steps;
    return row;
  }

  ScheduleConfig cfg = schedule_config(config, sparsity, seed);
  PrunedResult result;
  if (schedule == "imp") {
    cfg.kind = ScheduleKind::IMP;
    result = run_imp(ctx.dense_by_seed.at(seed), ctx.train_split, cfg);
  } else if (schedule == "parp") {
    cfg.kind = ScheduleKind::PARP;
    result = run_parp(ctx.dense_by_seed.at(seed), ctx.train_split, cfg);
  } else if (schedule == "parp-p") {
    cfg.kind = ScheduleKind::PARP_P;
    result = run_parp_p(ctx.dense_by_seed.at(seed), ctx.train_split, cfg);
  } else if (schedule == "parp-kd") {
    cfg.kind = ScheduleKind::PARP;
    cfg.kd_weight = config.kd_weight;
    const ToyModel& teacher = ctx.dense_by_seed.at(seed);
    const KdObjective kd = attach_kd(cfg, teacher);
    result = run_parp(teacher, ctx.train_split, cfg, &kd);
  } else if (schedule == "parp-ri") {
    cfg.kind = ScheduleKind::PARP;
    cfg.init = InitKind::RANDOM;
    ToyModel model = ToyModel::random_init(ctx.model_config, derive_seed(seed, 3));
    result = run_parp(std::move(model), ctx.train_split, cfg);
  } else if (schedule == "parp-seq-aug" || schedule == "parp-mix-aug") {
    cfg.kind = ScheduleKind::PARP;
    cfg.aug = schedule == "parp-seq-aug" ? AugKind::SEQ_AUG : AugKind::MIX_AUG;
    result = run_with_aug(ctx.dense_by_seed.at(seed), ctx.train_split, ctx.unspoken, cfg);
  } else {
    throw std::invalid_argument("unknown schedule token: " + schedule);
  }

  const ToyModel final_model(ctx.model_config, result.final_weights);
  row.final_loss = eval_loss(final_model, ctx.train_split);
  row.toy_wer = corpus_wer(final_model, ctx.eval_split);
  row.mask_overlap_m0_mD = result.mask_overlap_m0_mD;
  row.duration_steps = result.total_steps;

  if (config.write_artifacts && !config.out_dir.empty()) {
    const auto dir = std::filesystem::path(config.out_dir) / "runs" /
                     run_dir_name(schedule, sparsity, seed);
    save_result(dir, result);
  }
  return row;
}

void validate_config(const SweepConfig& config) {
  if (config.schedules.empty()) throw std::invalid_argument("sweep: no schedules given");
  for (const auto& s : config.schedules)
    if (!is_known_schedule(s) || s == "dense")
      throw std::invalid_argument("sweep: unknown schedule token: " + s);
  if (config.seeds.empty()) throw std::invalid_argument("sweep: seeds must be nonempty");
  if (config.sparsities.empty()) throw std::invalid_argument("sweep: empty sparsity grid");
  double prev = -1.0;
  for (double s : config.sparsities) {
    if (!(s >= 0.0 && s < 1.0))
      throw std::invalid_argument("sweep: sparsity values must lie in [0, 1)");
    if (s <= prev)
      throw std::invalid_argument("sweep: sparsity grid must be strictly increasing");
    prev = s;
  }
}

}  // namespace

std::vector<double> acoustic_sparsity_grid() {
  return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 0.99};
}

std::vector<double> vocoder_sparsity_grid() {
  return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.75, 0.8, 0.85, 0.88};
}

bool is_known_schedule(const std::string& token) {
  static const std::set<std::string> known{"dense",   "imp",          "parp",
                                           "parp-p",  "parp-kd",      "parp-ri",
                                           "parp-seq-aug", "parp-mix-aug"};
  return known.count(token) > 0;
}

std::vector<SweepRow> run_sweep(const SweepConfig& config, std::ostream* log) {
  validate_config(config);
  const auto wall_start = std::chrono::steady_clock::now();

  SweepContext ctx;
  ctx.config = &config;
  ctx.model_config = ToyModelConfig{config.vocab, config.hidden, config.frame_dim,
                                    config.upsample, true};

  const SynthDataset full =
      gen_dataset(config.dataset_seed, config.pairs + config.eval_pairs, config.vocab,
                  config.frame_dim, config.len_min, config.len_max, config.upsample);
  ctx.train_split = full.slice(0, static_cast<size_t>(config.pairs));
  ctx.eval_split = full.slice(static_cast<size_t>(config.pairs), full.size());

  const bool needs_unspoken =
      std::any_of(config.schedules.begin(), config.schedules.end(),
                  [](const std::string& s) { return s.find("aug") != std::string::npos; });
  if (needs_unspoken) {
    Rng rng(derive_seed(config.dataset_seed, 100));
    const int64_t count =
        static_cast<int64_t>(config.aug_multiplier) * static_cast<int64_t>(config.pairs);
    for (int64_t i = 0; i < count; ++i) {
      const int64_t length = config.len_min + rng.uniform_int(config.len_max - config.len_min + 1);
      TokenSeq x(static_cast<size_t>(length));
      for (auto& tok : x) tok = static_cast<int32_t>(rng.uniform_int(config.vocab));
      ctx.unspoken.push_back(std::move(x));
    }
  }

  // Dense starting points, one per seed, trained up front.
  {
    std::vector<uint64_t> seeds = config.seeds;
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
    std::vector<ToyModel> trained;
    trained.reserve(seeds.size());
    for (uint64_t seed : seeds)
      trained.push_back(ToyModel::random_init(ctx.model_config, derive_seed(seed, 1)));
    run_jobs(config.parallelism, seeds.size(), [&](size_t i) {
      TrainOptions opt = train_options(config);
      opt.seed = derive_seed(seeds[i], 2);
      train(trained[i], ctx.train_split, opt);
    });
    for (size_t i = 0; i < seeds.size(); ++i)
      ctx.dense_by_seed.emplace(seeds[i], std::move(trained[i]));
  }
  if (log)
    *log << "[sweep] dense baselines ready after "
         << std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - wall_start)
                .count()
         << " ms\n";

  struct Job {
    std::string schedule;
    double sparsity;
    uint64_t seed;
  };
  std::vector<Job> jobs;
  std::vector<std::string> ordered_schedules;
  if (config.include_dense) ordered_schedules.push_back("dense");
  for (const auto& s : config.schedules) ordered_schedules.push_back(s);
  for (const auto& schedule : ordered_schedules) {
    if (schedule == "dense") {
      for (uint64_t seed : config.seeds) jobs.push_back({schedule, 0.0, seed});
      continue;
    }
    for (double sparsity : config.sparsities)
      for (uint64_t seed : config.seeds) jobs.push_back({schedule, sparsity, seed});
  }

  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    std::ofstream echo(std::filesystem::path(config.out_dir) / "config.json",
                       std::ios::trunc);
    echo << sweep_config_to_json_text(config) << "\n";
  }

  std::vector<SweepRow> rows(jobs.size());
  std::mutex log_mutex;
  run_jobs(config.parallelism, jobs.size(), [&](size_t i) {
    const Job& job = jobs[i];
    try {
      rows[i] = execute_one(ctx, job.schedule, job.sparsity, job.seed);
    } catch (const TrainingDiverged& e) {
      rows[i] = SweepRow{job.schedule, job.sparsity, job.seed, "diverged", 0, 0, 0, 0};
      if (log) {
        std::lock_guard<std::mutex> hold(log_mutex);
        *log << "[sweep] " << run_dir_name(job.schedule, job.sparsity, job.seed)
             << " diverged: " << e.what() << "\n";
      }
    } catch (const std::exception& e) {
      rows[i] = SweepRow{job.schedule, job.sparsity, job.seed, "error", 0, 0, 0, 0};
      if (log) {
        std::lock_guard<std::mutex> hold(log_mutex);
        *log << "[sweep] " << run_dir_name(job.schedule, job.sparsity, job.seed)
             << " failed: " << e.what() << "\n";
      }
    }
  });

  if (log)
    *log << "[sweep] " << jobs.size() << " runs finished in "
         << std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - wall_start)
                .count()
         << " ms\n";
  return rows;
}

std::string sweep_rows_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "schedule,sparsity,seed,status,final_loss,toy_wer,mask_overlap_m0_mD,duration_steps\n";
  for (const auto& row : rows) {
    out += row.schedule;
    out += ',';
    out += format_double(row.sparsity, "%g");
    out += ',';
    out += std::to_string(row.seed);
    out += ',';
    out += row.status;
    if (row.status == "ok") {
      out += ',';
      out += format_double(row.final_loss);
      out += ',';
      out += format_double(row.toy_wer);
      out += ',';
      out += format_double(row.mask_overlap_m0_mD);
      out += ',';
      out += std::to_string(row.duration_steps);
    } else {
      out += ",,,,";
    }
    out += '\n';
  }
  return out;
}

namespace {

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

}  // namespace

SweepConfig sweep_config_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad sweep config JSON: ") + e.what());
  }
  SweepConfig config;
  read_field(j, "schedules", config.schedules);
  if (j.contains("grid")) {
    const std::string grid = j.at("grid").get<std::string>();
    if (grid == "acoustic")
      config.sparsities = acoustic_sparsity_grid();
    else if (grid == "vocoder")
      config.sparsities = vocoder_sparsity_grid();
    else
      throw std::invalid_argument("unknown grid preset: " + grid);
  }
  read_field(j, "sparsities", config.sparsities);
  read_field(j, "seeds", config.seeds);
  read_field(j, "out_dir", config.out_dir);
  read_field(j, "parallelism", config.parallelism);
  read_field(j, "vocab", config.vocab);
  read_field(j, "hidden", config.hidden);
  read_field(j, "frame_dim", config.frame_dim);
  read_field(j, "upsample", config.upsample);
  read_field(j, "dataset_seed", config.dataset_seed);
  read_field(j, "pairs", config.pairs);
  read_field(j, "eval_pairs", config.eval_pairs);
  read_field(j, "len_min", config.len_min);
  read_field(j, "len_max", config.len_max);
  read_field(j, "learning_rate", config.learning_rate);
  read_field(j, "steps", config.steps);
  read_field(j, "batch_size", config.batch_size);
  read_field(j, "n_updates", config.n_updates);
  read_field(j, "imp_iterations", config.imp_iterations);
  read_field(j, "parp_p_start", config.parp_p_start);
  read_field(j, "parp_p_events", config.parp_p_events);
  read_field(j, "kd_weight", config.kd_weight);
  read_field(j, "aug_multiplier", config.aug_multiplier);
  read_field(j, "include_dense", config.include_dense);
  read_field(j, "write_artifacts", config.write_artifacts);
  return config;
}

std::string sweep_config_to_json_text(const SweepConfig& config) {
  nlohmann::json j;
  j["schedules"] = config.schedules;
  j["sparsities"] = config.sparsities;
  j["seeds"] = config.seeds;
  j["out_dir"] = config.out_dir;
  j["parallelism"] = config.parallelism;
  j["vocab"] = config.vocab;
  j["hidden"] = config.hidden;
  j["frame_dim"] = config.frame_dim;
  j["upsample"] = config.upsample;
  j["dataset_seed"] = config.dataset_seed;
  j["pairs"] = config.pairs;
  j["eval_pairs"] = config.eval_pairs;
  j["len_min"] = config.len_min;
  j["len_max"] = config.len_max;
  j["learning_rate"] = config.learning_rate;
  j["steps"] = config.steps;
  j["batch_size"] = config.batch_size;
  j["n_updates"] = config.n_updates;
  j["imp_iterations"] = config.imp_iterations;
  j["parp_p_start"] = config.parp_p_start;
  j["parp_p_events"] = config.parp_p_events;
  j["kd_weight"] = config.kd_weight;
  j["aug_multiplier"] = config.aug_multiplier;
  j["include_dense"] = config.include_dense;
  j["write_artifacts"] = config.write_artifacts;
  return j.dump(2);
}

}  // namespace prunelab
