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
//
// prunelab CLI: pruning runs, toy-task sparsity sweeps, audio evaluation,
// and significance testing.  Exit codes: 0 success, 2 usage error,
// 1 runtime failure.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "prunelab/audio.hpp"
#include "prunelab/pitch.hpp"
#include "prunelab/pruner.hpp"
#include "prunelab/stats.hpp"
#include "prunelab/sweep.hpp"

namespace {

using namespace prunelab;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::string default_out_dir() {
  const char* env = std::getenv("PRUNELAB_OUT");
  return env ? env : "prunelab_out";
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

int cmd_prune(const std::string& checkpoint, double target, const std::string& out_dir) {
  if (!(target >= 0.0 && target < 1.0)) {
    std::cerr << "error: sparsity must lie in [0, 1)\n";
    return kExitUsage;
  }
  const ParamStore store = load_checkpoint(checkpoint);
  const PruneMask mask = ump(store, target);
  const ParamStore pruned = apply_mask(store, mask);

  std::filesystem::create_directories(out_dir);
  save_checkpoint(pruned, std::filesystem::path(out_dir) / "pruned.prnt");
  save_mask(std::filesystem::path(out_dir) / "mask.prnt", mask);

  const SparsityReport report = sparsity_report(mask);
  nlohmann::json j;
  j["global_sparsity"] = report.global_sparsity;
  j["zero_count"] = report.zero_count;
  j["prunable_count"] = report.prunable_count;
  j["per_tensor"] = report.per_tensor;
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::vector<std::string>& overrides) {
  std::string text = "{}";
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "error: cannot open config " << config_path << "\n";
      return kExitRuntime;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  // apply --set key=value overrides onto the config JSON
  nlohmann::json j = nlohmann::json::parse(text);
  for (const auto& kv : overrides) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "error: override must be key=value: " << kv << "\n";
      return kExitUsage;
    }
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    try {
      j[key] = nlohmann::json::parse(value);
    } catch (const nlohmann::json::exception&) {
      j[key] = value;  // plain string
    }
  }
  SweepConfig config = sweep_config_from_json_text(j.dump());
  if (config.out_dir.empty()) config.out_dir = default_out_dir();

  const std::vector<SweepRow> rows = run_sweep(config, &std::cerr);
  const std::string csv = sweep_rows_to_csv(rows);

  std::filesystem::create_directories(config.out_dir);
  const auto csv_path = std::filesystem::path(config.out_dir) / "results.csv";
  std::ofstream out(csv_path, std::ios::binary | std::ios::trunc);
  out << csv;
  out.close();
  std::cout << csv;
  std::cerr << "[sweep] wrote " << csv_path.string() << "\n";

  for (const auto& row : rows)
    if (row.status != "ok") return kExitRuntime;  // partial results still written
  return kExitOk;
}

std::optional<ProsodyStats> analyze_wav(const std::filesystem::path& path) {
  try {
    const AudioBuffer buf = read_wav(path);
    const F0Track track = yin_f0(buf);
    return prosody_stats(track, buf);
  } catch (const std::exception& e) {
    std::cerr << "warning: skipping " << path.string() << ": " << e.what() << "\n";
    return std::nullopt;
  }
}

int cmd_eval_audio(const std::string& system_dir, const std::string& reference_dir,
                   const std::string& out_csv) {
  auto list_wavs = [](const std::string& dir) {
    std::map<std::string, std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
      if (entry.is_regular_file() && entry.path().extension() == ".wav")
        files[entry.path().filename().string()] = entry.path();
    return files;
  };
  const auto sys_files = list_wavs(system_dir);
  const auto ref_files = list_wavs(reference_dir);

  std::vector<std::string> matched;
  for (const auto& [name, path] : sys_files) {
    if (ref_files.count(name))
      matched.push_back(name);
    else
      std::cerr << "warning: no reference for " << name << "\n";
  }
  for (const auto& [name, path] : ref_files)
    if (!sys_files.count(name)) std::cerr << "warning: no system file for " << name << "\n";
  if (matched.empty()) {
    std::cerr << "error: no filename-matched WAV pairs\n";
    return kExitRuntime;
  }

  std::vector<ProsodyStats> sys_stats, ref_stats;
  std::string csv =
      "filename,sys_duration_s,sys_mean_f0,sys_std_f0,ref_duration_s,ref_mean_f0,ref_std_f0\n";
  auto cell = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
  for (const auto& name : matched) {
    const auto sys = analyze_wav(sys_files.at(name));
    const auto ref = analyze_wav(ref_files.at(name));
    if (!sys || !ref) continue;
    sys_stats.push_back(*sys);
    ref_stats.push_back(*ref);
    csv += name + ',' + fmt(sys->duration_s) + ',' + cell(sys->mean_f0) + ',' +
           cell(sys->std_f0) + ',' + fmt(ref->duration_s) + ',' + cell(ref->mean_f0) +
           ',' + cell(ref->std_f0) + '\n';
  }
  if (sys_stats.empty()) {
    std::cerr << "error: no readable WAV pairs\n";
    return kExitRuntime;
  }

  const MismatchReport report = mismatch(sys_stats, ref_stats);
  csv += "__mismatch__," + fmt(report.d_duration_s) + ',' + cell(report.d_mean_f0) + ',' +
         cell(report.d_std_f0) + ',' + std::to_string(report.f0_pairs_used) + ',' +
         std::to_string(report.f0_pairs_excluded) + ",\n";

  if (!out_csv.empty()) {
    std::ofstream out(out_csv, std::ios::binary | std::ios::trunc);
    if (!out) {
      std::cerr << "error: cannot write " << out_csv << "\n";
      return kExitRuntime;
    }
    out << csv;
  }
  std::cout << csv;
  return kExitOk;
}

struct CsvRows {
  std::vector<std::vector<std::string>> rows;  // line number kept alongside
  std::vector<size_t> lines;
};

CsvRows read_csv_rows(const std::string& path, size_t min_fields,
                      const std::string& header_prefix, std::vector<std::string>& errors) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  CsvRows out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && !header_prefix.empty() && line.rfind(header_prefix, 0) == 0)
      continue;  // header
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() < min_fields) {
      errors.push_back("line " + std::to_string(line_no) + ": expected at least " +
                       std::to_string(min_fields) + " fields");
      continue;
    }
    out.rows.push_back(std::move(fields));
    out.lines.push_back(line_no);
  }
  return out;
}

int cmd_stats_mos(const std::string& in_csv, const std::string& out_prefix, double alpha) {
  std::vector<std::string> errors;
  const CsvRows csv = read_csv_rows(in_csv, 2, "condition", errors);

  std::vector<RatingSet> sets;
  std::map<std::string, size_t> index;
  for (size_t i = 0; i < csv.rows.size(); ++i) {
    const auto& fields = csv.rows[i];
    int32_t score = 0;
    try {
      score = std::stoi(fields[1]);
    } catch (const std::exception&) {
      errors.push_back("line " + std::to_string(csv.lines[i]) + ": bad score '" +
                       fields[1] + "'");
      continue;
    }
    auto [it, inserted] = index.try_emplace(fields[0], sets.size());
    if (inserted) sets.push_back(RatingSet{fields[0], {}});
    sets[it->second].scores.push_back(score);
  }
  for (const auto& e : errors) std::cerr << "error: " << e << "\n";
  if (!errors.empty()) return kExitRuntime;
  if (sets.size() < 2) {
    std::cerr << "error: mos mode needs at least 2 conditions\n";
    return kExitUsage;
  }
  for (const auto& s : sets) validate_rating_set(s);

  const SignificanceMatrix matrix = significance_matrix(sets, alpha);
  const std::string text = render_matrix(matrix);
  std::cout << text;
  if (!out_prefix.empty()) {
    std::ofstream txt(out_prefix + ".txt", std::ios::binary | std::ios::trunc);
    txt << text;
    std::ofstream js(out_prefix + ".json", std::ios::binary | std::ios::trunc);
    js << matrix_to_json(matrix) << "\n";
  }
  return kExitOk;
}

int cmd_stats_ab(const std::string& in_csv, const std::string& out_prefix, double alpha,
                 bool two_sided) {
  std::vector<std::string> errors;
  const CsvRows csv = read_csv_rows(in_csv, 4, "proposal", errors);

  std::string out = "proposal,baseline,wins,n,p_hat,z,p,significant\n";
  for (size_t i = 0; i < csv.rows.size(); ++i) {
    const auto& fields = csv.rows[i];
    long long wins = 0, n = 0;
    try {
      wins = std::stoll(fields[2]);
      n = std::stoll(fields[3]);
    } catch (const std::exception&) {
      errors.push_back("line " + std::to_string(csv.lines[i]) + ": bad wins/n");
      continue;
    }
    try {
      const PairwiseZResult r = pairwise_z(ABOutcome{wins, n}, alpha, two_sided);
      out += fields[0] + ',' + fields[1] + ',' + std::to_string(wins) + ',' +
             std::to_string(n) + ',' + fmt(r.p_hat) + ',' + fmt(r.z) + ',' + fmt(r.p) +
             ',' + (r.significant ? "true" : "false") + '\n';
    } catch (const std::exception& e) {
      errors.push_back("line " + std::to_string(csv.lines[i]) + ": " + e.what());
    }
  }
  for (const auto& e : errors) std::cerr << "error: " << e << "\n";
  if (!errors.empty()) return kExitRuntime;

  std::cout << out;
  if (!out_prefix.empty()) {
    std::ofstream f(out_prefix + ".csv", std::ios::binary | std::ios::trunc);
    f << out;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pruning schedules, toy seq2seq sweeps, audio evaluation, significance tests"};
  app.require_subcommand(1);

  // prune
  std::string prune_checkpoint, prune_out;
  double prune_sparsity = 0.5;
  auto* prune = app.add_subcommand("prune", "UMP-prune a checkpoint and write mask + pruned weights");
  prune->add_option("checkpoint", prune_checkpoint, "input checkpoint (.prnt)")->required();
  prune->add_option("--sparsity", prune_sparsity, "target sparsity in [0,1)")->required();
  prune->add_option("--out", prune_out, "output directory")->default_val(default_out_dir());

  // sweep
  std::string sweep_config;
  std::vector<std::string> sweep_overrides;
  auto* sweep = app.add_subcommand("sweep", "run a (schedule x sparsity x seed) sweep on the toy task");
  sweep->add_option("--config", sweep_config, "sweep config JSON file");
  sweep->add_option("--set", sweep_overrides,
                    "override a config key, e.g. --set steps=500 --set seeds=[1,2]");

  // eval-audio
  std::string ea_system, ea_reference, ea_out;
  auto* ea = app.add_subcommand("eval-audio", "prosody mismatch between two directories of WAVs");
  ea->add_option("system", ea_system, "system WAV directory")->required();
  ea->add_option("reference", ea_reference, "reference WAV directory")->required();
  ea->add_option("--out", ea_out, "output CSV path");

  // stats
  std::string st_mode, st_in, st_out;
  double st_alpha = 0.05;
  bool st_two_sided = false;
  auto* st = app.add_subcommand("stats", "significance tests for MOS ratings or A/B counts");
  st->add_option("--mode", st_mode, "mos | ab")->required()
      ->check(CLI::IsMember({"mos", "ab"}));
  st->add_option("--in", st_in, "input CSV")->required();
  st->add_option("--out", st_out, "output path prefix");
  st->add_option("--alpha", st_alpha, "significance level")->default_val(0.05);
  st->add_flag("--two-sided", st_two_sided, "two-sided z-test (default one-sided)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (prune->parsed()) return cmd_prune(prune_checkpoint, prune_sparsity, prune_out);
    if (sweep->parsed()) return cmd_sweep(sweep_config, sweep_overrides);
    if (ea->parsed()) return cmd_eval_audio(ea_system, ea_reference, ea_out);
    if (st->parsed()) {
      if (st_mode == "mos") return cmd_stats_mos(st_in, st_out, st_alpha);
      return cmd_stats_ab(st_in, st_out, st_alpha, st_two_sided);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
