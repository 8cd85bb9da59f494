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

#include "prunelab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace prunelab {

namespace {

constexpr const char* kBullet = "•";   // significant
constexpr const char* kSquare = "□";   // not significant
constexpr const char* kSelf = "-";

/// Midranks of the pooled sample; returns ranks aligned with `values`.
std::vector<double> midranks(const std::vector<double>& values) {
  const size_t n = values.size();
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double tie_sum(const std::vector<double>& values) {
  std::map<double, int64_t> counts;
  for (double v : values) ++counts[v];
  double acc = 0.0;
  for (const auto& [v, t] : counts)
    acc += static_cast<double>(t) * t * t - static_cast<double>(t);
  return acc;
}

double u_from_ranks(const std::vector<double>& ranks, size_t n1) {
  double r1 = 0.0;
  for (size_t i = 0; i < n1; ++i) r1 += ranks[i];
  return r1 - static_cast<double>(n1) * (static_cast<double>(n1) + 1.0) / 2.0;
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

void validate_rating_set(const RatingSet& set) {
  if (set.scores.empty())
    throw std::invalid_argument("rating set '" + set.label + "' is empty");
  for (int32_t s : set.scores)
    if (s < 1 || s > 5)
      throw std::invalid_argument("rating set '" + set.label +
                                  "' has a score outside [1, 5]");
}

MwuResult mann_whitney_u(const RatingSet& x, const RatingSet& y) {
  if (x.scores.empty() || y.scores.empty())
    throw std::invalid_argument("mann_whitney_u: both samples must be nonempty");
  const size_t n1 = x.scores.size(), n2 = y.scores.size();
  std::vector<double> pooled;
  pooled.reserve(n1 + n2);
  for (int32_t v : x.scores) pooled.push_back(v);
  for (int32_t v : y.scores) pooled.push_back(v);

  const std::vector<double> ranks = midranks(pooled);
  MwuResult result;
  result.u = u_from_ranks(ranks, n1);

  const double dn1 = static_cast<double>(n1), dn2 = static_cast<double>(n2);
  const double n = dn1 + dn2;
  const double mu = dn1 * dn2 / 2.0;
  double variance = (dn1 * dn2 / 12.0) * ((n + 1.0) - tie_sum(pooled) / (n * (n - 1.0)));
  if (variance < 0.0) variance = 0.0;
  const double sigma = std::sqrt(variance);
  if (sigma == 0.0) {
    result.degenerate = true;
    result.z = 0.0;
    result.p_two_sided = 1.0;
    return result;
  }
  const double shifted = std::max(std::fabs(result.u - mu) - 0.5, 0.0);
  const double z_mag = shifted / sigma;
  result.z = result.u >= mu ? z_mag : -z_mag;
  result.p_two_sided = 2.0 * normal_cdf(-z_mag);
  return result;
}

double exact_mwu_p(const RatingSet& x, const RatingSet& y) {
  if (x.scores.empty() || y.scores.empty())
    throw std::invalid_argument("exact_mwu_p: both samples must be nonempty");
  const size_t n1 = x.scores.size(), n2 = y.scores.size();
  const size_t n = n1 + n2;
  if (n > 12) throw std::invalid_argument("exact_mwu_p: n1 + n2 must be <= 12");

  std::vector<double> pooled;
  pooled.reserve(n);
  for (int32_t v : x.scores) pooled.push_back(v);
  for (int32_t v : y.scores) pooled.push_back(v);
  const std::vector<double> ranks = midranks(pooled);

  const double mu = static_cast<double>(n1) * static_cast<double>(n2) / 2.0;
  const double observed = std::fabs(u_from_ranks(ranks, n1) - mu);

  // Every subset of size n1 is an equally likely group-1 assignment.
  int64_t extreme = 0, total = 0;
  const double offset = static_cast<double>(n1) * (static_cast<double>(n1) + 1.0) / 2.0;
  auto recurse = [&](auto&& self, size_t start, size_t depth, double rank_sum) -> void {
    if (depth == n1) {
      ++total;
      if (std::fabs(rank_sum - offset - mu) >= observed) ++extreme;
      return;
    }
    for (size_t i = start; i + (n1 - depth) <= n; ++i)
      self(self, i + 1, depth + 1, rank_sum + ranks[i]);
  };
  recurse(recurse, 0, 0, 0.0);
  return static_cast<double>(extreme) / static_cast<double>(total);
}

PairwiseZResult pairwise_z(const ABOutcome& outcome, double alpha, bool two_sided) {
  if (outcome.n < 1) throw std::invalid_argument("pairwise_z: n must be >= 1");
  if (outcome.wins < 0 || outcome.wins > outcome.n)
    throw std::invalid_argument("pairwise_z: wins must lie in [0, n]");
  PairwiseZResult result;
  result.p_hat = static_cast<double>(outcome.wins) / static_cast<double>(outcome.n);
  const double se = std::sqrt(0.25 / static_cast<double>(outcome.n));
  result.z = (result.p_hat - 0.5) / se;
  const double tail = normal_cdf(-std::fabs(result.z));
  result.p = two_sided ? 2.0 * tail : tail;
  result.significant = result.p <= alpha;
  return result;
}

SignificanceMatrix significance_matrix(const std::vector<RatingSet>& sets, double alpha) {
  if (sets.size() < 2)
    throw std::invalid_argument("significance_matrix: need at least 2 conditions");
  std::set<std::string> seen;
  for (const auto& s : sets) {
    validate_rating_set(s);
    if (!seen.insert(s.label).second)
      throw std::invalid_argument("significance_matrix: duplicate label " + s.label);
  }

  SignificanceMatrix matrix;
  for (const auto& s : sets) matrix.labels.push_back(s.label);
  matrix.rows.resize(sets.size());
  for (size_t i = 0; i < sets.size(); ++i) {
    matrix.rows[i].resize(i + 1, SigCell::Self);
    for (size_t j = 0; j < i; ++j) {
      const MwuResult r = mann_whitney_u(sets[i], sets[j]);
      matrix.rows[i][j] =
          r.p_two_sided <= alpha ? SigCell::Significant : SigCell::NotSignificant;
    }
  }
  return matrix;
}

std::string render_matrix(const SignificanceMatrix& matrix) {
  std::string out;
  for (const auto& label : matrix.labels) {
    out += '\t';
    out += label;
  }
  out += '\n';
  for (size_t i = 0; i < matrix.rows.size(); ++i) {
    out += matrix.labels[i];
    for (size_t j = 0; j <= i; ++j) {
      out += '\t';
      switch (matrix.rows[i][j]) {
        case SigCell::Self: out += kSelf; break;
        case SigCell::Significant: out += kBullet; break;
        case SigCell::NotSignificant: out += kSquare; break;
      }
    }
    out += '\n';
  }
  return out;
}

SignificanceMatrix parse_matrix(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("parse_matrix: empty input");

  auto split_tabs = [](const std::string& s) {
    std::vector<std::string> parts;
    size_t start = 0;
    while (true) {
      const size_t pos = s.find('\t', start);
      if (pos == std::string::npos) {
        parts.push_back(s.substr(start));
        break;
      }
      parts.push_back(s.substr(start, pos - start));
      start = pos + 1;
    }
    return parts;
  };

  SignificanceMatrix matrix;
  {
    const auto header = split_tabs(line);
    if (header.size() < 2 || !header[0].empty())
      throw std::invalid_argument("parse_matrix: malformed header row");
    matrix.labels.assign(header.begin() + 1, header.end());
  }
  size_t i = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto parts = split_tabs(line);
    if (i >= matrix.labels.size() || parts.size() != i + 2 || parts[0] != matrix.labels[i])
      throw std::invalid_argument("parse_matrix: malformed row " + std::to_string(i + 1));
    std::vector<SigCell> row;
    for (size_t j = 1; j < parts.size(); ++j) {
      if (parts[j] == kSelf)
        row.push_back(SigCell::Self);
      else if (parts[j] == kBullet)
        row.push_back(SigCell::Significant);
      else if (parts[j] == kSquare)
        row.push_back(SigCell::NotSignificant);
      else
        throw std::invalid_argument("parse_matrix: unknown cell '" + parts[j] + "'");
    }
    matrix.rows.push_back(std::move(row));
    ++i;
  }
  if (i != matrix.labels.size())
    throw std::invalid_argument("parse_matrix: row count does not match header");
  return matrix;
}

std::string matrix_to_json(const SignificanceMatrix& matrix) {
  nlohmann::json j;
  j["labels"] = matrix.labels;
  auto& rows = j["rows"] = nlohmann::json::array();
  for (const auto& row : matrix.rows) {
    nlohmann::json jrow = nlohmann::json::array();
    for (SigCell cell : row) {
      switch (cell) {
        case SigCell::Self: jrow.push_back("self"); break;
        case SigCell::Significant: jrow.push_back("significant"); break;
        case SigCell::NotSignificant: jrow.push_back("not_significant"); break;
      }
    }
    rows.push_back(std::move(jrow));
  }
  return j.dump(2);
}

}  // namespace prunelab
