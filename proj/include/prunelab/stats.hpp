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
#include <string>
#include <vector>

namespace prunelab {

/// One rated condition: 5-point MOS-style integer scores.
struct RatingSet {
  std::string label;
  std::vector<int32_t> scores;
};

/// Throws unless scores are nonempty and within [1, 5].
void validate_rating_set(const RatingSet& set);

struct MwuResult {
  double u = 0.0;            // U statistic of the first sample
  double z = 0.0;            // signed, continuity-corrected
  double p_two_sided = 1.0;
  bool degenerate = false;   // all pooled values identical (sigma = 0)
};

/// Mann-Whitney U with midranks for ties, tie-corrected normal
/// approximation, and 0.5 continuity correction.
MwuResult mann_whitney_u(const RatingSet& x, const RatingSet& y);

/// Exact two-sided permutation p-value by complete enumeration of the
/// C(n1+n2, n1) group assignments (midranks for ties).  Limited to
/// n1 + n2 <= 12.
double exact_mwu_p(const RatingSet& x, const RatingSet& y);

/// A/B preference outcome: `wins` of `n` raters preferred the proposal.
struct ABOutcome {
  int64_t wins = 0;
  int64_t n = 0;
};

struct PairwiseZResult {
  double p_hat = 0.0;
  double z = 0.0;
  double p = 0.0;  // one-sided in the direction of deviation (two-sided on request)
  bool significant = false;
};

/// z-test of the preference proportion against 0.5.
PairwiseZResult pairwise_z(const ABOutcome& outcome, double alpha = 0.05,
                           bool two_sided = false);

enum class SigCell : uint8_t { Self, Significant, NotSignificant };

/// Lower-triangular pairwise significance grid; rendered with a bullet for
/// significant, a white square for not, and '-' on the diagonal.
struct SignificanceMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<SigCell>> rows;  // rows[i] has i+1 cells (j <= i)

  bool operator==(const SignificanceMatrix& other) const {
    return labels == other.labels && rows == other.rows;
  }
};

/// Pairwise Mann-Whitney U over all condition pairs at level alpha.
SignificanceMatrix significance_matrix(const std::vector<RatingSet>& sets,
                                       double alpha = 0.05);

std::string render_matrix(const SignificanceMatrix& matrix);
SignificanceMatrix parse_matrix(const std::string& text);
std::string matrix_to_json(const SignificanceMatrix& matrix);

/// Standard normal CDF.
double normal_cdf(double x);

}  // namespace prunelab
