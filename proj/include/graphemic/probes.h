// Copyright 2026 The Graphemic Authors.
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

// Letter trigrams as probes of the V/C transition structure.
//
// Per-canto trigram counts are normalized per 1,000 symbols and correlated
// (Spearman) with the canto position. A letter trigram is retained as a
// probe when its own trend has p < alpha and the same sign as the trend of
// its V/C class.

#ifndef GRAPHEMIC_PROBES_H_
#define GRAPHEMIC_PROBES_H_

#include <array>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "graphemic/stats.h"
#include "graphemic/tokenizer.h"
#include "graphemic/vc_encoder.h"

namespace graphemic {

struct TrigramProfile {
  std::string letters;
  VcPattern pattern = 0;
  VcClass vc_class = VcClass::kNone;
  std::vector<long> per_canto_counts;  // one entry per canto, reading order
  long total = 0;
  long sw_count = 0;  // occurrences inside a single token
};

// Canto-level denominators shared by all trend tests.
struct CantoAxis {
  std::vector<double> position;  // global canto index
  std::vector<double> length;     // symbols per canto
};

// Occurrence lists must be given per canto in reading order.
std::vector<TrigramProfile> BuildProfiles(
    const std::vector<std::vector<TrigramOccurrence>>& per_canto);

// Counts per 1,000 symbols.
std::vector<double> Normalize(const std::vector<long>& counts, const CantoAxis& axis);

// Spearman of a canto series against position; a constant series yields
// rho = 0, p = 1.
stats::TestResult TrendAgainstPosition(const std::vector<double>& series, const CantoAxis& axis);

struct ClassTrends {
  std::map<VcClass, stats::TestResult> by_class;
  std::map<VcPattern, stats::TestResult> by_pattern;
  std::map<VcClass, std::vector<long>> class_counts;
  std::map<VcPattern, std::vector<long>> pattern_counts;

  int Sign(VcClass cls) const;
};

ClassTrends ComputeClassTrends(const std::vector<std::vector<TrigramOccurrence>>& per_canto,
                               const CantoAxis& axis);

struct ProbeParams {
  long min_support = 50;
  double alpha = 0.1;
};

struct ProbeRecord {
  TrigramProfile profile;
  double rho = 0.0;
  double p_value = 1.0;
  int class_trend_sign = 0;
  bool retained = false;
  double sw_pct = 0.0;
};

// Tests every profile with total >= min_support.
std::vector<ProbeRecord> ScreenProbes(const std::vector<TrigramProfile>& profiles,
                                      const ClassTrends& trends, const CantoAxis& axis,
                                      const ProbeParams& params = {});

// 100 * sw_count / total. Throws Error when total is zero.
double SwRatio(const TrigramProfile& profile);

struct ClassSwAggregate {
  long total = 0;
  long sw_count = 0;
  double sw_pct = 0.0;
};

// Pooled over occurrences (not an average of per-probe percentages).
std::map<VcClass, ClassSwAggregate> AggregateSwByClass(const std::vector<ProbeRecord>& records,
                                                       bool retained_only = true);

// Tokens around the occurrence, with the three characters wrapped in "**".
// window = 0 gives only the covering tokens.
std::string LexicalContext(const TrigramOccurrence& occurrence, const SymbolSequence& seq,
                           const std::vector<Token>& tokens, int window);

void WriteProbeCsv(std::ostream& out, const std::vector<ProbeRecord>& records);

}  // namespace graphemic

#endif  // GRAPHEMIC_PROBES_H_
