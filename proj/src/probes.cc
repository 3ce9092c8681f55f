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

#include "graphemic/probes.h"

#include <algorithm>
#include <unordered_map>

#include "graphemic/csv.h"

namespace graphemic {

std::vector<TrigramProfile> BuildProfiles(
    const std::vector<std::vector<TrigramOccurrence>>& per_canto) {
  const size_t cantos = per_canto.size();
  std::unordered_map<std::string, TrigramProfile> by_letters;
  for (size_t c = 0; c < cantos; ++c) {
    for (const TrigramOccurrence& occ : per_canto[c]) {
      auto [it, inserted] = by_letters.try_emplace(occ.letters);
      TrigramProfile& p = it->second;
      if (inserted) {
        p.letters = occ.letters;
        p.pattern = occ.pattern;
        p.vc_class = occ.vc_class;
        p.per_canto_counts.assign(cantos, 0);
      }
      ++p.per_canto_counts[c];
      ++p.total;
      if (occ.single_word) ++p.sw_count;
    }
  }
  std::vector<TrigramProfile> out;
  out.reserve(by_letters.size());
  for (auto& [letters, profile] : by_letters) out.push_back(std::move(profile));
  std::sort(out.begin(), out.end(),
            [](const TrigramProfile& a, const TrigramProfile& b) { return a.letters < b.letters; });
  return out;
}

std::vector<double> Normalize(const std::vector<long>& counts, const CantoAxis& axis) {
  if (counts.size() != axis.length.size()) throw Error("canto count mismatch in normalization");
  std::vector<double> out(counts.size());
  for (size_t i = 0; i < counts.size(); ++i) out[i] = 1000.0 * counts[i] / axis.length[i];
  return out;
}

stats::TestResult TrendAgainstPosition(const std::vector<double>& series, const CantoAxis& axis) {
  const bool constant =
      std::all_of(series.begin(), series.end(), [&](double v) { return v == series.front(); });
  if (constant) {
    stats::TestResult flat;
    flat.effect = 0.0;
    flat.n = static_cast<int>(series.size());
    return flat;
  }
  return stats::Spearman(axis.position, series);
}

int ClassTrends::Sign(VcClass cls) const {
  auto it = by_class.find(cls);
  if (it == by_class.end()) return 0;
  return (it->second.statistic > 0) - (it->second.statistic < 0);
}

ClassTrends ComputeClassTrends(const std::vector<std::vector<TrigramOccurrence>>& per_canto,
                               const CantoAxis& axis) {
  ClassTrends trends;
  const size_t cantos = per_canto.size();
  for (int c = 0; c < 4; ++c) trends.class_counts[static_cast<VcClass>(c)].assign(cantos, 0);
  for (VcPattern p = 0; p < 8; ++p) trends.pattern_counts[p].assign(cantos, 0);
  for (size_t c = 0; c < cantos; ++c) {
    for (const TrigramOccurrence& occ : per_canto[c]) {
      ++trends.class_counts[occ.vc_class][c];
      ++trends.pattern_counts[occ.pattern][c];
    }
  }
  for (const auto& [cls, counts] : trends.class_counts) {
    trends.by_class[cls] = TrendAgainstPosition(Normalize(counts, axis), axis);
  }
  for (const auto& [pattern, counts] : trends.pattern_counts) {
    trends.by_pattern[pattern] = TrendAgainstPosition(Normalize(counts, axis), axis);
  }
  return trends;
}

double SwRatio(const TrigramProfile& profile) {
  if (profile.total == 0) throw Error("trigram '" + profile.letters + "' has no occurrences");
  return 100.0 * static_cast<double>(profile.sw_count) / static_cast<double>(profile.total);
}

std::vector<ProbeRecord> ScreenProbes(const std::vector<TrigramProfile>& profiles,
                                      const ClassTrends& trends, const CantoAxis& axis,
                                      const ProbeParams& params) {
  std::vector<ProbeRecord> out;
  for (const TrigramProfile& profile : profiles) {
    if (profile.total < params.min_support) continue;
    ProbeRecord rec;
    rec.profile = profile;
    const stats::TestResult trend = TrendAgainstPosition(Normalize(profile.per_canto_counts, axis), axis);
    rec.rho = trend.statistic;
    rec.p_value = trend.p_value;
    rec.class_trend_sign = trends.Sign(profile.vc_class);
    const int sign = (rec.rho > 0) - (rec.rho < 0);
    rec.retained = rec.p_value < params.alpha && sign != 0 && sign == rec.class_trend_sign;
    rec.sw_pct = SwRatio(profile);
    out.push_back(std::move(rec));
  }
  return out;
}

std::map<VcClass, ClassSwAggregate> AggregateSwByClass(const std::vector<ProbeRecord>& records,
                                                       bool retained_only) {
  std::map<VcClass, ClassSwAggregate> out;
  for (const ProbeRecord& r : records) {
    if (retained_only && !r.retained) continue;
    ClassSwAggregate& agg = out[r.profile.vc_class];
    agg.total += r.profile.total;
    agg.sw_count += r.profile.sw_count;
  }
  for (auto& [cls, agg] : out) {
    agg.sw_pct = agg.total > 0 ? 100.0 * agg.sw_count / agg.total : 0.0;
  }
  return out;
}

std::string LexicalContext(const TrigramOccurrence& occurrence, const SymbolSequence& seq,
                           const std::vector<Token>& tokens, int window) {
  const int pos = occurrence.position;
  if (pos < 0 || static_cast<size_t>(pos) + 2 >= seq.size()) {
    throw Error("trigram position " + std::to_string(pos) + " outside the sequence");
  }
  const int first_token = std::max(1, seq.token_ids[pos] - window);
  const int last_token =
      std::min(static_cast<int>(tokens.size()), seq.token_ids[pos + 2] + window);
  // Offset of each covered symbol inside its token.
  auto offset_in_token = [&](int i) {
    int k = i;
    while (k > 0 && seq.token_ids[k - 1] == seq.token_ids[i]) --k;
    return i - k;
  };
  const int open_token = seq.token_ids[pos];
  const int open_offset = offset_in_token(pos);
  const int close_token = seq.token_ids[pos + 2];
  const int close_offset = offset_in_token(pos + 2);

  std::string out;
  for (int t = first_token; t <= last_token; ++t) {
    if (t > first_token) out += ' ';
    const std::u32string surface = text::Decode(tokens[t - 1].surface);
    for (int c = 0; c < static_cast<int>(surface.size()); ++c) {
      if (t == open_token && c == open_offset) out += "**";
      out += text::Encode(surface[c]);
      if (t == close_token && c == close_offset) out += "**";
    }
  }
  return out;
}

void WriteProbeCsv(std::ostream& out, const std::vector<ProbeRecord>& records) {
  std::vector<const ProbeRecord*> sorted;
  for (const ProbeRecord& r : records) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](const ProbeRecord* a, const ProbeRecord* b) {
    if (a->retained != b->retained) return a->retained;
    if (a->sw_pct != b->sw_pct) return a->sw_pct > b->sw_pct;
    return a->profile.letters < b->profile.letters;
  });
  CsvWriter csv(out);
  csv.Row({"letters", "vc_pattern", "class", "rho", "p", "retained", "sw_pct", "total"});
  for (const ProbeRecord* r : sorted) {
    csv << r->profile.letters << PatternName(r->profile.pattern) << ClassName(r->profile.vc_class)
        << r->rho << r->p_value << r->retained << r->sw_pct << r->profile.total;
    csv.EndRow();
  }
}

}  // namespace graphemic
