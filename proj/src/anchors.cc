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

#include "graphemic/anchors.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "graphemic/csv.h"

namespace graphemic {

double SignalScore(long term_total_freq, double cantica_share) {
  if (term_total_freq <= 0) throw Error("anchor term has zero frequency");
  return std::log1p(static_cast<double>(term_total_freq)) * cantica_share;
}

std::vector<AnchorRecord> LinkProbesToTerms(const std::vector<ProbeRecord>& retained,
                                            const std::vector<std::string>& classes,
                                            const std::vector<std::vector<RankedTerm>>& rankings,
                                            const LabeledBags& data) {
  struct Best {
    int cls = -1;
    double coefficient = 0.0;
  };
  std::map<std::string, Best> ranked;
  for (size_t c = 0; c < rankings.size(); ++c) {
    for (const RankedTerm& t : rankings[c]) {
      Best& b = ranked[t.term];
      if (b.cls < 0 || t.coefficient > b.coefficient) b = {static_cast<int>(c), t.coefficient};
    }
  }
  std::vector<AnchorRecord> out;
  for (const auto& [term, best] : ranked) {
    std::vector<long> per_class(classes.size(), 0);
    for (size_t i = 0; i < data.size(); ++i) {
      auto it = data.bags[i].find(term);
      if (it != data.bags[i].end()) per_class[data.labels[i]] += it->second;
    }
    long total = 0;
    for (long v : per_class) total += v;
    for (const ProbeRecord& probe : retained) {
      if (term.find(probe.profile.letters) == std::string::npos) continue;
      AnchorRecord rec;
      rec.term = term;
      rec.probe_letters = probe.profile.letters;
      rec.cantica = classes.at(best.cls);
      rec.term_total_freq = total;
      rec.cantica_share =
          total > 0 ? static_cast<double>(*std::max_element(per_class.begin(), per_class.end())) /
                          static_cast<double>(total)
                    : 0.0;
      rec.signal_score = SignalScore(total, rec.cantica_share);
      out.push_back(std::move(rec));
    }
  }
  SortAnchors(out);
  return out;
}

void SortAnchors(std::vector<AnchorRecord>& records) {
  std::sort(records.begin(), records.end(), [](const AnchorRecord& a, const AnchorRecord& b) {
    if (a.signal_score != b.signal_score) return a.signal_score > b.signal_score;
    if (a.term != b.term) return a.term < b.term;
    return a.probe_letters < b.probe_letters;
  });
}

void WriteAnchorCsv(std::ostream& out, const std::vector<AnchorRecord>& records) {
  CsvWriter csv(out);
  csv.Row({"term", "probe", "cantica", "score", "term_total_freq", "cantica_share"});
  for (const AnchorRecord& r : records) {
    csv << r.term << r.probe_letters << r.cantica << r.signal_score << r.term_total_freq
        << r.cantica_share;
    csv.EndRow();
  }
}

}  // namespace graphemic
