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

#ifndef GRAPHEMIC_ANCHORS_H_
#define GRAPHEMIC_ANCHORS_H_

#include <ostream>
#include <string>
#include <vector>

#include "graphemic/classify.h"
#include "graphemic/probes.h"

namespace graphemic {

struct AnchorRecord {
  std::string term;
  std::string probe_letters;
  std::string cantica;  // class under which the term ranked
  long term_total_freq = 0;
  double cantica_share = 0.0;  // max over classes of freq in class / total
  double signal_score = 0.0;
};

// log(1 + freq) * share. Throws Error for a zero frequency.
double SignalScore(long term_total_freq, double cantica_share);

// One record per (term, probe) with the probe a substring of the term. A
// term ranked under several classes keeps the class with the largest
// coefficient. Frequencies come from `data`.
std::vector<AnchorRecord> LinkProbesToTerms(const std::vector<ProbeRecord>& retained,
                                            const std::vector<std::string>& classes,
                                            const std::vector<std::vector<RankedTerm>>& rankings,
                                            const LabeledBags& data);

// Descending score, then term, then probe.
void SortAnchors(std::vector<AnchorRecord>& records);

void WriteAnchorCsv(std::ostream& out, const std::vector<AnchorRecord>& records);

}  // namespace graphemic

#endif  // GRAPHEMIC_ANCHORS_H_
