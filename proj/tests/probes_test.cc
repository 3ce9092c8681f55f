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


#include <random>
#include <sstream>

#include "doctest.h"
#include "graphemic/probes.h"

namespace graphemic {
namespace {

TrigramOccurrence Occ(const std::string& letters, const std::string& pattern, bool single_word) {
  TrigramOccurrence o;
  o.letters = letters;
  o.pattern = PatternFromName(pattern);
  o.vc_class = ClassOf(o.pattern);
  o.single_word = single_word;
  return o;
}

CantoAxis Axis(int n, double length = 1000.0) {
  CantoAxis axis;
  for (int i = 0; i < n; ++i) {
    axis.position.push_back(i + 1);
    axis.length.push_back(length);
  }
  return axis;
}

struct Fixture {
  Canto canto;
  TokenizedCanto tokens;
  SymbolSequence seq;
  std::vector<TrigramOccurrence> trigrams;

  explicit Fixture(const std::string& verse) {
    canto.cantica_name = "Inferno";
    canto.canto_number = 1;
    canto.global_index = 1;
    canto.verses = {verse};
    tokens = TokenizeCanto(canto, RuleConfig::Default());
    seq = EncodeCanto(canto, tokens.tokens, CharClassTable::Default());
    trigrams = TrigramScan(seq);
  }

  const TrigramOccurrence& Find(const std::string& letters) const {
    for (const auto& t : trigrams) {
      if (t.letters == letters) return t;
    }
    throw Error("no trigram " + letters);
  }
};

TEST_CASE("profiles count per canto and single-word share") {
  const std::vector<std::vector<TrigramOccurrence>> per_canto = {
      {Occ("str", "CCC", true), Occ("str", "CCC", false), Occ("ell", "VCC", true)},
      {},
      {Occ("str", "CCC", true)}};
  const auto profiles = BuildProfiles(per_canto);
  REQUIRE(profiles.size() == 2);
  CHECK(profiles[0].letters == "ell");
  CHECK(profiles[1].letters == "str");
  CHECK(profiles[1].per_canto_counts == std::vector<long>{2, 0, 1});
  CHECK(profiles[1].total == 3);
  CHECK(profiles[1].sw_count == 2);
  CHECK(SwRatio(profiles[1]) == doctest::Approx(200.0 / 3));
  CHECK(SwRatio(profiles[0]) == doctest::Approx(100.0));
  TrigramProfile empty;
  CHECK_THROWS_AS(SwRatio(empty), Error);
}

TEST_CASE("normalization per thousand symbols") {
  CantoAxis axis = Axis(3);
  axis.length = {500, 2000, 1000};
  const auto n = Normalize({5, 5, 5}, axis);
  CHECK(n == std::vector<double>{10.0, 2.5, 5.0});
  CHECK_THROWS_AS(Normalize({1, 2}, axis), Error);
}

TEST_CASE("a constant series has no trend") {
  const auto r = TrendAgainstPosition({3, 3, 3, 3, 3}, Axis(5));
  CHECK(r.statistic == 0.0);
  CHECK(r.p_value == 1.0);
}

TEST_CASE("screening keeps probes that follow their class") {
  const int n = 12;
  const CantoAxis axis = Axis(n);
  std::vector<std::vector<TrigramOccurrence>> per_canto(n);
  for (int c = 0; c < n; ++c) {
    // "str" (CCC) falls, "eio" (VVV) rises less steeply so class 0 falls.
    for (int k = 0; k < 30 - 2 * c; ++k) per_canto[c].push_back(Occ("str", "CCC", k % 4 != 0));
    for (int k = 0; k < 5 + (c % 3 == 0 ? c / 3 : c / 4); ++k) {
      per_canto[c].push_back(Occ("eio", "VVV", false));
    }
    // "nte" (CVC) rises but its class falls: filtered by the sign rule.
    for (int k = 0; k < 5 + c; ++k) per_canto[c].push_back(Occ("nte", "CVC", true));
    for (int k = 0; k < 40 - 3 * c; ++k) per_canto[c].push_back(Occ("ana", "VCV", true));
    // Rare trigram below support.
    if (c == 0) per_canto[c].push_back(Occ("zzz", "CCC", true));
  }
  const ClassTrends trends = ComputeClassTrends(per_canto, axis);
  CHECK(trends.Sign(VcClass::kNone) == -1);
  CHECK(trends.Sign(VcClass::kTwo) == -1);
  CHECK(trends.class_counts.at(VcClass::kNone)[0] == 30 + 5 + 1);

  const auto records = ScreenProbes(BuildProfiles(per_canto), trends, axis, {50, 0.1});
  std::map<std::string, ProbeRecord> by;
  for (const auto& r : records) by[r.profile.letters] = r;
  CHECK(by.count("zzz") == 0);
  REQUIRE(by.count("str") == 1);
  CHECK(by["str"].rho == doctest::Approx(-1.0));
  CHECK(by["str"].retained);
  long str_total = 0, str_sw = 0;
  for (int c = 0; c < n; ++c) {
    for (int k = 0; k < 30 - 2 * c; ++k) {
      ++str_total;
      str_sw += k % 4 != 0;
    }
  }
  CHECK(by["str"].profile.total == str_total);
  CHECK(by["str"].sw_pct == doctest::Approx(100.0 * str_sw / str_total));
  CHECK(by["eio"].rho > 0);
  CHECK_FALSE(by["eio"].retained);
  CHECK(by["nte"].p_value < 0.1);
  CHECK_FALSE(by["nte"].retained);
  CHECK(by["ana"].retained);

  const auto agg = AggregateSwByClass(records);
  CHECK(agg.at(VcClass::kNone).total == by["str"].profile.total);
  CHECK(agg.at(VcClass::kTwo).sw_pct == doctest::Approx(100.0));
  const auto all = AggregateSwByClass(records, false);
  CHECK(all.at(VcClass::kNone).total == by["str"].profile.total + by["eio"].profile.total);

  std::ostringstream csv;
  WriteProbeCsv(csv, records);
  const std::string text = csv.str();
  CHECK(text.rfind("letters,vc_pattern,class,rho,p,retained,sw_pct,total", 0) == 0);
  // Retained rows come first, ordered by single-word share.
  CHECK(text.find("\nana,") < text.find("\nstr,"));
  CHECK(text.find("\nstr,") < text.find("\neio,"));
}

TEST_CASE("lexical context marks the trigram") {
  const Fixture f("il maestro disse");
  CHECK(LexicalContext(f.Find("str"), f.seq, f.tokens.tokens, 0) == "mae**str**o");
  CHECK(LexicalContext(f.Find("str"), f.seq, f.tokens.tokens, 1) == "il mae**str**o disse");
  CHECK(LexicalContext(f.Find("str"), f.seq, f.tokens.tokens, 5) == "il mae**str**o disse");
}

TEST_CASE("lexical context across tokens") {
  const Fixture f("la voce in sua parte");
  const TrigramOccurrence& occ = f.Find("ein");
  CHECK_FALSE(occ.single_word);
  CHECK(LexicalContext(occ, f.seq, f.tokens.tokens, 1) == "la voc**e in** sua");
  TrigramOccurrence bad = occ;
  bad.position = static_cast<int>(f.seq.size()) - 2;
  CHECK_THROWS_AS(LexicalContext(bad, f.seq, f.tokens.tokens, 1), Error);
}

}  // namespace
}  // namespace graphemic
