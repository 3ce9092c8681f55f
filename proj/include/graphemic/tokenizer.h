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

// Apostrophe-aware tokenizer for medieval Italian verse.
//
// Apostrophes are classified as events before the text is split. Each event
// looks at the maximal alphabetic runs immediately to its left and right and
// is assigned one process category by a fixed rule cascade:
//
//   left empty, right non-empty            apheresis        ('l, 'n)
//   right empty, left non-empty            apocope          (i', se')
//   left in clitic_left                    clitic elision   (l'altro, s'io)
//   left in crasis_left, right a pronoun   crasis           (ch'io, com'i')
//   left in nonclitic_left or |left| <= 2  non-clitic       (ch'a, d'un)
//   otherwise                              general elision  (quinc'entro)
//   both empty                             isolated         (che ' demon)
//
// Tokens are then the maximal alphabetic runs of the verse; apostrophes act
// as separators. An event is attached to the token holding its left segment,
// or to the right segment for apheresis. Isolated events attach to nothing.

#ifndef GRAPHEMIC_TOKENIZER_H_
#define GRAPHEMIC_TOKENIZER_H_

#include <filesystem>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "graphemic/corpus.h"
#include "json.hpp"

namespace graphemic {

enum class ApostropheCategory {
  kApheresis,
  kApocope,
  kCliticElision,
  kNoncliticElision,
  kCrasisContraction,
  kGeneralElision,
  kIsolated,
};

std::string_view CategoryName(ApostropheCategory category);

struct ApostropheEvent {
  int canto = 0;        // global canto index
  int verse = 0;        // 1-based
  int char_offset = 0;  // scalar offset of the apostrophe in the raw verse
  std::string left;     // alphabetic run immediately left, original case
  std::string right;    // alphabetic run immediately right, original case
  ApostropheCategory category = ApostropheCategory::kIsolated;
};

struct Span {
  int start = 0;
  int end = 0;  // exclusive

  friend bool operator==(const Span&, const Span&) = default;
};

struct Token {
  std::string surface;  // lowercase, alphabetic only
  int canto = 0;
  int verse = 0;        // 1-based
  int length = 0;       // surface length in scalars
  Span span;            // in the cleaned verse (surfaces joined by one space)
  Span raw_span;        // in the raw verse
  bool has_apostrophe = false;
  std::vector<ApostropheCategory> labels;  // event order

  // Number of distinct categories in `labels`.
  int DistinctLabels() const;
};

struct RuleConfig {
  std::set<std::string> clitic_left;
  std::set<std::string> crasis_left;
  std::set<std::string> crasis_right_pronouns;
  std::set<std::string> nonclitic_left;
  // Left segments of at most this many letters fall back to non-clitic.
  int nonclitic_max_length = 2;

  static RuleConfig Default();
  static RuleConfig FromJson(const nlohmann::json& json);
  static RuleConfig Load(const std::filesystem::path& path);
  nlohmann::json ToJson() const;

  // Throws Error when clitic_left and crasis_left overlap or an entry is not
  // lowercase alphabetic.
  void Validate() const;
};

ApostropheCategory ClassifyApostrophe(std::string_view left, std::string_view right,
                                      const RuleConfig& rules);

std::vector<ApostropheEvent> ClassifyApostrophes(const Canto& canto, const RuleConfig& rules);

std::vector<Token> Segment(const Canto& canto, const std::vector<ApostropheEvent>& events);

struct TokenizedCanto {
  int canto = 0;
  std::vector<ApostropheEvent> events;
  std::vector<Token> tokens;
};

TokenizedCanto TokenizeCanto(const Canto& canto, const RuleConfig& rules);
std::vector<TokenizedCanto> TokenizeCorpus(const CorpusDocument& doc, const RuleConfig& rules);

// The cleaned verse: token surfaces of one verse joined by single spaces.
std::string CleanedVerse(const std::vector<Token>& tokens, int verse);

struct StopwordList {
  enum class Provenance { kGenerated, kFile };

  std::set<std::string> words;
  Provenance provenance = Provenance::kGenerated;

  bool contains(const std::string& word) const { return words.count(word) > 0; }

  nlohmann::json ToJson() const;
  // Accepts {"words": [...]} or a bare array; provenance becomes kFile.
  static StopwordList Load(const std::filesystem::path& path);
};

struct StopwordParams {
  int top_k = 150;
  int min_canto_dispersion = 80;
  std::set<std::string> keep_exceptions;
};

// Words in the global top_k by token frequency (ties broken
// lexicographically) that occur in at least min_canto_dispersion distinct
// cantos, minus keep_exceptions.
StopwordList BuildStopwords(const std::vector<TokenizedCanto>& corpus,
                            const StopwordParams& params);

struct CantoTokenStats {
  int canto = 0;
  int token_count = 0;
  int apostrophe_tokens = 0;  // single-process apostrophe-bearing tokens
  int combined_tokens = 0;    // tokens with two or more distinct processes
  int isolated_events = 0;
  double apostrophe_rate_per_100 = 0.0;
  double mean_token_length = 0.0;
};

std::vector<CantoTokenStats> TokenStats(const std::vector<TokenizedCanto>& corpus);

// CSV columns: canto, verse, surface, labels, span.
void WriteTokenCsv(std::ostream& out, const std::vector<TokenizedCanto>& corpus);

}  // namespace graphemic

#endif  // GRAPHEMIC_TOKENIZER_H_
