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

#include "graphemic/tokenizer.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "graphemic/csv.h"

namespace graphemic {

using nlohmann::json;

std::string_view CategoryName(ApostropheCategory category) {
  switch (category) {
    case ApostropheCategory::kApheresis: return "apheresis";
    case ApostropheCategory::kApocope: return "apocope";
    case ApostropheCategory::kCliticElision: return "clitic_elision";
    case ApostropheCategory::kNoncliticElision: return "nonclitic_elision";
    case ApostropheCategory::kCrasisContraction: return "crasis_contraction";
    case ApostropheCategory::kGeneralElision: return "general_elision";
    case ApostropheCategory::kIsolated: return "isolated";
  }
  return "unknown";
}

int Token::DistinctLabels() const {
  std::vector<ApostropheCategory> sorted = labels;
  std::sort(sorted.begin(), sorted.end());
  return static_cast<int>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

RuleConfig RuleConfig::Default() {
  RuleConfig rules;
  rules.clitic_left = {"l", "gl", "m", "t", "s", "v", "c", "n"};
  rules.crasis_left = {"ch", "com", "quand", "quant", "anch"};
  rules.crasis_right_pronouns = {"io", "i", "ei", "el", "ella", "elli", "egli"};
  rules.nonclitic_left = {"ch",   "d",     "ond",  "tutt", "grand", "sant",
                          "quell", "quest", "mezz", "contr", "sopr", "tant"};
  return rules;
}

namespace {

std::set<std::string> StringSet(const json& node, const char* key) {
  std::set<std::string> out;
  auto it = node.find(key);
  if (it == node.end()) return out;
  if (!it->is_array()) throw SchemaError(std::string("rules.") + key + ": expected array");
  for (const json& v : *it) {
    if (!v.is_string()) throw SchemaError(std::string("rules.") + key + ": expected strings");
    out.insert(v.get<std::string>());
  }
  return out;
}

bool IsLowerAlpha(std::string_view word) {
  std::u32string decoded = text::Decode(word);
  if (decoded.empty()) return false;
  for (char32_t ch : decoded) {
    if (!text::IsAlpha(ch) || text::ToLower(ch) != ch) return false;
  }
  return true;
}

std::string Lower(std::string_view word) { return text::Encode(text::ToLower(text::Decode(word))); }

}  // namespace

RuleConfig RuleConfig::FromJson(const json& node) {
  if (!node.is_object()) throw SchemaError("rules: expected object");
  RuleConfig rules;
  rules.clitic_left = StringSet(node, "clitic_left");
  rules.crasis_left = StringSet(node, "crasis_left");
  rules.crasis_right_pronouns = StringSet(node, "crasis_right_pronouns");
  rules.nonclitic_left = StringSet(node, "nonclitic_left");
  rules.nonclitic_max_length = node.value("nonclitic_max_length", 2);
  rules.Validate();
  return rules;
}

RuleConfig RuleConfig::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return FromJson(json::parse(in));
  } catch (const json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

json RuleConfig::ToJson() const {
  return {{"clitic_left", clitic_left},
          {"crasis_left", crasis_left},
          {"crasis_right_pronouns", crasis_right_pronouns},
          {"nonclitic_left", nonclitic_left},
          {"nonclitic_max_length", nonclitic_max_length}};
}

void RuleConfig::Validate() const {
  for (const auto* set : {&clitic_left, &crasis_left, &crasis_right_pronouns, &nonclitic_left}) {
    for (const std::string& w : *set) {
      if (!IsLowerAlpha(w)) throw Error("rule entry '" + w + "' is not lowercase alphabetic");
    }
  }
  for (const std::string& w : clitic_left) {
    if (crasis_left.count(w)) {
      throw Error("rule entry '" + w + "' is in both clitic_left and crasis_left");
    }
  }
}

ApostropheCategory ClassifyApostrophe(std::string_view left, std::string_view right,
                                      const RuleConfig& rules) {
  if (left.empty() && right.empty()) return ApostropheCategory::kIsolated;
  if (left.empty()) return ApostropheCategory::kApheresis;
  if (right.empty()) return ApostropheCategory::kApocope;
  std::string l = Lower(left);
  std::string r = Lower(right);
  if (rules.clitic_left.count(l)) return ApostropheCategory::kCliticElision;
  if (rules.crasis_left.count(l) && rules.crasis_right_pronouns.count(r)) {
    return ApostropheCategory::kCrasisContraction;
  }
  if (rules.nonclitic_left.count(l) ||
      static_cast<int>(text::Length(l)) <= rules.nonclitic_max_length) {
    return ApostropheCategory::kNoncliticElision;
  }
  return ApostropheCategory::kGeneralElision;
}

std::vector<ApostropheEvent> ClassifyApostrophes(const Canto& canto, const RuleConfig& rules) {
  std::vector<ApostropheEvent> events;
  for (size_t v = 0; v < canto.verses.size(); ++v) {
    std::u32string verse = text::Decode(canto.verses[v]);
    const int n = static_cast<int>(verse.size());
    for (int i = 0; i < n; ++i) {
      if (!text::IsApostrophe(verse[i])) continue;
      int lo = i;
      while (lo > 0 && text::IsAlpha(verse[lo - 1])) --lo;
      int hi = i + 1;
      while (hi < n && text::IsAlpha(verse[hi])) ++hi;
      ApostropheEvent event;
      event.canto = canto.global_index;
      event.verse = static_cast<int>(v) + 1;
      event.char_offset = i;
      event.left = text::Encode(std::u32string_view(verse).substr(lo, i - lo));
      event.right = text::Encode(std::u32string_view(verse).substr(i + 1, hi - i - 1));
      event.category = ClassifyApostrophe(event.left, event.right, rules);
      events.push_back(std::move(event));
    }
  }
  return events;
}

std::vector<Token> Segment(const Canto& canto, const std::vector<ApostropheEvent>& events) {
  std::vector<Token> tokens;
  for (size_t v = 0; v < canto.verses.size(); ++v) {
    const int verse_no = static_cast<int>(v) + 1;
    std::u32string verse = text::Decode(canto.verses[v]);
    const int n = static_cast<int>(verse.size());
    const size_t first = tokens.size();
    // Maps raw start/end offsets of this verse's tokens to token indices.
    std::unordered_map<int, size_t> by_start, by_end;
    int cleaned_pos = 0;
    for (int i = 0; i < n;) {
      if (!text::IsAlpha(verse[i])) {
        ++i;
        continue;
      }
      int j = i;
      while (j < n && text::IsAlpha(verse[j])) ++j;
      Token token;
      token.surface = text::Encode(text::ToLower(std::u32string_view(verse).substr(i, j - i)));
      token.canto = canto.global_index;
      token.verse = verse_no;
      token.length = j - i;
      if (tokens.size() > first) ++cleaned_pos;  // separating space
      token.span = {cleaned_pos, cleaned_pos + token.length};
      cleaned_pos += token.length;
      token.raw_span = {i, j};
      by_start[i] = tokens.size();
      by_end[j] = tokens.size();
      tokens.push_back(std::move(token));
      i = j;
    }
    for (const ApostropheEvent& event : events) {
      if (event.verse != verse_no || event.category == ApostropheCategory::kIsolated) continue;
      size_t host;
      if (!event.left.empty()) {
        auto it = by_end.find(event.char_offset);
        if (it == by_end.end()) continue;
        host = it->second;
      } else {
        auto it = by_start.find(event.char_offset + 1);
        if (it == by_start.end()) continue;
        host = it->second;
      }
      tokens[host].has_apostrophe = true;
      tokens[host].labels.push_back(event.category);
    }
  }
  return tokens;
}

TokenizedCanto TokenizeCanto(const Canto& canto, const RuleConfig& rules) {
  TokenizedCanto out;
  out.canto = canto.global_index;
  out.events = ClassifyApostrophes(canto, rules);
  out.tokens = Segment(canto, out.events);
  return out;
}

std::vector<TokenizedCanto> TokenizeCorpus(const CorpusDocument& doc, const RuleConfig& rules) {
  std::vector<TokenizedCanto> out;
  for (const Canto* canto : doc.Cantos()) out.push_back(TokenizeCanto(*canto, rules));
  return out;
}

std::string CleanedVerse(const std::vector<Token>& tokens, int verse) {
  std::string out;
  for (const Token& t : tokens) {
    if (t.verse != verse) continue;
    if (!out.empty()) out += ' ';
    out += t.surface;
  }
  return out;
}

json StopwordList::ToJson() const {
  return {{"provenance", provenance == Provenance::kFile ? "file" : "generated"},
          {"words", words}};
}

StopwordList StopwordList::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  const json& words = root.is_object() ? root.at("words") : root;
  if (!words.is_array()) throw SchemaError(path.string() + ": expected a list of words");
  StopwordList list;
  list.provenance = Provenance::kFile;
  for (const json& w : words) {
    if (!w.is_string() || !IsLowerAlpha(w.get<std::string>())) {
      throw SchemaError(path.string() + ": stopwords must be lowercase alphabetic strings");
    }
    list.words.insert(w.get<std::string>());
  }
  return list;
}

StopwordList BuildStopwords(const std::vector<TokenizedCanto>& corpus,
                            const StopwordParams& params) {
  std::map<std::string, long> freq;
  std::map<std::string, std::unordered_set<int>> cantos;
  for (const TokenizedCanto& tc : corpus) {
    for (const Token& t : tc.tokens) {
      ++freq[t.surface];
      cantos[t.surface].insert(tc.canto);
    }
  }
  std::vector<std::pair<std::string, long>> ranked(freq.begin(), freq.end());
  // std::map iteration is lexicographic, so a stable sort keeps the tie-break.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  StopwordList list;
  const size_t k = std::min(ranked.size(), static_cast<size_t>(std::max(params.top_k, 0)));
  for (size_t i = 0; i < k; ++i) {
    const std::string& word = ranked[i].first;
    if (static_cast<int>(cantos[word].size()) < params.min_canto_dispersion) continue;
    if (params.keep_exceptions.count(word)) continue;
    list.words.insert(word);
  }
  return list;
}

std::vector<CantoTokenStats> TokenStats(const std::vector<TokenizedCanto>& corpus) {
  std::vector<CantoTokenStats> out;
  for (const TokenizedCanto& tc : corpus) {
    CantoTokenStats s;
    s.canto = tc.canto;
    long letters = 0;
    for (const Token& t : tc.tokens) {
      ++s.token_count;
      letters += t.length;
      if (!t.has_apostrophe) continue;
      if (t.DistinctLabels() >= 2) {
        ++s.combined_tokens;
      } else {
        ++s.apostrophe_tokens;
      }
    }
    for (const ApostropheEvent& e : tc.events) {
      if (e.category == ApostropheCategory::kIsolated) ++s.isolated_events;
    }
    if (s.token_count > 0) {
      s.apostrophe_rate_per_100 = 100.0 * s.apostrophe_tokens / s.token_count;
      s.mean_token_length = static_cast<double>(letters) / s.token_count;
    }
    out.push_back(s);
  }
  return out;
}

void WriteTokenCsv(std::ostream& out, const std::vector<TokenizedCanto>& corpus) {
  CsvWriter csv(out);
  csv.Row({"canto", "verse", "surface", "labels", "span"});
  for (const TokenizedCanto& tc : corpus) {
    for (const Token& t : tc.tokens) {
      std::string labels;
      for (ApostropheCategory c : t.labels) {
        if (!labels.empty()) labels += '+';
        labels += CategoryName(c);
      }
      csv << t.canto << t.verse << t.surface << labels
          << (std::to_string(t.span.start) + "-" + std::to_string(t.span.end));
      csv.EndRow();
    }
  }
}

}  // namespace graphemic
