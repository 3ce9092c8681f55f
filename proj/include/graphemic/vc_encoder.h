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

#ifndef GRAPHEMIC_VC_ENCODER_H_
#define GRAPHEMIC_VC_ENCODER_H_

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "graphemic/corpus.h"
#include "graphemic/tokenizer.h"
#include "json.hpp"

namespace graphemic {

enum class Symbol : uint8_t { kConsonant = 0, kVowel = 1 };

inline char SymbolChar(Symbol s) { return s == Symbol::kVowel ? 'V' : 'C'; }

class CharClassTable {
 public:
  // a e i o u, the grave/acute/circumflex vowels and the dieresis vowels,
  // in both cases.
  static CharClassTable Default();
  // {"vowels": "aeiou..."}; replaces the vowel set.
  static CharClassTable FromJson(const nlohmann::json& json);

  explicit CharClassTable(std::u32string_view vowels);

  // Throws Error for non-alphabetic characters.
  Symbol Classify(char32_t ch) const;

  const std::unordered_set<char32_t>& vowels() const { return vowels_; }

 private:
  std::unordered_set<char32_t> vowels_;
};

// V/C stream of one canto. Whitespace and punctuation are dropped, so
// neighbouring symbols may come from different tokens or verses.
struct SymbolSequence {
  int canto = 0;
  std::vector<Symbol> symbols;
  std::u32string chars;       // original characters, original case
  std::vector<int> token_ids; // 1-based token index within the canto
  std::vector<int> verses;    // 1-based verse of each symbol

  size_t size() const { return symbols.size(); }
  std::string SymbolString() const;
};

// Trigram V/C patterns as 3-bit codes, first symbol in the high bit and
// V = 1: CCC = 0, CCV = 1, ..., VVV = 7.
using VcPattern = uint8_t;

enum class VcClass : uint8_t {
  kNone = 0,        // CCC, VVV
  kOneAtEnd = 1,    // CCV, VVC
  kOneAtStart = 2,  // CVV, VCC
  kTwo = 3,         // CVC, VCV
};

std::string PatternName(VcPattern pattern);
VcPattern PatternFromName(std::string_view name);
VcClass ClassOf(VcPattern pattern);
std::string_view ClassName(VcClass cls);  // "0", "1E", "1S", "2"

struct TrigramOccurrence {
  std::string letters;  // lowercase, UTF-8
  VcPattern pattern = 0;
  VcClass vc_class = VcClass::kNone;
  int canto = 0;
  int position = 0;  // index of the first symbol in the sequence
  bool single_word = false;
};

Symbol ClassifyChar(char32_t ch, const CharClassTable& table);

// Builds the sequence from the token spans of the raw verses. Throws Error
// when the canto has no alphabetic characters.
SymbolSequence EncodeCanto(const Canto& canto, const std::vector<Token>& tokens,
                           const CharClassTable& table);

struct TrigramScanOptions {
  // When false, windows whose symbols come from two verses are skipped.
  bool cross_verses = true;
};

std::vector<TrigramOccurrence> TrigramScan(const SymbolSequence& seq,
                                           const TrigramScanOptions& options = {});

// One row per canto: canto, length, symbols.
void WriteSymbolCsv(std::ostream& out, const std::vector<SymbolSequence>& seqs);
void WriteTrigramCsv(std::ostream& out, const std::vector<TrigramOccurrence>& occurrences);

}  // namespace graphemic

#endif  // GRAPHEMIC_VC_ENCODER_H_
