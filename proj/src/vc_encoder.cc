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

#include "graphemic/vc_encoder.h"

#include "graphemic/csv.h"

namespace graphemic {

CharClassTable CharClassTable::Default() {
  return CharClassTable(U"aeiouàèéìíîòóùúëïüäö");
}

CharClassTable CharClassTable::FromJson(const nlohmann::json& json) {
  if (!json.is_object() || !json.contains("vowels") || !json["vowels"].is_string()) {
    throw SchemaError("char table: expected {\"vowels\": \"...\"}");
  }
  return CharClassTable(text::Decode(json["vowels"].get<std::string>()));
}

CharClassTable::CharClassTable(std::u32string_view vowels) {
  for (char32_t ch : vowels) {
    if (!text::IsAlpha(ch)) {
      throw Error("vowel set entry U+" + std::to_string(static_cast<uint32_t>(ch)) +
                  " is not alphabetic");
    }
    vowels_.insert(text::ToLower(ch));
  }
}

Symbol CharClassTable::Classify(char32_t ch) const {
  if (!text::IsAlpha(ch)) {
    throw Error("cannot classify non-alphabetic character '" + text::Encode(ch) + "'");
  }
  return vowels_.count(text::ToLower(ch)) ? Symbol::kVowel : Symbol::kConsonant;
}

std::string SymbolSequence::SymbolString() const {
  std::string out;
  out.reserve(symbols.size());
  for (Symbol s : symbols) out += SymbolChar(s);
  return out;
}

std::string PatternName(VcPattern pattern) {
  std::string out(3, 'C');
  for (int i = 0; i < 3; ++i) {
    if (pattern & (4 >> i)) out[i] = 'V';
  }
  return out;
}

VcPattern PatternFromName(std::string_view name) {
  if (name.size() != 3) throw Error("bad V/C pattern '" + std::string(name) + "'");
  VcPattern p = 0;
  for (int i = 0; i < 3; ++i) {
    if (name[i] == 'V') {
      p |= 4 >> i;
    } else if (name[i] != 'C') {
      throw Error("bad V/C pattern '" + std::string(name) + "'");
    }
  }
  return p;
}

VcClass ClassOf(VcPattern pattern) {
  const bool first = pattern & 4, second = pattern & 2, third = pattern & 1;
  const bool start = first != second;
  const bool end = second != third;
  if (start && end) return VcClass::kTwo;
  if (start) return VcClass::kOneAtStart;
  if (end) return VcClass::kOneAtEnd;
  return VcClass::kNone;
}

std::string_view ClassName(VcClass cls) {
  switch (cls) {
    case VcClass::kNone: return "0";
    case VcClass::kOneAtEnd: return "1E";
    case VcClass::kOneAtStart: return "1S";
    case VcClass::kTwo: return "2";
  }
  return "?";
}

Symbol ClassifyChar(char32_t ch, const CharClassTable& table) { return table.Classify(ch); }

SymbolSequence EncodeCanto(const Canto& canto, const std::vector<Token>& tokens,
                           const CharClassTable& table) {
  SymbolSequence seq;
  seq.canto = canto.global_index;
  std::u32string verse;
  int decoded_verse = 0;
  for (size_t t = 0; t < tokens.size(); ++t) {
    const Token& token = tokens[t];
    if (token.verse != decoded_verse) {
      verse = text::Decode(canto.verses.at(token.verse - 1));
      decoded_verse = token.verse;
    }
    for (int i = token.raw_span.start; i < token.raw_span.end; ++i) {
      char32_t ch = verse.at(i);
      seq.symbols.push_back(table.Classify(ch));
      seq.chars.push_back(ch);
      seq.token_ids.push_back(static_cast<int>(t) + 1);
      seq.verses.push_back(token.verse);
    }
  }
  if (seq.symbols.empty()) {
    throw Error("canto " + std::to_string(canto.global_index) + " has no alphabetic characters");
  }
  return seq;
}

std::vector<TrigramOccurrence> TrigramScan(const SymbolSequence& seq,
                                           const TrigramScanOptions& options) {
  std::vector<TrigramOccurrence> out;
  if (seq.size() < 3) return out;
  out.reserve(seq.size() - 2);
  for (size_t i = 0; i + 2 < seq.size(); ++i) {
    if (!options.cross_verses && seq.verses[i] != seq.verses[i + 2]) continue;
    TrigramOccurrence occ;
    VcPattern p = 0;
    for (size_t k = 0; k < 3; ++k) {
      p = static_cast<VcPattern>((p << 1) | static_cast<uint8_t>(seq.symbols[i + k]));
      occ.letters += text::Encode(text::ToLower(seq.chars[i + k]));
    }
    occ.pattern = p;
    occ.vc_class = ClassOf(p);
    occ.canto = seq.canto;
    occ.position = static_cast<int>(i);
    occ.single_word =
        seq.token_ids[i] == seq.token_ids[i + 1] && seq.token_ids[i + 1] == seq.token_ids[i + 2];
    out.push_back(std::move(occ));
  }
  return out;
}

void WriteSymbolCsv(std::ostream& out, const std::vector<SymbolSequence>& seqs) {
  CsvWriter csv(out);
  csv.Row({"canto", "length", "symbols"});
  for (const SymbolSequence& s : seqs) {
    csv << s.canto << static_cast<unsigned long>(s.size()) << s.SymbolString();
    csv.EndRow();
  }
}

void WriteTrigramCsv(std::ostream& out, const std::vector<TrigramOccurrence>& occurrences) {
  CsvWriter csv(out);
  csv.Row({"canto", "position", "letters", "vc_pattern", "class", "single_word"});
  for (const TrigramOccurrence& o : occurrences) {
    csv << o.canto << o.position << o.letters << PatternName(o.pattern) << ClassName(o.vc_class)
        << o.single_word;
    csv.EndRow();
  }
}

}  // namespace graphemic
