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

#ifndef GRAPHEMIC_TEXT_H_
#define GRAPHEMIC_TEXT_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace graphemic {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unicode helpers. All character offsets in the library are counted in
// Unicode scalar values, so text is decoded to UTF-32 before it is scanned.
namespace text {

// Decodes UTF-8. Throws Error on malformed input.
std::u32string Decode(std::string_view utf8);

std::string Encode(std::u32string_view text);
std::string Encode(char32_t ch);

// Alphabetic test covering ASCII, Latin-1 and Latin Extended-A letters.
// Everything else (digits, punctuation, quotes, dashes, spaces) is a
// separator.
bool IsAlpha(char32_t ch);

// Lowercase mapping for the same letter ranges as IsAlpha.
char32_t ToLower(char32_t ch);
std::u32string ToLower(std::u32string_view text);

// U+0027 APOSTROPHE and U+2019 RIGHT SINGLE QUOTATION MARK.
inline bool IsApostrophe(char32_t ch) { return ch == U'\'' || ch == U'’'; }

// Number of scalar values in a UTF-8 string.
size_t Length(std::string_view utf8);

}  // namespace text
}  // namespace graphemic

#endif  // GRAPHEMIC_TEXT_H_
