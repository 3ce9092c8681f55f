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

#include "graphemic/text.h"

namespace graphemic::text {

std::u32string Decode(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  size_t i = 0;
  while (i < utf8.size()) {
    unsigned char lead = static_cast<unsigned char>(utf8[i]);
    char32_t ch;
    int extra;
    if (lead < 0x80) {
      ch = lead;
      extra = 0;
    } else if ((lead & 0xE0) == 0xC0) {
      ch = lead & 0x1F;
      extra = 1;
    } else if ((lead & 0xF0) == 0xE0) {
      ch = lead & 0x0F;
      extra = 2;
    } else if ((lead & 0xF8) == 0xF0) {
      ch = lead & 0x07;
      extra = 3;
    } else {
      throw Error("invalid UTF-8 lead byte at offset " + std::to_string(i));
    }
    if (i + extra >= utf8.size() && extra > 0) {
      throw Error("truncated UTF-8 sequence at offset " + std::to_string(i));
    }
    for (int k = 1; k <= extra; ++k) {
      unsigned char cont = static_cast<unsigned char>(utf8[i + k]);
      if ((cont & 0xC0) != 0x80) {
        throw Error("invalid UTF-8 continuation byte at offset " +
                    std::to_string(i + k));
      }
      ch = (ch << 6) | (cont & 0x3F);
    }
    static constexpr char32_t kMin[] = {0, 0x80, 0x800, 0x10000};
    if (ch < kMin[extra] || ch > 0x10FFFF || (ch >= 0xD800 && ch <= 0xDFFF)) {
      throw Error("invalid UTF-8 scalar at offset " + std::to_string(i));
    }
    out.push_back(ch);
    i += extra + 1;
  }
  return out;
}

std::string Encode(char32_t ch) {
  std::string out;
  if (ch < 0x80) {
    out.push_back(static_cast<char>(ch));
  } else if (ch < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (ch >> 6)));
    out.push_back(static_cast<char>(0x80 | (ch & 0x3F)));
  } else if (ch < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (ch >> 12)));
    out.push_back(static_cast<char>(0x80 | ((ch >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (ch & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (ch >> 18)));
    out.push_back(static_cast<char>(0x80 | ((ch >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((ch >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (ch & 0x3F)));
  }
  return out;
}

std::string Encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t ch : text) out += Encode(ch);
  return out;
}

bool IsAlpha(char32_t ch) {
  if ((ch >= U'a' && ch <= U'z') || (ch >= U'A' && ch <= U'Z')) return true;
  // Latin-1 letters, minus the multiplication and division signs.
  if (ch >= 0xC0 && ch <= 0xFF) return ch != 0xD7 && ch != 0xF7;
  // Latin Extended-A.
  return ch >= 0x100 && ch <= 0x17F;
}

char32_t ToLower(char32_t ch) {
  if (ch >= U'A' && ch <= U'Z') return ch + 32;
  if (ch >= 0xC0 && ch <= 0xDE && ch != 0xD7) return ch + 32;
  if (ch >= 0x100 && ch <= 0x17F) {
    // Extended-A pairs are even/odd except in the 0x139-0x148 and
    // 0x179-0x17E runs, which are odd/even. U+0130, U+0131, U+0138, U+0149
    // and U+017F have no simple pair.
    if (ch == 0x130 || ch == 0x131 || ch == 0x138 || ch == 0x149 ||
        ch == 0x17F) {
      return ch;
    }
    bool odd_upper = (ch >= 0x139 && ch <= 0x148) || (ch >= 0x179 && ch <= 0x17E);
    if (odd_upper) return (ch & 1) ? ch + 1 : ch;
    if (ch == 0x178) return 0xFF;
    return (ch & 1) ? ch : ch + 1;
  }
  return ch;
}

std::u32string ToLower(std::u32string_view text) {
  std::u32string out(text);
  for (char32_t& ch : out) ch = ToLower(ch);
  return out;
}

size_t Length(std::string_view utf8) {
  size_t n = 0;
  for (char c : utf8) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

}  // namespace graphemic::text
