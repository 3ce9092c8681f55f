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

#ifndef GRAPHEMIC_CSV_H_
#define GRAPHEMIC_CSV_H_

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace graphemic {

// Writes RFC 4180 rows: fields containing a comma, quote, CR or LF are
// quoted and embedded quotes doubled; lines end with CRLF.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  CsvWriter& operator<<(std::string_view field);
  CsvWriter& operator<<(const std::string& field) { return *this << std::string_view(field); }
  CsvWriter& operator<<(const char* field) { return *this << std::string_view(field); }
  CsvWriter& operator<<(double value);
  CsvWriter& operator<<(int value);
  CsvWriter& operator<<(long value);
  CsvWriter& operator<<(long long value);
  CsvWriter& operator<<(unsigned long value);
  CsvWriter& operator<<(bool value);

  void EndRow();
  void Row(std::initializer_list<std::string_view> fields);

 private:
  void Separator();

  std::ostream& out_;
  bool row_started_ = false;
};

// Shortest round-trip representation; "nan"/"inf" spelled out.
std::string FormatDouble(double value);

// Parses RFC 4180 text into rows of fields.
std::vector<std::vector<std::string>> ParseCsv(std::string_view text);

}  // namespace graphemic

#endif  // GRAPHEMIC_CSV_H_
