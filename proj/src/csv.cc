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

#include "graphemic/csv.h"

#include <cmath>

#include <fmt/format.h>

namespace graphemic {

std::string FormatDouble(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return fmt::format("{}", value);
}

void CsvWriter::Separator() {
  if (row_started_) out_ << ',';
  row_started_ = true;
}

CsvWriter& CsvWriter::operator<<(std::string_view field) {
  Separator();
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    out_ << field;
    return *this;
  }
  out_ << '"';
  for (char c : field) {
    if (c == '"') out_ << '"';
    out_ << c;
  }
  out_ << '"';
  return *this;
}

CsvWriter& CsvWriter::operator<<(double value) { return *this << FormatDouble(value); }
CsvWriter& CsvWriter::operator<<(int value) { return *this << std::to_string(value); }
CsvWriter& CsvWriter::operator<<(long value) { return *this << std::to_string(value); }
CsvWriter& CsvWriter::operator<<(long long value) { return *this << std::to_string(value); }
CsvWriter& CsvWriter::operator<<(unsigned long value) { return *this << std::to_string(value); }
CsvWriter& CsvWriter::operator<<(bool value) {
  return *this << std::string_view(value ? "true" : "false");
}

void CsvWriter::EndRow() {
  out_ << "\r\n";
  row_started_ = false;
}

void CsvWriter::Row(std::initializer_list<std::string_view> fields) {
  for (std::string_view f : fields) *this << f;
  EndRow();
}

std::vector<std::vector<std::string>> ParseCsv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_open = false;
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        field_open = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        field_open = true;
        break;
      case '\r':
        break;
      case '\n':
        row.push_back(std::move(field));
        field.clear();
        rows.push_back(std::move(row));
        row.clear();
        field_open = false;
        break;
      default:
        field += c;
        field_open = true;
    }
  }
  if (field_open || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace graphemic
