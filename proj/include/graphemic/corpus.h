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

#ifndef GRAPHEMIC_CORPUS_H_
#define GRAPHEMIC_CORPUS_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "graphemic/text.h"
#include "json.hpp"

namespace graphemic {

class SchemaError : public Error {
 public:
  using Error::Error;
};

class ProfileError : public Error {
 public:
  using Error::Error;
};

class PatchError : public Error {
 public:
  using Error::Error;
};

struct Canto {
  std::string cantica_name;
  int canto_number = 0;
  int global_index = 0;
  // Raw verse text, UTF-8, punctuation and apostrophes untouched.
  std::vector<std::string> verses;
};

struct Cantica {
  std::string name;
  std::vector<Canto> cantos;
};

struct Patch {
  std::string cantica;
  int canto = 0;  // 1-based
  int verse = 0;  // 1-based
  std::string match;
  std::string replacement;
  std::string note;
};

using PatchSet = std::vector<Patch>;

// Expected shape of a corpus. An empty `canto_counts` accepts any number of
// cantos; `verse_total` is only checked when set.
struct CorpusProfile {
  std::string name;
  std::vector<std::string> cantica_names;
  std::vector<int> canto_counts;
  std::optional<int> verse_total;

  static CorpusProfile Commedia();
  // Accepts any non-empty document.
  static CorpusProfile Generic();
  static CorpusProfile FromName(const std::string& name);
};

class CorpusDocument {
 public:
  CorpusDocument() = default;
  CorpusDocument(std::string source_id, std::vector<Cantica> cantiche);

  const std::string& source_id() const { return source_id_; }
  const std::vector<Cantica>& cantiche() const { return cantiche_; }
  const std::vector<std::string>& patch_log() const { return patch_log_; }

  size_t canto_count() const;
  size_t verse_count() const;

  // Cantos in global_index order.
  std::vector<const Canto*> Cantos() const;
  const Canto& CantoAt(int global_index) const;

  // Cantica position (0-based) for every canto in reading order.
  std::vector<int> CanticaLabels() const;

  // Checks the structural invariants and the profile. Throws SchemaError or
  // ProfileError.
  void Validate(const CorpusProfile& profile) const;

  nlohmann::json ToJson() const;
  static CorpusDocument FromJson(const nlohmann::json& json);

 private:
  friend CorpusDocument ApplyPatches(const CorpusDocument&, const PatchSet&);

  void AssignGlobalIndices();

  std::string source_id_;
  std::vector<Cantica> cantiche_;
  std::vector<std::string> patch_log_;
};

// Reads and validates a corpus file. The canonical layout is
//   {"source_id": "...", "cantiche": [{"name": "...",
//     "cantos": [{"number": 1, "verses": ["...", ...]}, ...]}, ...]}
// A bare top-level array of cantiche is accepted as well.
CorpusDocument LoadCorpus(const std::filesystem::path& path,
                          const CorpusProfile& profile);

void SaveCorpus(const CorpusDocument& doc, const std::filesystem::path& path);

PatchSet LoadPatches(const std::filesystem::path& path);
PatchSet PatchesFromJson(const nlohmann::json& json);

// Applies every patch exactly once, in order. A patch whose match string
// occurs zero times or more than once in its verse raises PatchError.
CorpusDocument ApplyPatches(const CorpusDocument& doc, const PatchSet& patches);

// Cantos in reading order. Same as doc.Cantos(); kept as a free function to
// mirror the other pipeline stages.
std::vector<const Canto*> IterCantos(const CorpusDocument& doc);

}  // namespace graphemic

#endif  // GRAPHEMIC_CORPUS_H_
