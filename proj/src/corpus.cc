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

#include "graphemic/corpus.h"

#include <fstream>
#include <sstream>

namespace graphemic {

using nlohmann::json;

CorpusProfile CorpusProfile::Commedia() {
  return {"commedia", {"Inferno", "Purgatorio", "Paradiso"}, {34, 33, 33}, 14233};
}

CorpusProfile CorpusProfile::Generic() { return {"generic", {}, {}, std::nullopt}; }

CorpusProfile CorpusProfile::FromName(const std::string& name) {
  if (name == "commedia") return Commedia();
  if (name == "generic") return Generic();
  throw Error("unknown corpus profile '" + name + "' (expected commedia or generic)");
}

CorpusDocument::CorpusDocument(std::string source_id, std::vector<Cantica> cantiche)
    : source_id_(std::move(source_id)), cantiche_(std::move(cantiche)) {
  AssignGlobalIndices();
}

void CorpusDocument::AssignGlobalIndices() {
  int global = 0;
  for (Cantica& cantica : cantiche_) {
    for (Canto& canto : cantica.cantos) {
      canto.cantica_name = cantica.name;
      canto.global_index = ++global;
    }
  }
}

size_t CorpusDocument::canto_count() const {
  size_t n = 0;
  for (const Cantica& c : cantiche_) n += c.cantos.size();
  return n;
}

size_t CorpusDocument::verse_count() const {
  size_t n = 0;
  for (const Cantica& c : cantiche_) {
    for (const Canto& canto : c.cantos) n += canto.verses.size();
  }
  return n;
}

std::vector<const Canto*> CorpusDocument::Cantos() const {
  std::vector<const Canto*> out;
  out.reserve(canto_count());
  for (const Cantica& c : cantiche_) {
    for (const Canto& canto : c.cantos) out.push_back(&canto);
  }
  return out;
}

const Canto& CorpusDocument::CantoAt(int global_index) const {
  for (const Cantica& c : cantiche_) {
    for (const Canto& canto : c.cantos) {
      if (canto.global_index == global_index) return canto;
    }
  }
  throw Error("no canto with global index " + std::to_string(global_index));
}

std::vector<int> CorpusDocument::CanticaLabels() const {
  std::vector<int> labels;
  for (size_t i = 0; i < cantiche_.size(); ++i) {
    labels.insert(labels.end(), cantiche_[i].cantos.size(), static_cast<int>(i));
  }
  return labels;
}

void CorpusDocument::Validate(const CorpusProfile& profile) const {
  if (cantiche_.empty()) throw SchemaError("cantiche: list is empty");
  int expected_global = 0;
  for (size_t i = 0; i < cantiche_.size(); ++i) {
    const Cantica& cantica = cantiche_[i];
    std::string where = "cantiche[" + std::to_string(i) + "]";
    if (cantica.name.empty()) throw SchemaError(where + ".name: empty");
    if (cantica.cantos.empty()) throw SchemaError(where + " (" + cantica.name + "): no cantos");
    for (size_t j = 0; j < cantica.cantos.size(); ++j) {
      const Canto& canto = cantica.cantos[j];
      std::string cwhere = where + " (" + cantica.name + ").cantos[" + std::to_string(j) + "]";
      if (canto.canto_number != static_cast<int>(j) + 1) {
        throw SchemaError(cwhere + ": canto number " + std::to_string(canto.canto_number) +
                          " out of sequence, expected " + std::to_string(j + 1));
      }
      if (canto.verses.empty()) throw SchemaError(cwhere + ": no verses");
      if (canto.global_index != ++expected_global) {
        throw SchemaError(cwhere + ": global index not in reading order");
      }
    }
  }

  if (!profile.cantica_names.empty()) {
    if (cantiche_.size() != profile.cantica_names.size()) {
      throw ProfileError("profile " + profile.name + ": expected " +
                         std::to_string(profile.cantica_names.size()) + " cantiche, found " +
                         std::to_string(cantiche_.size()));
    }
    for (size_t i = 0; i < cantiche_.size(); ++i) {
      if (cantiche_[i].name != profile.cantica_names[i]) {
        throw ProfileError("profile " + profile.name + ": cantica " + std::to_string(i + 1) +
                           " expected '" + profile.cantica_names[i] + "', found '" +
                           cantiche_[i].name + "'");
      }
    }
  }
  for (size_t i = 0; i < profile.canto_counts.size() && i < cantiche_.size(); ++i) {
    int found = static_cast<int>(cantiche_[i].cantos.size());
    if (found != profile.canto_counts[i]) {
      throw ProfileError("profile " + profile.name + ": " + cantiche_[i].name + " expected " +
                         std::to_string(profile.canto_counts[i]) + " cantos, found " +
                         std::to_string(found));
    }
  }
  if (profile.verse_total && static_cast<int>(verse_count()) != *profile.verse_total) {
    throw ProfileError("profile " + profile.name + ": expected " +
                       std::to_string(*profile.verse_total) + " verses, found " +
                       std::to_string(verse_count()));
  }
}

json CorpusDocument::ToJson() const {
  json cantiche = json::array();
  for (const Cantica& cantica : cantiche_) {
    json cantos = json::array();
    for (const Canto& canto : cantica.cantos) {
      cantos.push_back({{"number", canto.canto_number}, {"verses", canto.verses}});
    }
    cantiche.push_back({{"name", cantica.name}, {"cantos", std::move(cantos)}});
  }
  return {{"source_id", source_id_}, {"cantiche", std::move(cantiche)}, {"patch_log", patch_log_}};
}

namespace {

const json& Field(const json& node, const char* key, const std::string& where) {
  if (!node.is_object()) throw SchemaError(where + ": expected object");
  auto it = node.find(key);
  if (it == node.end()) throw SchemaError(where + ": missing field '" + key + "'");
  return *it;
}

}  // namespace

CorpusDocument CorpusDocument::FromJson(const json& root) {
  const json* cantiche_node = &root;
  std::string source_id;
  std::vector<std::string> patch_log;
  if (root.is_object()) {
    cantiche_node = &Field(root, "cantiche", "$");
    if (auto it = root.find("source_id"); it != root.end()) {
      if (!it->is_string()) throw SchemaError("$.source_id: expected string");
      source_id = it->get<std::string>();
    }
    if (auto it = root.find("patch_log"); it != root.end()) {
      if (!it->is_array()) throw SchemaError("$.patch_log: expected array");
      for (const json& entry : *it) {
        if (!entry.is_string()) throw SchemaError("$.patch_log: expected strings");
        patch_log.push_back(entry.get<std::string>());
      }
    }
  }
  if (!cantiche_node->is_array()) throw SchemaError("cantiche: expected array");

  std::vector<Cantica> cantiche;
  for (size_t i = 0; i < cantiche_node->size(); ++i) {
    const json& cnode = (*cantiche_node)[i];
    std::string where = "cantiche[" + std::to_string(i) + "]";
    const json& name = Field(cnode, "name", where);
    if (!name.is_string()) throw SchemaError(where + ".name: expected string");
    const json& cantos = Field(cnode, "cantos", where);
    if (!cantos.is_array()) throw SchemaError(where + ".cantos: expected array");
    Cantica cantica;
    cantica.name = name.get<std::string>();
    for (size_t j = 0; j < cantos.size(); ++j) {
      std::string cwhere = where + ".cantos[" + std::to_string(j) + "]";
      const json& number = Field(cantos[j], "number", cwhere);
      if (!number.is_number_integer()) throw SchemaError(cwhere + ".number: expected integer");
      const json& verses = Field(cantos[j], "verses", cwhere);
      if (!verses.is_array()) throw SchemaError(cwhere + ".verses: expected array");
      Canto canto;
      canto.canto_number = number.get<int>();
      for (size_t k = 0; k < verses.size(); ++k) {
        if (!verses[k].is_string()) {
          throw SchemaError(cwhere + ".verses[" + std::to_string(k) + "]: expected string");
        }
        canto.verses.push_back(verses[k].get<std::string>());
        // Rejects malformed UTF-8 up front.
        try {
          text::Decode(canto.verses.back());
        } catch (const Error& e) {
          throw SchemaError(cwhere + ".verses[" + std::to_string(k) + "]: " + e.what());
        }
      }
      cantica.cantos.push_back(std::move(canto));
    }
    cantiche.push_back(std::move(cantica));
  }
  CorpusDocument doc(std::move(source_id), std::move(cantiche));
  doc.patch_log_ = std::move(patch_log);
  return doc;
}

namespace {

json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

size_t CountOccurrences(std::string_view haystack, std::string_view needle, size_t* first) {
  size_t count = 0;
  for (size_t pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + 1)) {
    if (count == 0) *first = pos;
    ++count;
  }
  return count;
}

std::string Describe(const Patch& p) {
  std::ostringstream out;
  out << p.cantica << " " << p.canto << ":" << p.verse << " \"" << p.match << "\" -> \""
      << p.replacement << "\"";
  if (!p.note.empty()) out << " (" << p.note << ")";
  return out.str();
}

}  // namespace

CorpusDocument LoadCorpus(const std::filesystem::path& path, const CorpusProfile& profile) {
  CorpusDocument doc = CorpusDocument::FromJson(ReadJsonFile(path));
  doc.Validate(profile);
  return doc;
}

void SaveCorpus(const CorpusDocument& doc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.ToJson().dump(1) << "\n";
}

PatchSet PatchesFromJson(const json& root) {
  if (!root.is_array()) throw SchemaError("patches: expected array");
  PatchSet patches;
  for (size_t i = 0; i < root.size(); ++i) {
    std::string where = "patches[" + std::to_string(i) + "]";
    const json& node = root[i];
    Patch p;
    try {
      p.cantica = Field(node, "cantica", where).get<std::string>();
      p.canto = Field(node, "canto", where).get<int>();
      p.verse = Field(node, "verse", where).get<int>();
      p.match = Field(node, "match", where).get<std::string>();
      p.replacement = Field(node, "replacement", where).get<std::string>();
      p.note = node.value("note", "");
    } catch (const json::type_error& e) {
      throw SchemaError(where + ": " + e.what());
    }
    if (p.match.empty()) throw SchemaError(where + ".match: empty");
    patches.push_back(std::move(p));
  }
  return patches;
}

PatchSet LoadPatches(const std::filesystem::path& path) {
  return PatchesFromJson(ReadJsonFile(path));
}

CorpusDocument ApplyPatches(const CorpusDocument& doc, const PatchSet& patches) {
  CorpusDocument out = doc;
  for (const Patch& patch : patches) {
    Cantica* cantica = nullptr;
    for (Cantica& c : out.cantiche_) {
      if (c.name == patch.cantica) cantica = &c;
    }
    if (cantica == nullptr) throw PatchError("patch " + Describe(patch) + ": unknown cantica");
    if (patch.canto < 1 || patch.canto > static_cast<int>(cantica->cantos.size())) {
      throw PatchError("patch " + Describe(patch) + ": canto out of range");
    }
    Canto& canto = cantica->cantos[patch.canto - 1];
    if (patch.verse < 1 || patch.verse > static_cast<int>(canto.verses.size())) {
      throw PatchError("patch " + Describe(patch) + ": verse out of range");
    }
    std::string& verse = canto.verses[patch.verse - 1];
    size_t pos = 0;
    size_t count = CountOccurrences(verse, patch.match, &pos);
    if (count != 1) {
      throw PatchError("patch " + Describe(patch) + ": match found " + std::to_string(count) +
                       " times, expected exactly once");
    }
    verse.replace(pos, patch.match.size(), patch.replacement);
    out.patch_log_.push_back(Describe(patch));
  }
  return out;
}

std::vector<const Canto*> IterCantos(const CorpusDocument& doc) { return doc.Cantos(); }

}  // namespace graphemic
