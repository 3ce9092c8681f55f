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

// End-to-end orchestration with content-addressed stage caching.
//
// Every stage has a key: the SHA-256 of its upstream key, the bytes of the
// input files it reads and its own configuration section. The manifest in
// the output directory records the key and the output file digests of each
// stage; a stage whose key and outputs still match is not recomputed.
// Tokens, symbol sequences and classifier results are persisted under
// cache/ so downstream stages can start from them.

#ifndef GRAPHEMIC_PIPELINE_H_
#define GRAPHEMIC_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "graphemic/anchors.h"
#include "graphemic/classify.h"
#include "graphemic/corpus.h"
#include "graphemic/markov.h"
#include "graphemic/probes.h"
#include "graphemic/stats.h"
#include "graphemic/tokenizer.h"
#include "graphemic/vc_encoder.h"
#include "json.hpp"

namespace graphemic {

inline constexpr const char* kVersion = "1.0.0";

// A required input file is missing. The CLI maps this to exit status 2.
class MissingInputError : public Error {
 public:
  explicit MissingInputError(const std::filesystem::path& path)
      : Error("input not found: " + path.string()), path_(path) {}
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct RunConfig {
  std::filesystem::path corpus;
  std::optional<std::filesystem::path> patches;
  std::optional<std::filesystem::path> rules;
  std::optional<std::filesystem::path> stopwords;
  std::optional<std::filesystem::path> char_table;
  std::filesystem::path output_dir = "graphemic-out";
  std::string profile = "commedia";

  StopwordParams stopword_params;
  Rescale rescale;
  bool cross_verses = true;
  ProbeParams probes;
  int context_window = 2;
  int context_examples = 5;
  ValidationParams validation;
  int top_terms = 30;

  // Relative paths in `json` are resolved against `base_dir`.
  static RunConfig FromJson(const nlohmann::json& json, const std::filesystem::path& base_dir);
  static RunConfig Load(const std::filesystem::path& path);
  nlohmann::json ToJson() const;

  // Settings that change results: no paths, no thread count.
  nlohmann::json ResultJson() const;

  // Throws MissingInputError for a missing file and Error for bad values.
  void Validate() const;
};

enum class Stage { kIngest, kTokenize, kEncode, kMarkov, kTrends, kProbes, kClassify, kAnchors };

std::string_view StageName(Stage stage);
std::optional<Stage> StageFromName(std::string_view name);
const std::vector<Stage>& AllStages();

struct CantoMarkov {
  int canto = 0;
  std::string cantica;
  int canto_number = 0;
  long symbols = 0;
  long vowels = 0;
  TwoStateModel two_state;
  FourStateModel four_state;
  DependencyIndex index;
};

struct TrendLine {
  stats::TestResult ols;
  stats::TestResult spearman;
};

struct GroupComparison {
  stats::TestResult kruskal_wallis;
  std::vector<stats::DunnComparison> dunn;
};

struct SensitivityRow {
  std::string target;  // "md" or "md_simple"
  std::string focal;
  std::vector<std::string> controls;
  stats::TestResult result;
};

struct TrendReport {
  double char_mean = 0.0;
  double char_sd = 0.0;  // sample sd
  TrendLine apostrophe_rate;
  TrendLine mean_token_length;
  stats::TestResult apostrophe_vs_length;  // Spearman
  TrendLine md_simple;
  TrendLine md;
  // Keyed by variable: p1, p0, p_vv, p_vc, p_cv, q00, md_simple, md.
  std::map<std::string, GroupComparison> by_cantica;
  std::vector<SensitivityRow> sensitivity;

  nlohmann::json ToJson(const std::vector<std::string>& groups) const;
};

struct ProbeReport {
  ClassTrends class_trends;
  std::vector<ProbeRecord> records;  // tested trigrams
  std::map<VcClass, ClassSwAggregate> class_sw;
};

struct ClassificationResult {
  ValidationReport validation;
  TuningResult full_tuning;
  std::vector<std::string> classes;
  std::vector<std::vector<RankedTerm>> top_terms;
  std::optional<Progression> progression;
  bool full_fit_converged = true;
};

struct AnchorReport {
  std::vector<AnchorRecord> records;
  double anchored_sw_pct = 0.0;  // pooled over distinct anchored probes
  double retained_sw_pct = 0.0;  // pooled over all retained probes
  double anchored_mean_sw_pct = 0.0;  // unweighted mean over probes
  double retained_mean_sw_pct = 0.0;
};

class Pipeline {
 public:
  // `log` receives one line per stage ("tokenize: cached", ...).
  explicit Pipeline(RunConfig config, std::function<void(const std::string&)> log = {});

  void Run(Stage stage);
  void RunAll();

  const CorpusDocument& Corpus();
  const std::vector<TokenizedCanto>& Tokens();
  const StopwordList& Stopwords();
  const std::vector<CantoTokenStats>& TokenStatistics();
  const std::vector<SymbolSequence>& Symbols();
  const std::vector<CantoMarkov>& Markov();
  const TrendReport& Trends();
  const ProbeReport& Probes();
  const ClassificationResult& Classification();
  const AnchorReport& Anchors();
  const LabeledBags& Bags();

  const RunConfig& config() const { return config_; }

 private:
  struct StageRecord {
    std::string key;
    std::map<std::string, std::string> files;  // relative path -> sha256
  };

  std::string Key(Stage stage);
  bool IsCached(Stage stage);
  void Record(Stage stage, const std::vector<std::string>& files);
  void LoadManifest();
  void SaveManifest() const;
  void Note(Stage stage, const std::string& status);
  std::filesystem::path Out(const std::string& relative) const;
  template <typename Fn>
  void Guard(Stage stage, Fn&& fn);

  void WriteMarkovOutputs();
  void WriteTrendOutputs();
  void WriteProbeOutputs();
  void WriteAnchorOutputs();

  RunConfig config_;
  std::function<void(const std::string&)> log_;
  std::map<std::string, StageRecord> manifest_;
  std::map<Stage, std::string> keys_;

  std::optional<CorpusDocument> corpus_;
  std::optional<std::vector<TokenizedCanto>> tokens_;
  std::optional<StopwordList> stopwords_;
  std::optional<std::vector<CantoTokenStats>> token_stats_;
  std::optional<std::vector<SymbolSequence>> symbols_;
  std::optional<std::vector<CantoMarkov>> markov_;
  std::optional<TrendReport> trends_;
  std::optional<ProbeReport> probes_;
  std::optional<ClassificationResult> classification_;
  std::optional<AnchorReport> anchors_;
  std::optional<LabeledBags> bags_;
};

// Hex SHA-256 of a byte string / file.
std::string Sha256Hex(std::string_view bytes);
std::string Sha256File(const std::filesystem::path& path);

}  // namespace graphemic

#endif  // GRAPHEMIC_PIPELINE_H_
