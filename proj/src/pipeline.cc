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

#include "graphemic/pipeline.h"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "graphemic/csv.h"

namespace graphemic {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFile(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("write failed for " + path.string());
}

void CheckKeys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw Error(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.count(key)) throw Error(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void Get(const json& obj, const char* key, T* out) {
  if (obj.contains(key)) *out = obj.at(key).get<T>();
}

json TestJson(const stats::TestResult& r) {
  json j = {{"statistic", r.statistic}, {"p_value", r.p_value}, {"n", r.n}};
  j["effect"] = r.effect ? json(*r.effect) : json(nullptr);
  return j;
}

stats::TestResult TestFromJson(const json& j) {
  stats::TestResult r;
  r.statistic = j.at("statistic").is_null() ? kNaN : j.at("statistic").get<double>();
  r.p_value = j.at("p_value").is_null() ? kNaN : j.at("p_value").get<double>();
  r.n = j.at("n").get<int>();
  if (!j.at("effect").is_null()) r.effect = j.at("effect").get<double>();
  return r;
}

json MetricsJson(const Metrics& m) {
  return {{"accuracy", m.accuracy},
          {"balanced_accuracy", m.balanced_accuracy},
          {"macro_f1", m.macro_f1},
          {"mcc", m.mcc}};
}

Metrics MetricsFromJson(const json& j) {
  Metrics m;
  m.accuracy = j.at("accuracy").get<double>();
  m.balanced_accuracy = j.at("balanced_accuracy").get<double>();
  m.macro_f1 = j.at("macro_f1").get<double>();
  m.mcc = j.at("mcc").get<double>();
  return m;
}

json MatrixJson(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd MatrixFromJson(const json& j) {
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

ApostropheCategory CategoryFromName(const std::string& name) {
  for (int c = 0; c <= static_cast<int>(ApostropheCategory::kIsolated); ++c) {
    const auto cat = static_cast<ApostropheCategory>(c);
    if (CategoryName(cat) == name) return cat;
  }
  throw Error("unknown apostrophe category '" + name + "'");
}

json TokensToJson(const std::vector<TokenizedCanto>& corpus) {
  json cantos = json::array();
  for (const TokenizedCanto& tc : corpus) {
    json events = json::array();
    for (const ApostropheEvent& e : tc.events) {
      events.push_back({e.verse, e.char_offset, e.left, e.right, CategoryName(e.category)});
    }
    json tokens = json::array();
    for (const Token& t : tc.tokens) {
      json labels = json::array();
      for (ApostropheCategory c : t.labels) labels.push_back(CategoryName(c));
      tokens.push_back({t.surface, t.verse, t.length, t.span.start, t.span.end, t.raw_span.start,
                        t.raw_span.end, t.has_apostrophe, labels});
    }
    cantos.push_back({{"canto", tc.canto}, {"events", events}, {"tokens", tokens}});
  }
  return {{"cantos", cantos}};
}

std::vector<TokenizedCanto> TokensFromJson(const json& root) {
  std::vector<TokenizedCanto> out;
  for (const json& c : root.at("cantos")) {
    TokenizedCanto tc;
    tc.canto = c.at("canto").get<int>();
    for (const json& e : c.at("events")) {
      ApostropheEvent ev;
      ev.canto = tc.canto;
      ev.verse = e[0].get<int>();
      ev.char_offset = e[1].get<int>();
      ev.left = e[2].get<std::string>();
      ev.right = e[3].get<std::string>();
      ev.category = CategoryFromName(e[4].get<std::string>());
      tc.events.push_back(std::move(ev));
    }
    for (const json& t : c.at("tokens")) {
      Token tok;
      tok.canto = tc.canto;
      tok.surface = t[0].get<std::string>();
      tok.verse = t[1].get<int>();
      tok.length = t[2].get<int>();
      tok.span = {t[3].get<int>(), t[4].get<int>()};
      tok.raw_span = {t[5].get<int>(), t[6].get<int>()};
      tok.has_apostrophe = t[7].get<bool>();
      for (const json& l : t[8]) tok.labels.push_back(CategoryFromName(l.get<std::string>()));
      tc.tokens.push_back(std::move(tok));
    }
    out.push_back(std::move(tc));
  }
  return out;
}

json SymbolsToJson(const std::vector<SymbolSequence>& seqs) {
  json out = json::array();
  for (const SymbolSequence& s : seqs) {
    out.push_back({{"canto", s.canto},
                   {"symbols", s.SymbolString()},
                   {"chars", text::Encode(s.chars)},
                   {"token_ids", s.token_ids},
                   {"verses", s.verses}});
  }
  return out;
}

std::vector<SymbolSequence> SymbolsFromJson(const json& root) {
  std::vector<SymbolSequence> out;
  for (const json& j : root) {
    SymbolSequence s;
    s.canto = j.at("canto").get<int>();
    for (char c : j.at("symbols").get<std::string>()) {
      s.symbols.push_back(c == 'V' ? Symbol::kVowel : Symbol::kConsonant);
    }
    s.chars = text::Decode(j.at("chars").get<std::string>());
    s.token_ids = j.at("token_ids").get<std::vector<int>>();
    s.verses = j.at("verses").get<std::vector<int>>();
    if (s.chars.size() != s.symbols.size() || s.token_ids.size() != s.symbols.size() ||
        s.verses.size() != s.symbols.size()) {
      throw Error("cached symbol sequence for canto " + std::to_string(s.canto) + " is corrupt");
    }
    out.push_back(std::move(s));
  }
  return out;
}

json ClassificationToJson(const ClassificationResult& r) {
  json runs = json::array();
  for (const RunOutcome& o : r.validation.runs) {
    runs.push_back({{"metrics", MetricsJson(o.metrics)},
                    {"lambda", o.tuning.lambda},
                    {"alpha", o.tuning.alpha},
                    {"cv_accuracy", o.tuning.cv_accuracy},
                    {"converged", o.converged},
                    {"confusion", MatrixJson(o.confusion)}});
  }
  json terms = json::array();
  for (const auto& list : r.top_terms) {
    json cls = json::array();
    for (const RankedTerm& t : list) cls.push_back({t.term, t.coefficient});
    terms.push_back(cls);
  }
  json j = {{"classes", r.classes},
            {"runs", runs},
            {"mean", MetricsJson(r.validation.mean)},
            {"sd", MetricsJson(r.validation.sd)},
            {"pooled_confusion", MatrixJson(r.validation.pooled_confusion)},
            {"nonconverged_fits", r.validation.nonconverged_fits},
            {"full_fit", {{"lambda", r.full_tuning.lambda},
                          {"alpha", r.full_tuning.alpha},
                          {"cv_accuracy", r.full_tuning.cv_accuracy},
                          {"converged", r.full_fit_converged}}},
            {"top_terms", terms}};
  if (r.progression) {
    json points = json::array();
    for (const ProgressionPoint& p : r.progression->points) points.push_back({p.canto_number, p.diff});
    j["progression"] = {{"points", points},
                        {"ols", TestJson(r.progression->ols)},
                        {"spearman", TestJson(r.progression->spearman)}};
  } else {
    j["progression"] = nullptr;
  }
  return j;
}

ClassificationResult ClassificationFromJson(const json& j) {
  ClassificationResult r;
  r.classes = j.at("classes").get<std::vector<std::string>>();
  r.validation.classes = r.classes;
  for (const json& o : j.at("runs")) {
    RunOutcome run;
    run.metrics = MetricsFromJson(o.at("metrics"));
    run.tuning.lambda = o.at("lambda").get<double>();
    run.tuning.alpha = o.at("alpha").get<double>();
    run.tuning.cv_accuracy = o.at("cv_accuracy").get<double>();
    run.converged = o.at("converged").get<bool>();
    run.confusion = MatrixFromJson(o.at("confusion"));
    r.validation.runs.push_back(std::move(run));
  }
  r.validation.mean = MetricsFromJson(j.at("mean"));
  r.validation.sd = MetricsFromJson(j.at("sd"));
  r.validation.pooled_confusion = MatrixFromJson(j.at("pooled_confusion"));
  r.validation.nonconverged_fits = j.at("nonconverged_fits").get<int>();
  const json& full = j.at("full_fit");
  r.full_tuning.lambda = full.at("lambda").get<double>();
  r.full_tuning.alpha = full.at("alpha").get<double>();
  r.full_tuning.cv_accuracy = full.at("cv_accuracy").get<double>();
  r.full_fit_converged = full.at("converged").get<bool>();
  for (const json& cls : j.at("top_terms")) {
    std::vector<RankedTerm> list;
    for (const json& t : cls) list.push_back({t[0].get<std::string>(), t[1].get<double>()});
    r.top_terms.push_back(std::move(list));
  }
  if (!j.at("progression").is_null()) {
    Progression p;
    for (const json& pt : j["progression"].at("points")) {
      p.points.push_back({pt[0].get<int>(), pt[1].get<double>()});
    }
    p.ols = TestFromJson(j["progression"].at("ols"));
    p.spearman = TestFromJson(j["progression"].at("spearman"));
    r.progression = std::move(p);
  }
  return r;
}

// Spearman that maps a constant series to rho = 0, p = 1.
stats::TestResult SafeSpearman(const std::vector<double>& x, const std::vector<double>& y) {
  auto constant = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
  };
  if (constant(x) || constant(y)) {
    stats::TestResult r;
    r.n = static_cast<int>(x.size());
    return r;
  }
  return stats::Spearman(x, y);
}

TrendLine LineAgainst(const std::vector<double>& x, const std::vector<double>& y) {
  return {stats::OlsSlopeTest(x, y), SafeSpearman(x, y)};
}

double Mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double SampleSd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = Mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

json LineJson(const TrendLine& t) {
  return {{"ols", TestJson(t.ols)}, {"spearman", TestJson(t.spearman)}};
}

std::string Join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

std::string Sha256Hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  static const char* kHex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

std::string Sha256File(const fs::path& path) { return Sha256Hex(ReadFile(path)); }

// ---------------------------------------------------------------------------
// RunConfig

RunConfig RunConfig::FromJson(const json& j, const fs::path& base_dir) {
  CheckKeys(j,
            {"corpus", "patches", "rules", "stopwords", "char_table", "output_dir", "profile",
             "stopword_params", "rescale", "cross_verses", "probes", "classifier"},
            "config");
  RunConfig c;
  auto path_of = [&](const char* key) -> std::optional<fs::path> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    fs::path p = j.at(key).get<std::string>();
    return p.is_absolute() ? p : base_dir / p;
  };
  if (auto p = path_of("corpus")) c.corpus = *p;
  c.patches = path_of("patches");
  c.rules = path_of("rules");
  c.stopwords = path_of("stopwords");
  c.char_table = path_of("char_table");
  if (auto p = path_of("output_dir")) c.output_dir = *p;
  Get(j, "profile", &c.profile);
  Get(j, "cross_verses", &c.cross_verses);
  if (j.contains("stopword_params")) {
    const json& s = j.at("stopword_params");
    CheckKeys(s, {"top_k", "min_canto_dispersion", "keep_exceptions"}, "stopword_params");
    Get(s, "top_k", &c.stopword_params.top_k);
    Get(s, "min_canto_dispersion", &c.stopword_params.min_canto_dispersion);
    Get(s, "keep_exceptions", &c.stopword_params.keep_exceptions);
  }
  if (j.contains("rescale")) {
    const json& r = j.at("rescale");
    CheckKeys(r, {"a", "b"}, "rescale");
    Get(r, "a", &c.rescale.a);
    Get(r, "b", &c.rescale.b);
  }
  if (j.contains("probes")) {
    const json& p = j.at("probes");
    CheckKeys(p, {"min_support", "alpha", "context_window", "context_examples"}, "probes");
    Get(p, "min_support", &c.probes.min_support);
    Get(p, "alpha", &c.probes.alpha);
    Get(p, "context_window", &c.context_window);
    Get(p, "context_examples", &c.context_examples);
  }
  if (j.contains("classifier")) {
    const json& k = j.at("classifier");
    CheckKeys(k,
              {"runs", "test_fraction", "seed", "threads", "top_k", "min_len", "lambdas", "alphas",
               "folds", "max_iterations", "tolerance", "top_terms"},
              "classifier");
    ValidationParams& v = c.validation;
    Get(k, "runs", &v.runs);
    Get(k, "test_fraction", &v.test_fraction);
    Get(k, "seed", &v.seed);
    Get(k, "threads", &v.threads);
    Get(k, "top_k", &v.dtm.top_k);
    Get(k, "min_len", &v.dtm.min_len);
    Get(k, "lambdas", &v.grid.lambdas);
    Get(k, "alphas", &v.grid.alphas);
    Get(k, "folds", &v.grid.folds);
    Get(k, "max_iterations", &v.fit.max_iterations);
    Get(k, "tolerance", &v.fit.tolerance);
    Get(k, "top_terms", &c.top_terms);
  }
  return c;
}

RunConfig RunConfig::Load(const fs::path& path) {
  const std::string text = ReadFile(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
  return FromJson(j, path.parent_path());
}

json RunConfig::ResultJson() const {
  const ValidationParams& v = validation;
  return {{"profile", profile},
          {"stopword_params",
           {{"top_k", stopword_params.top_k},
            {"min_canto_dispersion", stopword_params.min_canto_dispersion},
            {"keep_exceptions", stopword_params.keep_exceptions}}},
          {"rescale", {{"a", rescale.a}, {"b", rescale.b}}},
          {"cross_verses", cross_verses},
          {"probes",
           {{"min_support", probes.min_support},
            {"alpha", probes.alpha},
            {"context_window", context_window},
            {"context_examples", context_examples}}},
          {"classifier",
           {{"runs", v.runs},
            {"test_fraction", v.test_fraction},
            {"seed", v.seed},
            {"top_k", v.dtm.top_k},
            {"min_len", v.dtm.min_len},
            {"lambdas", v.grid.lambdas},
            {"alphas", v.grid.alphas},
            {"folds", v.grid.folds},
            {"max_iterations", v.fit.max_iterations},
            {"tolerance", v.fit.tolerance},
            {"top_terms", top_terms}}}};
}

json RunConfig::ToJson() const {
  json j = ResultJson();
  auto opt = [](const std::optional<fs::path>& p) { return p ? json(p->string()) : json(nullptr); };
  j["corpus"] = corpus.string();
  j["patches"] = opt(patches);
  j["rules"] = opt(rules);
  j["stopwords"] = opt(stopwords);
  j["char_table"] = opt(char_table);
  j["output_dir"] = output_dir.string();
  j["classifier"]["threads"] = validation.threads;
  return j;
}

void RunConfig::Validate() const {
  if (corpus.empty()) throw Error("no corpus path given");
  if (!fs::exists(corpus)) throw MissingInputError(corpus);
  for (const auto* p : {&patches, &rules, &stopwords, &char_table}) {
    if (*p && !fs::exists(**p)) throw MissingInputError(**p);
  }
  CorpusProfile::FromName(profile);
  if (validation.runs < 1) throw Error("classifier.runs must be >= 1");
  if (validation.threads < 1) throw Error("classifier.threads must be >= 1");
  if (validation.grid.lambdas.empty() || validation.grid.alphas.empty()) {
    throw Error("classifier grid must be non-empty");
  }
  if (!(validation.test_fraction > 0.0 && validation.test_fraction < 1.0)) {
    throw Error("classifier.test_fraction must lie in (0, 1)");
  }
  if (validation.grid.folds < 2) throw Error("classifier.folds must be >= 2");
  for (double l : validation.grid.lambdas) {
    if (!(l >= 0.0)) throw Error("classifier.lambdas must be >= 0");
  }
  for (double a : validation.grid.alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw Error("classifier.alphas must lie in [0, 1]");
  }
  if (validation.fit.max_iterations < 1) throw Error("classifier.max_iterations must be >= 1");
  if (probes.min_support < 1) throw Error("probes.min_support must be >= 1");
  if (!(probes.alpha > 0.0 && probes.alpha <= 1.0)) throw Error("probes.alpha must lie in (0, 1]");
  if (context_window < 0 || context_examples < 0) throw Error("probe context sizes must be >= 0");
  if (top_terms < 1) throw Error("top_terms must be >= 1");
}

// ---------------------------------------------------------------------------
// Stages

std::string_view StageName(Stage stage) {
  switch (stage) {
    case Stage::kIngest: return "ingest";
    case Stage::kTokenize: return "tokenize";
    case Stage::kEncode: return "encode";
    case Stage::kMarkov: return "markov";
    case Stage::kTrends: return "trends";
    case Stage::kProbes: return "probes";
    case Stage::kClassify: return "classify";
    case Stage::kAnchors: return "anchors";
  }
  return "?";
}

const std::vector<Stage>& AllStages() {
  static const std::vector<Stage> kStages = {Stage::kIngest, Stage::kTokenize, Stage::kEncode,
                                             Stage::kMarkov, Stage::kTrends,   Stage::kProbes,
                                             Stage::kClassify, Stage::kAnchors};
  return kStages;
}

std::optional<Stage> StageFromName(std::string_view name) {
  for (Stage s : AllStages()) {
    if (StageName(s) == name) return s;
  }
  return std::nullopt;
}

json TrendReport::ToJson(const std::vector<std::string>& groups) const {
  json by_group = json::object();
  for (const auto& [variable, cmp] : by_cantica) {
    json dunn = json::array();
    for (const stats::DunnComparison& d : cmp.dunn) {
      dunn.push_back({{"first", groups.at(d.first)},
                      {"second", groups.at(d.second)},
                      {"z", d.z},
                      {"p_raw", d.p_raw},
                      {"p_adjusted", d.p_adjusted}});
    }
    by_group[variable] = {{"kruskal_wallis", TestJson(cmp.kruskal_wallis)}, {"dunn_holm", dunn}};
  }
  return {{"axis", "global canto index"},
          {"char_counts", {{"mean", char_mean}, {"sd", char_sd}}},
          {"apostrophe_rate", LineJson(apostrophe_rate)},
          {"mean_token_length", LineJson(mean_token_length)},
          {"apostrophe_rate_vs_token_length", TestJson(apostrophe_vs_length)},
          {"md_simple", LineJson(md_simple)},
          {"md", LineJson(md)},
          {"by_cantica", by_group}};
}

Pipeline::Pipeline(RunConfig config, std::function<void(const std::string&)> log)
    : config_(std::move(config)), log_(std::move(log)) {
  LoadManifest();
}

fs::path Pipeline::Out(const std::string& relative) const { return config_.output_dir / relative; }

void Pipeline::Note(Stage stage, const std::string& status) {
  if (log_) log_(std::string(StageName(stage)) + ": " + status);
}

template <typename Fn>
void Pipeline::Guard(Stage stage, Fn&& fn) {
  try {
    fn();
  } catch (const MissingInputError&) {
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(std::string(StageName(stage)), e.what());
  }
}

void Pipeline::LoadManifest() {
  const fs::path path = Out("manifest.json");
  if (!fs::exists(path)) return;
  try {
    const json j = json::parse(ReadFile(path));
    for (const auto& [name, entry] : j.at("stages").items()) {
      StageRecord rec;
      rec.key = entry.at("key").get<std::string>();
      rec.files = entry.at("files").get<std::map<std::string, std::string>>();
      manifest_[name] = std::move(rec);
    }
  } catch (const json::exception&) {
    manifest_.clear();  // unreadable manifest: recompute everything
  }
}

void Pipeline::SaveManifest() const {
  json stages = json::object();
  for (const auto& [name, rec] : manifest_) {
    stages[name] = {{"key", rec.key}, {"files", rec.files}};
  }
  const json config = config_.ResultJson();
  const json j = {{"tool", "graphemic"},
                  {"version", kVersion},
                  {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                std::to_string(EIGEN_MINOR_VERSION)},
                  {"seed", config_.validation.seed},
                  {"config_hash", Sha256Hex(config.dump())},
                  {"config", config},
                  {"stages", stages}};
  WriteFile(Out("manifest.json"), j.dump(2) + "\n");
}

std::string Pipeline::Key(Stage stage) {
  if (auto it = keys_.find(stage); it != keys_.end()) return it->second;
  auto file_or = [](const std::optional<fs::path>& p, const std::string& fallback) {
    return p ? Sha256File(*p) : fallback;
  };
  const json cfg = config_.ResultJson();
  std::string material = std::string(kVersion) + "|" + std::string(StageName(stage)) + "|";
  switch (stage) {
    case Stage::kIngest:
      material += Sha256File(config_.corpus) + "|" + file_or(config_.patches, "-") + "|" +
                  config_.profile;
      break;
    case Stage::kTokenize:
      material += Key(Stage::kIngest) + "|" + file_or(config_.rules, "default") + "|" +
                  file_or(config_.stopwords, cfg.at("stopword_params").dump());
      break;
    case Stage::kEncode:
      material += Key(Stage::kTokenize) + "|" + file_or(config_.char_table, "default") + "|" +
                  (config_.cross_verses ? "cross" : "within");
      break;
    case Stage::kMarkov:
      material += Key(Stage::kEncode) + "|" + cfg.at("rescale").dump();
      break;
    case Stage::kTrends:
      material += Key(Stage::kMarkov);
      break;
    case Stage::kProbes:
      material += Key(Stage::kEncode) + "|" + cfg.at("probes").dump();
      break;
    case Stage::kClassify:
      material += Key(Stage::kTokenize) + "|" + cfg.at("classifier").dump();
      break;
    case Stage::kAnchors:
      material += Key(Stage::kProbes) + "|" + Key(Stage::kClassify);
      break;
  }
  const std::string key = Sha256Hex(material);
  keys_[stage] = key;
  return key;
}

bool Pipeline::IsCached(Stage stage) {
  auto it = manifest_.find(std::string(StageName(stage)));
  if (it == manifest_.end() || it->second.key != Key(stage)) return false;
  for (const auto& [file, digest] : it->second.files) {
    const fs::path path = Out(file);
    if (!fs::exists(path) || Sha256File(path) != digest) return false;
  }
  return true;
}

void Pipeline::Record(Stage stage, const std::vector<std::string>& files) {
  StageRecord rec;
  rec.key = Key(stage);
  for (const std::string& f : files) rec.files[f] = Sha256File(Out(f));
  manifest_[std::string(StageName(stage))] = std::move(rec);
  SaveManifest();
}

const CorpusDocument& Pipeline::Corpus() {
  if (corpus_) return *corpus_;
  Guard(Stage::kIngest, [&] {
    const CorpusProfile profile = CorpusProfile::FromName(config_.profile);
    if (!fs::exists(config_.corpus)) throw MissingInputError(config_.corpus);
    if (IsCached(Stage::kIngest)) {
      corpus_ = LoadCorpus(Out("cache/corpus.json"), profile);
      Note(Stage::kIngest, "cached");
      return;
    }
    CorpusDocument doc = LoadCorpus(config_.corpus, profile);
    if (config_.patches) {
      doc = ApplyPatches(doc, LoadPatches(*config_.patches));
      doc.Validate(profile);
    }
    fs::create_directories(Out("cache"));
    SaveCorpus(doc, Out("cache/corpus.json"));
    corpus_ = std::move(doc);
    Record(Stage::kIngest, {"cache/corpus.json"});
    Note(Stage::kIngest, "computed");
  });
  return *corpus_;
}

const std::vector<TokenizedCanto>& Pipeline::Tokens() {
  if (tokens_) return *tokens_;
  const CorpusDocument& doc = Corpus();
  Guard(Stage::kTokenize, [&] {
    if (IsCached(Stage::kTokenize)) {
      tokens_ = TokensFromJson(json::parse(ReadFile(Out("cache/tokens.json"))));
      const json sw = json::parse(ReadFile(Out("stopwords.json")));
      StopwordList list;
      list.words = sw.at("words").get<std::set<std::string>>();
      list.provenance = sw.at("provenance") == "file" ? StopwordList::Provenance::kFile
                                                      : StopwordList::Provenance::kGenerated;
      stopwords_ = std::move(list);
      Note(Stage::kTokenize, "cached");
      return;
    }
    const RuleConfig rules = config_.rules ? RuleConfig::Load(*config_.rules) : RuleConfig::Default();
    rules.Validate();
    tokens_ = TokenizeCorpus(doc, rules);
    stopwords_ = config_.stopwords ? StopwordList::Load(*config_.stopwords)
                                   : BuildStopwords(*tokens_, config_.stopword_params);
    WriteFile(Out("cache/tokens.json"), TokensToJson(*tokens_).dump() + "\n");
    WriteFile(Out("stopwords.json"), stopwords_->ToJson().dump(2) + "\n");
    std::ostringstream tokens_csv;
    WriteTokenCsv(tokens_csv, *tokens_);
    WriteFile(Out("tokens.csv"), tokens_csv.str());

    const std::vector<const Canto*> cantos = doc.Cantos();
    std::ostringstream fig2;
    CsvWriter csv(fig2);
    csv.Row({"canto", "cantica", "canto_number", "tokens", "apostrophe_tokens", "combined_tokens",
             "isolated_events", "apostrophe_rate_per_100", "mean_token_length"});
    const std::vector<CantoTokenStats>& st = TokenStatistics();
    for (size_t i = 0; i < st.size(); ++i) {
      csv << st[i].canto << cantos[i]->cantica_name << cantos[i]->canto_number
          << st[i].token_count << st[i].apostrophe_tokens << st[i].combined_tokens
          << st[i].isolated_events << st[i].apostrophe_rate_per_100 << st[i].mean_token_length;
      csv.EndRow();
    }
    WriteFile(Out("fig2.csv"), fig2.str());
    Record(Stage::kTokenize, {"cache/tokens.json", "stopwords.json", "tokens.csv", "fig2.csv"});
    Note(Stage::kTokenize, "computed");
  });
  return *tokens_;
}

const StopwordList& Pipeline::Stopwords() {
  Tokens();
  return *stopwords_;
}

const std::vector<CantoTokenStats>& Pipeline::TokenStatistics() {
  if (!token_stats_) token_stats_ = TokenStats(Tokens());
  return *token_stats_;
}

const std::vector<SymbolSequence>& Pipeline::Symbols() {
  if (symbols_) return *symbols_;
  const std::vector<TokenizedCanto>& tokens = Tokens();
  Guard(Stage::kEncode, [&] {
    if (IsCached(Stage::kEncode)) {
      symbols_ = SymbolsFromJson(json::parse(ReadFile(Out("cache/symbols.json"))));
      Note(Stage::kEncode, "cached");
      return;
    }
    CharClassTable table = CharClassTable::Default();
    if (config_.char_table) table = CharClassTable::FromJson(json::parse(ReadFile(*config_.char_table)));
    const std::vector<const Canto*> cantos = Corpus().Cantos();
    std::vector<SymbolSequence> seqs;
    for (size_t i = 0; i < cantos.size(); ++i) {
      seqs.push_back(EncodeCanto(*cantos[i], tokens[i].tokens, table));
    }
    WriteFile(Out("cache/symbols.json"), SymbolsToJson(seqs).dump() + "\n");
    std::ostringstream fig3;
    CsvWriter csv(fig3);
    csv.Row({"canto", "cantica", "canto_number", "alphabetic_chars", "vowels", "consonants"});
    for (size_t i = 0; i < seqs.size(); ++i) {
      const long vowels = std::count(seqs[i].symbols.begin(), seqs[i].symbols.end(), Symbol::kVowel);
      const long total = static_cast<long>(seqs[i].size());
      csv << seqs[i].canto << cantos[i]->cantica_name << cantos[i]->canto_number << total << vowels
          << total - vowels;
      csv.EndRow();
    }
    WriteFile(Out("fig3.csv"), fig3.str());
    symbols_ = std::move(seqs);
    Record(Stage::kEncode, {"cache/symbols.json", "fig3.csv"});
    Note(Stage::kEncode, "computed");
  });
  return *symbols_;
}

const std::vector<CantoMarkov>& Pipeline::Markov() {
  if (markov_) return *markov_;
  const std::vector<SymbolSequence>& seqs = Symbols();
  Guard(Stage::kMarkov, [&] {
    const std::vector<const Canto*> cantos = Corpus().Cantos();
    std::vector<CantoMarkov> rows;
    for (size_t i = 0; i < seqs.size(); ++i) {
      CantoMarkov row;
      row.canto = seqs[i].canto;
      row.cantica = cantos[i]->cantica_name;
      row.canto_number = cantos[i]->canto_number;
      row.symbols = static_cast<long>(seqs[i].size());
      row.vowels = std::count(seqs[i].symbols.begin(), seqs[i].symbols.end(), Symbol::kVowel);
      row.two_state = EstimateTwoState(seqs[i].symbols);
      row.four_state = EstimateFourState(seqs[i].symbols);
      row.index = ComputeDependencyIndex(seqs[i].symbols, config_.rescale);
      rows.push_back(std::move(row));
    }
    markov_ = std::move(rows);
  });
  return *markov_;
}

void Pipeline::WriteMarkovOutputs() {
  std::ostringstream fig4;
  CsvWriter csv(fig4);
  csv.Row({"canto", "cantica", "canto_number", "p1", "p0", "r", "cf_simple", "md_simple", "p_vv",
           "p_vc", "p_cv", "p_cc", "q00", "cf", "md"});
  for (const CantoMarkov& m : Markov()) {
    const FourStateModel& f = m.four_state;
    csv << m.canto << m.cantica << m.canto_number << m.two_state.p1 << m.two_state.p0
        << m.two_state.r() << m.index.cf_simple << m.index.md_simple << f.p(PairState::kVV)
        << f.p(PairState::kVC) << f.p(PairState::kCV) << f.p(PairState::kCC) << f.q00()
        << m.index.cf << m.index.md;
    csv.EndRow();
  }
  WriteFile(Out("fig4.csv"), fig4.str());
}

const TrendReport& Pipeline::Trends() {
  if (trends_) return *trends_;
  const std::vector<CantoTokenStats>& ts = TokenStatistics();
  const std::vector<SymbolSequence>& seqs = Symbols();
  const std::vector<CantoMarkov>& mk = Markov();
  const std::vector<int> labels = Corpus().CanticaLabels();
  const size_t groups = Corpus().cantiche().size();
  Guard(Stage::kTrends, [&] {
    TrendReport r;
    std::vector<double> x, chars, rate, length, md_simple, md;
    std::map<std::string, std::vector<double>> vars;
    for (size_t i = 0; i < mk.size(); ++i) {
      x.push_back(mk[i].canto);
      chars.push_back(static_cast<double>(seqs[i].size()));
      rate.push_back(ts[i].apostrophe_rate_per_100);
      length.push_back(ts[i].mean_token_length);
      md_simple.push_back(mk[i].index.md_simple);
      md.push_back(mk[i].index.md);
      const FourStateModel& f = mk[i].four_state;
      vars["p1"].push_back(mk[i].two_state.p1);
      vars["p0"].push_back(mk[i].two_state.p0);
      vars["p_vv"].push_back(f.p(PairState::kVV));
      vars["p_vc"].push_back(f.p(PairState::kVC));
      vars["p_cv"].push_back(f.p(PairState::kCV));
      vars["p_cc"].push_back(f.p(PairState::kCC));
      vars["q00"].push_back(f.q00());
    }
    vars["md_simple"] = md_simple;
    vars["md"] = md;
    r.char_mean = Mean(chars);
    r.char_sd = SampleSd(chars);
    r.apostrophe_rate = LineAgainst(x, rate);
    r.mean_token_length = LineAgainst(x, length);
    r.apostrophe_vs_length = SafeSpearman(rate, length);
    r.md_simple = LineAgainst(x, md_simple);
    r.md = LineAgainst(x, md);

    if (groups >= 2) {
      for (const char* v : {"p1", "p0", "p_vv", "p_vc", "p_cv", "q00", "md_simple", "md"}) {
        std::vector<std::vector<double>> by_group(groups);
        for (size_t i = 0; i < labels.size(); ++i) by_group[labels[i]].push_back(vars[v][i]);
        GroupComparison cmp;
        cmp.kruskal_wallis = stats::KruskalWallis(by_group);
        cmp.dunn = stats::DunnHolm(by_group);
        r.by_cantica[v] = std::move(cmp);
      }
    }

    // Controls: every other transition probability; q00 stands in for p_cc.
    const std::vector<std::string> pool = {"p0", "p1", "p_vv", "p_vc", "p_cv", "p_cc"};
    for (const char* target : {"md", "md_simple"}) {
      for (const char* focal : {"p1", "p0", "p_vv", "p_vc", "p_cv", "q00"}) {
        const std::string excluded = std::string(focal) == "q00" ? "p_cc" : focal;
        SensitivityRow row;
        row.target = target;
        row.focal = focal;
        std::vector<std::vector<double>> controls;
        for (const std::string& c : pool) {
          if (c == excluded) continue;
          row.controls.push_back(c);
          controls.push_back(vars[c]);
        }
        try {
          row.result = stats::PartialSpearman(vars[target], vars[focal], controls);
        } catch (const stats::StatsError&) {
          row.result.statistic = kNaN;
          row.result.p_value = kNaN;
          row.result.n = static_cast<int>(x.size());
        }
        r.sensitivity.push_back(std::move(row));
      }
    }
    trends_ = std::move(r);
  });
  return *trends_;
}

void Pipeline::WriteTrendOutputs() {
  std::vector<std::string> groups;
  for (const Cantica& c : Corpus().cantiche()) groups.push_back(c.name);
  const TrendReport& r = Trends();
  WriteFile(Out("trends.json"), r.ToJson(groups).dump(2) + "\n");

  std::ostringstream out;
  CsvWriter csv(out);
  csv.Row({"analysis", "variable", "term", "statistic", "p_value", "p_adjusted", "n", "controls"});
  for (const SensitivityRow& s : r.sensitivity) {
    csv << "partial_spearman" << s.target << s.focal << s.result.statistic << s.result.p_value << ""
        << s.result.n << Join(s.controls, ";");
    csv.EndRow();
  }
  for (const auto& [variable, cmp] : r.by_cantica) {
    csv << "kruskal_wallis" << variable << "" << cmp.kruskal_wallis.statistic
        << cmp.kruskal_wallis.p_value << "" << cmp.kruskal_wallis.n << "";
    csv.EndRow();
    for (const stats::DunnComparison& d : cmp.dunn) {
      csv << "dunn_holm" << variable << groups[d.first] + " vs " + groups[d.second] << d.z
          << d.p_raw << d.p_adjusted << cmp.kruskal_wallis.n << "";
      csv.EndRow();
    }
  }
  WriteFile(Out("sensitivity.csv"), out.str());
}

const ProbeReport& Pipeline::Probes() {
  if (probes_) return *probes_;
  const std::vector<SymbolSequence>& seqs = Symbols();
  Guard(Stage::kProbes, [&] {
    std::vector<std::vector<TrigramOccurrence>> per_canto;
    CantoAxis axis;
    for (const SymbolSequence& s : seqs) {
      per_canto.push_back(TrigramScan(s, {config_.cross_verses}));
      axis.position.push_back(s.canto);
      axis.length.push_back(static_cast<double>(s.size()));
    }
    ProbeReport r;
    r.class_trends = ComputeClassTrends(per_canto, axis);
    r.records = ScreenProbes(BuildProfiles(per_canto), r.class_trends, axis, config_.probes);
    r.class_sw = AggregateSwByClass(r.records, true);
    probes_ = std::move(r);
  });
  return *probes_;
}

void Pipeline::WriteProbeOutputs() {
  const ProbeReport& r = Probes();
  std::ostringstream table3;
  WriteProbeCsv(table3, r.records);
  WriteFile(Out("table3.csv"), table3.str());

  std::ostringstream classes;
  CsvWriter csv(classes);
  csv.Row({"kind", "name", "rho", "p_value", "retained_sw_pct"});
  for (const auto& [cls, t] : r.class_trends.by_class) {
    auto agg = r.class_sw.find(cls);
    csv << "class" << ClassName(cls) << t.statistic << t.p_value;
    if (agg != r.class_sw.end()) {
      csv << agg->second.sw_pct;
    } else {
      csv << "";
    }
    csv.EndRow();
  }
  for (const auto& [pattern, t] : r.class_trends.by_pattern) {
    csv << "pattern" << PatternName(pattern) << t.statistic << t.p_value << "";
    csv.EndRow();
  }
  WriteFile(Out("class_trends.csv"), classes.str());

  // Lexical contexts of the first occurrences of every retained probe.
  const std::vector<SymbolSequence>& seqs = Symbols();
  const std::vector<TokenizedCanto>& tokens = Tokens();
  const std::vector<const Canto*> cantos = Corpus().Cantos();
  std::map<std::string, std::vector<std::string>> contexts;
  std::set<std::string> retained;
  for (const ProbeRecord& p : r.records) {
    if (p.retained) retained.insert(p.profile.letters);
  }
  for (size_t c = 0; c < seqs.size() && !retained.empty(); ++c) {
    for (const TrigramOccurrence& occ : TrigramScan(seqs[c], {config_.cross_verses})) {
      if (!retained.count(occ.letters)) continue;
      auto& list = contexts[occ.letters];
      if (static_cast<int>(list.size()) >= config_.context_examples) continue;
      list.push_back(cantos[c]->cantica_name + " " + std::to_string(cantos[c]->canto_number) + "." +
                     std::to_string(seqs[c].verses[occ.position]) + "  " +
                     LexicalContext(occ, seqs[c], tokens[c].tokens, config_.context_window));
    }
  }
  std::ostringstream text;
  for (const ProbeRecord& p : r.records) {
    if (!p.retained) continue;
    text << p.profile.letters << " (" << PatternName(p.profile.pattern) << ", class "
         << ClassName(p.profile.vc_class) << ", SW " << FormatDouble(p.sw_pct) << "%)\n";
    for (const std::string& line : contexts[p.profile.letters]) text << "  " << line << "\n";
  }
  WriteFile(Out("probe_contexts.txt"), text.str());
}

const LabeledBags& Pipeline::Bags() {
  if (!bags_) bags_ = MakeBags(Corpus(), Tokens());
  return *bags_;
}

const ClassificationResult& Pipeline::Classification() {
  if (classification_) return *classification_;
  const LabeledBags& bags = Bags();
  const StopwordList& stopwords = Stopwords();
  Guard(Stage::kClassify, [&] {
    if (IsCached(Stage::kClassify)) {
      classification_ = ClassificationFromJson(json::parse(ReadFile(Out("cache/classify.json"))));
      Note(Stage::kClassify, "cached");
      return;
    }
    ClassificationResult r;
    r.classes = bags.class_names;
    r.validation = MonteCarloValidate(bags, stopwords, config_.validation);
    const FullFit full = FitFullData(bags, stopwords, config_.validation);
    r.full_tuning = full.tuning;
    r.full_fit_converged = full.model.converged;
    r.top_terms = TopTerms(full.model, config_.top_terms);
    if (bags.class_names.size() == 3) r.progression = ComputeProgression(full, bags, 1, 2, 0);
    classification_ = std::move(r);
    const ClassificationResult& c = *classification_;

    json table4 = c.validation.ToJson();
    table4.erase("runs");
    table4["runs"] = static_cast<int>(c.validation.runs.size());
    table4["selected"] = json::array();
    for (const RunOutcome& o : c.validation.runs) {
      table4["selected"].push_back({{"lambda", o.tuning.lambda}, {"alpha", o.tuning.alpha}});
    }
    table4["per_run"] = json::array();
    for (const RunOutcome& o : c.validation.runs) {
      table4["per_run"].push_back(MetricsJson(o.metrics));
    }
    table4["full_fit"] = {{"lambda", c.full_tuning.lambda},
                          {"alpha", c.full_tuning.alpha},
                          {"converged", c.full_fit_converged},
                          {"note", "top terms and progression come from a fit on all cantos"}};
    table4["grid"] = config_.validation.grid.ToJson();
    table4["seed"] = config_.validation.seed;
    WriteFile(Out("table4.json"), table4.dump(2) + "\n");

    std::ostringstream fig5b;
    WriteConfusionCsv(fig5b, c.validation);
    WriteFile(Out("fig5b.csv"), fig5b.str());
    std::ostringstream table5;
    WriteTopTermsCsv(table5, c.classes, c.top_terms);
    WriteFile(Out("table5.csv"), table5.str());
    std::ostringstream fig7b;
    if (c.progression) {
      WriteProgressionCsv(fig7b, *c.progression);
    } else {
      CsvWriter(fig7b).Row({"canto_number", "diff"});
    }
    WriteFile(Out("fig7b.csv"), fig7b.str());
    WriteFile(Out("cache/classify.json"), ClassificationToJson(c).dump() + "\n");
    Record(Stage::kClassify,
           {"table4.json", "fig5b.csv", "table5.csv", "fig7b.csv", "cache/classify.json"});
    Note(Stage::kClassify, "computed");
  });
  return *classification_;
}

const AnchorReport& Pipeline::Anchors() {
  if (anchors_) return *anchors_;
  const ProbeReport& probes = Probes();
  const ClassificationResult& cls = Classification();
  const LabeledBags& bags = Bags();
  Guard(Stage::kAnchors, [&] {
    std::vector<ProbeRecord> retained;
    for (const ProbeRecord& p : probes.records) {
      if (p.retained) retained.push_back(p);
    }
    AnchorReport r;
    if (!retained.empty() && !cls.top_terms.empty()) {
      r.records = LinkProbesToTerms(retained, cls.classes, cls.top_terms, bags);
    }
    std::set<std::string> anchored;
    for (const AnchorRecord& a : r.records) anchored.insert(a.probe_letters);
    long a_total = 0, a_sw = 0, r_total = 0, r_sw = 0;
    double a_sum = 0.0, r_sum = 0.0;
    for (const ProbeRecord& p : retained) {
      r_total += p.profile.total;
      r_sw += p.profile.sw_count;
      r_sum += p.sw_pct;
      if (anchored.count(p.profile.letters)) {
        a_total += p.profile.total;
        a_sw += p.profile.sw_count;
        a_sum += p.sw_pct;
      }
    }
    r.retained_sw_pct = r_total > 0 ? 100.0 * r_sw / r_total : 0.0;
    r.anchored_sw_pct = a_total > 0 ? 100.0 * a_sw / a_total : 0.0;
    r.retained_mean_sw_pct = retained.empty() ? 0.0 : r_sum / retained.size();
    r.anchored_mean_sw_pct = anchored.empty() ? 0.0 : a_sum / anchored.size();
    anchors_ = std::move(r);
  });
  return *anchors_;
}

void Pipeline::WriteAnchorOutputs() {
  const AnchorReport& r = Anchors();
  std::ostringstream fig8;
  WriteAnchorCsv(fig8, r.records);
  WriteFile(Out("fig8.csv"), fig8.str());
  std::set<std::string> anchored;
  for (const AnchorRecord& a : r.records) anchored.insert(a.probe_letters);
  const json summary = {{"records", r.records.size()},
                        {"anchored_probes", anchored},
                        {"anchored_mean_sw_pct", r.anchored_mean_sw_pct},
                        {"retained_mean_sw_pct", r.retained_mean_sw_pct},
                        {"anchored_pooled_sw_pct", r.anchored_sw_pct},
                        {"retained_pooled_sw_pct", r.retained_sw_pct}};
  WriteFile(Out("anchors.json"), summary.dump(2) + "\n");
}

void Pipeline::Run(Stage stage) {
  fs::create_directories(config_.output_dir);
  switch (stage) {
    case Stage::kIngest: Corpus(); break;
    case Stage::kTokenize: Tokens(); break;
    case Stage::kEncode: Symbols(); break;
    case Stage::kClassify: Classification(); break;
    case Stage::kMarkov:
    case Stage::kTrends:
    case Stage::kProbes:
    case Stage::kAnchors: {
      // Derived stages are cheap to recompute from the cached artifacts;
      // their files are rewritten only when the stage key changed.
      const bool cached = IsCached(stage);
      std::vector<std::string> files;
      Guard(stage, [&] {
        switch (stage) {
          case Stage::kMarkov:
            Markov();
            if (!cached) WriteMarkovOutputs();
            files = {"fig4.csv"};
            break;
          case Stage::kTrends:
            Trends();
            if (!cached) WriteTrendOutputs();
            files = {"trends.json", "sensitivity.csv"};
            break;
          case Stage::kProbes:
            Probes();
            if (!cached) WriteProbeOutputs();
            files = {"table3.csv", "class_trends.csv", "probe_contexts.txt"};
            break;
          default:
            Anchors();
            if (!cached) WriteAnchorOutputs();
            files = {"fig8.csv", "anchors.json"};
            break;
        }
      });
      if (!cached) Record(stage, files);
      Note(stage, cached ? "cached" : "computed");
      break;
    }
  }
}

void Pipeline::RunAll() {
  for (Stage s : AllStages()) Run(s);
}

}  // namespace graphemic
