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

// graphemic <stage> [options]
//
// Runs one pipeline stage (and whatever upstream stages are not cached) or
// `all`. Exit status: 0 on success, 2 when an input file is missing, 1 for
// any other failure; the diagnostic names the failing stage.

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "graphemic/pipeline.h"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitMissingInput = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graphemic and lexical analysis of a canto-structured poem"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::string corpus;
  std::string patches;
  std::string rules;
  std::string stopwords;
  std::string char_table;
  std::string output_dir;
  std::string profile;
  int64_t seed = -1;
  int threads = 0;
  int runs = 0;
  bool quiet = false;

  app.add_option("-c,--config", config_path, "JSON run configuration");
  app.add_option("--corpus", corpus, "corpus JSON file");
  app.add_option("--patches", patches, "patch set JSON file");
  app.add_option("--rules", rules, "apostrophe rule JSON file");
  app.add_option("--stopwords", stopwords, "stopword list JSON file");
  app.add_option("--char-table", char_table, "vowel table JSON file");
  app.add_option("-o,--output", output_dir, "output directory");
  app.add_option("--profile", profile, "corpus profile: commedia or generic");
  app.add_option("--seed", seed, "master seed")->check(CLI::NonNegativeNumber);
  app.add_option("--threads", threads, "worker cap for Monte Carlo runs")->check(CLI::PositiveNumber);
  app.add_option("--runs", runs, "Monte Carlo runs")->check(CLI::PositiveNumber);
  app.add_flag("-q,--quiet", quiet, "no per-stage progress lines");

  for (graphemic::Stage s : graphemic::AllStages()) {
    app.add_subcommand(std::string(graphemic::StageName(s)), "run the " +
                                                                 std::string(graphemic::StageName(s)) +
                                                                 " stage");
  }
  app.add_subcommand("all", "run every stage and write all report files");

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  graphemic::RunConfig config;
  try {
    if (!config_path.empty()) config = graphemic::RunConfig::Load(config_path);
  } catch (const graphemic::MissingInputError& e) {
    std::cerr << "graphemic: " << e.what() << "\n";
    return kExitMissingInput;
  } catch (const std::exception& e) {
    std::cerr << "graphemic: config: " << e.what() << "\n";
    return kExitFailure;
  }
  if (!corpus.empty()) config.corpus = corpus;
  if (!patches.empty()) config.patches = patches;
  if (!rules.empty()) config.rules = rules;
  if (!stopwords.empty()) config.stopwords = stopwords;
  if (!char_table.empty()) config.char_table = char_table;
  if (!output_dir.empty()) config.output_dir = output_dir;
  if (!profile.empty()) config.profile = profile;
  if (seed >= 0) config.validation.seed = static_cast<uint64_t>(seed);
  if (threads > 0) config.validation.threads = threads;
  if (runs > 0) config.validation.runs = runs;

  try {
    config.Validate();
  } catch (const graphemic::MissingInputError& e) {
    std::cerr << "graphemic: " << e.what() << "\n";
    return kExitMissingInput;
  } catch (const std::exception& e) {
    std::cerr << "graphemic: config: " << e.what() << "\n";
    return kExitFailure;
  }

  auto log = [quiet](const std::string& line) {
    if (!quiet) std::cerr << line << "\n";
  };
  try {
    graphemic::Pipeline pipeline(config, log);
    if (command == "all") {
      pipeline.RunAll();
    } else {
      pipeline.Run(*graphemic::StageFromName(command));
    }
  } catch (const graphemic::MissingInputError& e) {
    std::cerr << "graphemic: " << e.what() << "\n";
    return kExitMissingInput;
  } catch (const graphemic::StageError& e) {
    std::cerr << "graphemic: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "graphemic: " << command << ": " << e.what() << "\n";
    return kExitFailure;
  }
  return 0;
}
