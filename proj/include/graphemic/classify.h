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

// Canto-level bag-of-words classification.
//
// The model is a multinomial logistic regression with an elastic-net
// penalty on standardized term counts:
//
//   (1/n) sum_i -log softmax(W x_i + b)[y_i]
//       + lambda * (alpha * |W|_1 + (1 - alpha) / 2 * |W|_2^2)
//
// Intercepts are unpenalized. The fit is an accelerated proximal gradient
// method with backtracking and a monotone restart, so the objective never
// increases between accepted iterates. After fitting, W and b are centered
// across classes (sum-to-zero identification); predictions are unchanged.

#ifndef GRAPHEMIC_CLASSIFY_H_
#define GRAPHEMIC_CLASSIFY_H_

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "graphemic/stats.h"
#include "graphemic/tokenizer.h"
#include "json.hpp"

namespace graphemic {

class ClassifyError : public Error {
 public:
  using Error::Error;
};

// Token counts per canto plus the class label of each canto.
struct LabeledBags {
  std::vector<std::map<std::string, int>> bags;
  std::vector<int> labels;         // index into class_names
  std::vector<int> canto_numbers;  // within the cantica
  std::vector<std::string> class_names;

  size_t size() const { return bags.size(); }
};

LabeledBags MakeBags(const CorpusDocument& doc, const std::vector<TokenizedCanto>& tokens);

struct DtmParams {
  int top_k = 500;
  int min_len = 3;
  int min_vocabulary = 10;
};

struct DocumentTermMatrix {
  std::vector<int> rows;  // indices into LabeledBags
  std::vector<std::string> vocabulary;
  Eigen::MatrixXd counts;  // rows x vocabulary
};

// Vocabulary from the listed rows only: length >= min_len, not a stopword,
// top_k by frequency with lexicographic ties.
DocumentTermMatrix BuildDtm(const LabeledBags& data, const std::vector<int>& rows,
                            const StopwordList& stopwords, const DtmParams& params = {});

// Counts of `rows` over a fixed vocabulary.
Eigen::MatrixXd ProjectRows(const LabeledBags& data, const std::vector<int>& rows,
                            const std::vector<std::string>& vocabulary);

struct Standardization {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd sd;  // population sd; zero marks a constant column

  static Standardization Fit(const Eigen::MatrixXd& x);
  Eigen::MatrixXd Apply(const Eigen::MatrixXd& x) const;
};

// Smooth part of the objective (cross-entropy plus ridge term) and its
// gradient, on already standardized features.
class EnmnlrObjective {
 public:
  EnmnlrObjective(const Eigen::MatrixXd& x, const std::vector<int>& y, int num_classes,
                  double lambda, double alpha);

  double Smooth(const Eigen::MatrixXd& w, const Eigen::VectorXd& b) const;
  double Smooth(const Eigen::MatrixXd& w, const Eigen::VectorXd& b, Eigen::MatrixXd* grad_w,
                Eigen::VectorXd* grad_b) const;
  double L1(const Eigen::MatrixXd& w) const;
  double Full(const Eigen::MatrixXd& w, const Eigen::VectorXd& b) const {
    return Smooth(w, b) + L1(w);
  }

 private:
  const Eigen::MatrixXd& x_;
  Eigen::MatrixXd onehot_;
  double lambda_;
  double alpha_;
};

struct FitOptions {
  int max_iterations = 10000;
  double tolerance = 1e-8;  // relative objective decrease
  // Called with the objective of every accepted iterate when set.
  std::vector<double>* trace = nullptr;
};

struct EnmnlrModel {
  std::vector<std::string> classes;
  std::vector<std::string> vocabulary;
  Eigen::MatrixXd coefficients;  // classes x vocabulary, standardized scale
  Eigen::VectorXd intercepts;
  double lambda = 0.0;
  double alpha = 0.0;
  Standardization standardization;
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;

  // Raw count rows in; one probability row per input row.
  Eigen::MatrixXd PredictProba(const Eigen::MatrixXd& counts) const;
  std::vector<int> Predict(const Eigen::MatrixXd& counts) const;
};

// `x` holds raw counts; standardization is fitted on it. `warm` (optional)
// seeds W and b in standardized space.
EnmnlrModel FitEnmnlr(const Eigen::MatrixXd& x, const std::vector<int>& y,
                      const std::vector<std::string>& classes, double lambda, double alpha,
                      const FitOptions& options = {}, const EnmnlrModel* warm = nullptr);

Eigen::RowVectorXd Softmax(const Eigen::RowVectorXd& scores);

struct TuningGrid {
  std::vector<double> lambdas = {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  std::vector<double> alphas = {0.0, 0.25, 0.5, 0.75, 1.0};
  int folds = 5;

  nlohmann::json ToJson() const;
};

struct TuningResult {
  double lambda = 0.0;
  double alpha = 0.0;
  double cv_accuracy = 0.0;
};

// Stratified k-fold CV over the grid. Ties go to larger lambda, then larger
// alpha.
TuningResult Tune(const Eigen::MatrixXd& x, const std::vector<int>& y,
                  const std::vector<std::string>& classes, const TuningGrid& grid, uint64_t seed,
                  const FitOptions& options = {});

// Per class, round(test_fraction * class size) rows go to the test side.
struct Split {
  std::vector<int> train;
  std::vector<int> test;
};
Split StratifiedSplit(const std::vector<int>& labels, double test_fraction, uint64_t seed);

// Fold id per row; each class is spread round-robin after a shuffle.
std::vector<int> StratifiedFolds(const std::vector<int>& labels, int folds, uint64_t seed);

struct Metrics {
  double accuracy = 0.0;
  double balanced_accuracy = 0.0;
  double macro_f1 = 0.0;
  double mcc = 0.0;
};

// rows = truth, columns = prediction
Eigen::MatrixXd ConfusionCounts(const std::vector<int>& truth, const std::vector<int>& predicted,
                                int num_classes);
Metrics ComputeMetrics(const std::vector<int>& truth, const std::vector<int>& predicted,
                       int num_classes);
Metrics MetricsFromConfusion(const Eigen::MatrixXd& confusion);

struct ValidationParams {
  int runs = 100;
  double test_fraction = 0.2;
  uint64_t seed = 20240601;
  int threads = 1;
  DtmParams dtm;
  TuningGrid grid;
  FitOptions fit;
};

struct RunOutcome {
  Metrics metrics;
  TuningResult tuning;
  bool converged = true;
  Eigen::MatrixXd confusion;  // counts
};

struct ValidationReport {
  std::vector<std::string> classes;
  std::vector<RunOutcome> runs;
  Metrics mean;
  Metrics sd;  // sample sd over runs
  Eigen::MatrixXd pooled_confusion;  // rows normalized by true class
  int nonconverged_fits = 0;

  nlohmann::json ToJson() const;
};

ValidationReport MonteCarloValidate(const LabeledBags& data, const StopwordList& stopwords,
                                    const ValidationParams& params);

struct RankedTerm {
  std::string term;
  double coefficient = 0.0;
};

// Per class, descending coefficient; ties by term.
std::vector<std::vector<RankedTerm>> TopTerms(const EnmnlrModel& model, int k_per_class);

struct FullFit {
  DocumentTermMatrix dtm;
  TuningResult tuning;
  EnmnlrModel model;
};

// Vocabulary, tuning and fit on every row.
FullFit FitFullData(const LabeledBags& data, const StopwordList& stopwords,
                    const ValidationParams& params);

struct ProgressionPoint {
  int canto_number = 0;
  double diff = 0.0;
};

struct Progression {
  std::vector<ProgressionPoint> points;
  stats::TestResult ols;
  stats::TestResult spearman;
};

// In-sample P(plus_class) - P(minus_class) over the cantos of target_class.
Progression ComputeProgression(const FullFit& fit, const LabeledBags& data, int target_class,
                               int plus_class, int minus_class);

void WriteConfusionCsv(std::ostream& out, const ValidationReport& report);
void WriteTopTermsCsv(std::ostream& out, const std::vector<std::string>& classes,
                      const std::vector<std::vector<RankedTerm>>& terms);
void WriteProgressionCsv(std::ostream& out, const Progression& progression);

}  // namespace graphemic

#endif  // GRAPHEMIC_CLASSIFY_H_
