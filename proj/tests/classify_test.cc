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


#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "graphemic/classify.h"
#include "graphemic/random.h"

namespace graphemic {
namespace {

// Rows of Poisson counts; class c inflates the rate of features 2c, 2c + 1.
struct Toy {
  Eigen::MatrixXd x;
  std::vector<int> y;
  std::vector<std::string> classes = {"A", "B", "C"};
};

Toy MakeToy(int per_class, int features, double signal, uint64_t seed) {
  std::mt19937_64 rng(seed);
  Toy t;
  t.x.resize(3 * per_class, features);
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < per_class; ++i) {
      const int row = c * per_class + i;
      t.y.push_back(c);
      for (int j = 0; j < features; ++j) {
        const double rate = 3.0 + ((j / 2 == c) ? signal : 0.0);
        t.x(row, j) = std::poisson_distribution<int>(rate)(rng);
      }
    }
  }
  return t;
}

// Gorodkin's multi-class MCC written out as a triple sum.
double GorodkinOracle(const Eigen::MatrixXd& c) {
  const int k = static_cast<int>(c.rows());
  double num = 0;
  for (int a = 0; a < k; ++a)
    for (int l = 0; l < k; ++l)
      for (int m = 0; m < k; ++m) num += c(a, a) * c(l, m) - c(a, l) * c(m, a);
  double d1 = 0, d2 = 0;
  for (int a = 0; a < k; ++a) {
    double row = 0, rest_rows = 0, col = 0, rest_cols = 0;
    for (int l = 0; l < k; ++l) {
      row += c(a, l);
      col += c(l, a);
    }
    for (int b = 0; b < k; ++b) {
      if (b == a) continue;
      for (int l = 0; l < k; ++l) {
        rest_rows += c(b, l);
        rest_cols += c(l, b);
      }
    }
    d1 += row * rest_rows;
    d2 += col * rest_cols;
  }
  return d1 * d2 > 0 ? num / std::sqrt(d1 * d2) : 0.0;
}

TEST_CASE("smooth gradient matches finite differences") {
  const Toy t = MakeToy(10, 6, 2.0, 1);
  const Eigen::MatrixXd xs = Standardization::Fit(t.x).Apply(t.x);
  const EnmnlrObjective obj(xs, t.y, 3, 0.05, 0.3);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 0.5);
  Eigen::MatrixXd w(3, 6);
  Eigen::VectorXd b(3);
  for (int i = 0; i < w.size(); ++i) w.data()[i] = g(rng);
  for (int i = 0; i < 3; ++i) b(i) = g(rng);
  Eigen::MatrixXd gw;
  Eigen::VectorXd gb;
  obj.Smooth(w, b, &gw, &gb);
  const double h = 1e-6;
  for (int i = 0; i < w.size(); ++i) {
    Eigen::MatrixXd wp = w, wm = w;
    wp.data()[i] += h;
    wm.data()[i] -= h;
    const double fd = (obj.Smooth(wp, b) - obj.Smooth(wm, b)) / (2 * h);
    CHECK(std::abs(fd - gw.data()[i]) <= 1e-6 * std::max(1.0, std::abs(gw.data()[i])));
  }
  for (int i = 0; i < 3; ++i) {
    Eigen::VectorXd bp = b, bm = b;
    bp(i) += h;
    bm(i) -= h;
    const double fd = (obj.Smooth(w, bp) - obj.Smooth(w, bm)) / (2 * h);
    CHECK(std::abs(fd - gb(i)) <= 1e-6 * std::max(1.0, std::abs(gb(i))));
  }
}

TEST_CASE("objective never increases along the fit") {
  const Toy t = MakeToy(15, 8, 1.5, 3);
  for (double alpha : {0.0, 0.5, 1.0}) {
    std::vector<double> trace;
    FitOptions opt;
    opt.trace = &trace;
    const EnmnlrModel m = FitEnmnlr(t.x, t.y, t.classes, 0.01, alpha, opt);
    REQUIRE(trace.size() > 2);
    for (size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1]);
    CHECK(m.converged);
    CHECK(m.objective == doctest::Approx(trace.back()));
  }
}

TEST_CASE("coefficients and intercepts sum to zero across classes") {
  const Toy t = MakeToy(12, 6, 2.0, 4);
  const EnmnlrModel m = FitEnmnlr(t.x, t.y, t.classes, 0.001, 0.5);
  CHECK(m.coefficients.colwise().sum().cwiseAbs().maxCoeff() < 1e-8);
  CHECK(std::abs(m.intercepts.sum()) < 1e-8);
  const Eigen::MatrixXd p = m.PredictProba(t.x);
  CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("a large penalty leaves only the class priors") {
  Toy t = MakeToy(10, 6, 2.0, 5);
  // Unbalanced classes: drop four rows of class C.
  t.x.conservativeResize(26, Eigen::NoChange);
  t.y.resize(26);
  const EnmnlrModel m = FitEnmnlr(t.x, t.y, t.classes, 100.0, 0.5);
  CHECK(m.coefficients.cwiseAbs().maxCoeff() == 0.0);
  const double c = (std::log(10.0) + std::log(10.0) + std::log(6.0)) / 3;
  CHECK(m.intercepts(0) == doctest::Approx(std::log(10.0) - c).epsilon(1e-6));
  CHECK(m.intercepts(2) == doctest::Approx(std::log(6.0) - c).epsilon(1e-6));
}

TEST_CASE("an unpenalized fit separates separable data") {
  const Toy t = MakeToy(10, 6, 40.0, 6);
  FitOptions opt;
  opt.max_iterations = 2000;
  const EnmnlrModel m = FitEnmnlr(t.x, t.y, t.classes, 0.0, 0.0, opt);
  CHECK(m.Predict(t.x) == t.y);
}

TEST_CASE("softmax") {
  Eigen::RowVectorXd s(3);
  s << 1000.0, 1001.0, 999.0;
  const Eigen::RowVectorXd p = Softmax(s);
  CHECK(p.sum() == doctest::Approx(1.0));
  CHECK(p(1) / p(0) == doctest::Approx(std::exp(1.0)));
}

TEST_CASE("fit argument checks") {
  const Toy t = MakeToy(5, 4, 2.0, 7);
  CHECK_THROWS_AS(FitEnmnlr(t.x, t.y, t.classes, -1.0, 0.5), ClassifyError);
  CHECK_THROWS_AS(FitEnmnlr(t.x, t.y, t.classes, 0.1, 1.5), ClassifyError);
  const std::vector<int> single(t.y.size(), 1);
  CHECK_THROWS_AS(FitEnmnlr(t.x, single, t.classes, 0.1, 0.5), ClassifyError);
}

TEST_CASE("standardization") {
  Eigen::MatrixXd x(4, 2);
  x << 1, 5, 2, 5, 3, 5, 6, 5;
  const Standardization s = Standardization::Fit(x);
  CHECK(s.mean(0) == doctest::Approx(3.0));
  CHECK(s.sd(0) == doctest::Approx(std::sqrt(14.0 / 4)));
  CHECK(s.sd(1) == 0.0);
  const Eigen::MatrixXd z = s.Apply(x);
  CHECK(z.col(1).isZero());
  CHECK(z.col(0).mean() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(s.Apply(Eigen::MatrixXd::Zero(2, 3)), ClassifyError);
}

TEST_CASE("metrics on a hand confusion matrix") {
  Eigen::MatrixXd c(3, 3);
  c << 2, 1, 0, 0, 2, 1, 1, 0, 2;
  const Metrics m = MetricsFromConfusion(c);
  CHECK(m.accuracy == doctest::Approx(6.0 / 9));
  CHECK(m.balanced_accuracy == doctest::Approx(2.0 / 3));
  CHECK(m.macro_f1 == doctest::Approx(2.0 / 3));
  CHECK(m.mcc == doctest::Approx(0.5));
  CHECK(m.mcc == doctest::Approx(GorodkinOracle(c)));
}

TEST_CASE("metrics match the oracle on random confusion matrices") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> truth, pred;
    for (int i = 0; i < 40; ++i) {
      truth.push_back(static_cast<int>(rng() % 3));
      pred.push_back(rng() % 3 == 0 ? truth.back() : static_cast<int>(rng() % 3));
    }
    const Eigen::MatrixXd c = ConfusionCounts(truth, pred, 3);
    CHECK(c.sum() == 40.0);
    const Metrics m = ComputeMetrics(truth, pred, 3);
    CHECK(m.mcc == doctest::Approx(GorodkinOracle(c)).epsilon(1e-12));
    int hits = 0;
    for (int i = 0; i < 40; ++i) hits += truth[i] == pred[i];
    CHECK(m.accuracy == doctest::Approx(hits / 40.0));
    // Relabelling classes consistently changes nothing.
    std::vector<int> t2, p2;
    for (int i = 0; i < 40; ++i) {
      t2.push_back((truth[i] + 1) % 3);
      p2.push_back((pred[i] + 1) % 3);
    }
    const Metrics r = ComputeMetrics(t2, p2, 3);
    CHECK(r.mcc == doctest::Approx(m.mcc));
    CHECK(r.macro_f1 == doctest::Approx(m.macro_f1));
    CHECK(r.balanced_accuracy == doctest::Approx(m.balanced_accuracy));
  }
}

TEST_CASE("metric edge cases") {
  const std::vector<int> truth = {0, 0, 1, 1, 2, 2};
  const Metrics perfect = ComputeMetrics(truth, truth, 3);
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.balanced_accuracy == 1.0);
  CHECK(perfect.macro_f1 == 1.0);
  CHECK(perfect.mcc == doctest::Approx(1.0));
  const Metrics constant = ComputeMetrics(truth, std::vector<int>(6, 1), 3);
  CHECK(constant.mcc == 0.0);
  CHECK(constant.balanced_accuracy == doctest::Approx(1.0 / 3));
  CHECK(constant.macro_f1 == doctest::Approx((2.0 * 2 / 8) / 3));
  // Class 2 absent from truth: recall averages over present classes only.
  const Metrics absent = ComputeMetrics({0, 0, 1, 1}, {0, 2, 1, 1}, 3);
  CHECK(absent.balanced_accuracy == doctest::Approx(0.75));
  CHECK_THROWS_AS(MetricsFromConfusion(Eigen::MatrixXd::Zero(3, 3)), ClassifyError);
}

TEST_CASE("stratified split sizes") {
  std::vector<int> labels;
  for (int i = 0; i < 34; ++i) labels.push_back(0);
  for (int i = 0; i < 33; ++i) labels.push_back(1);
  for (int i = 0; i < 33; ++i) labels.push_back(2);
  const Split s = StratifiedSplit(labels, 0.2, 11);
  CHECK(s.train.size() + s.test.size() == 100);
  std::vector<int> test_per_class(3, 0);
  for (int i : s.test) ++test_per_class[labels[i]];
  CHECK(test_per_class == std::vector<int>{7, 7, 7});
  std::set<int> all(s.train.begin(), s.train.end());
  all.insert(s.test.begin(), s.test.end());
  CHECK(all.size() == 100);
  CHECK(StratifiedSplit(labels, 0.2, 11).test == s.test);
  CHECK(StratifiedSplit(labels, 0.2, 12).test != s.test);
}

TEST_CASE("stratified folds balance classes") {
  std::vector<int> labels;
  for (int i = 0; i < 27; ++i) labels.push_back(i % 3);
  const std::vector<int> folds = StratifiedFolds(labels, 5, 3);
  std::vector<std::vector<int>> per(5, std::vector<int>(3, 0));
  for (size_t i = 0; i < labels.size(); ++i) ++per[folds[i]][labels[i]];
  for (int f = 0; f < 5; ++f) {
    for (int c = 0; c < 3; ++c) CHECK((per[f][c] == 1 || per[f][c] == 2));
  }
}

TEST_CASE("tuning on a single grid point returns it") {
  const Toy t = MakeToy(10, 6, 3.0, 8);
  TuningGrid grid;
  grid.lambdas = {0.01};
  grid.alphas = {0.5};
  grid.folds = 3;
  const TuningResult r = Tune(t.x, t.y, t.classes, grid, 1);
  CHECK(r.lambda == 0.01);
  CHECK(r.alpha == 0.5);
  CHECK(r.cv_accuracy > 0.6);
}

TEST_CASE("tuning ties go to the larger lambda") {
  const Toy t = MakeToy(10, 6, 40.0, 8);
  TuningGrid grid;
  grid.lambdas = {1e-4, 1e-3};
  grid.alphas = {0.0, 1.0};
  grid.folds = 3;
  const TuningResult r = Tune(t.x, t.y, t.classes, grid, 1);
  CHECK(r.cv_accuracy == 1.0);
  CHECK(r.lambda == 1e-3);
  CHECK(r.alpha == 1.0);
}

LabeledBags ToyBags(int per_class, uint64_t seed, bool informative) {
  std::mt19937_64 rng(seed);
  const std::vector<std::vector<std::string>> lex = {
      {"ferro", "fuoco", "pianto", "ombra"}, {"monte", "salita", "canto", "riva"},
      {"luce", "stella", "gloria", "amore"}};
  const std::vector<std::string> common = {"terra", "tempo", "mente", "vista", "parole", "occhi",
                                           "mondo", "gente", "cosa", "vero", "dolce", "viso"};
  LabeledBags data;
  data.class_names = {"I", "II", "III"};
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < per_class; ++i) {
      std::map<std::string, int> bag;
      for (int w = 0; w < 200; ++w) {
        const bool own = informative && rng() % 4 == 0;
        const std::string& word =
            own ? lex[c][rng() % 4] : (rng() % 2 ? common[rng() % common.size()]
                                                 : lex[rng() % 3][rng() % 4]);
        ++bag[word];
      }
      ++bag["di"];
      data.bags.push_back(bag);
      data.labels.push_back(c);
      data.canto_numbers.push_back(i + 1);
    }
  }
  return data;
}

ValidationParams SmallParams(int runs) {
  ValidationParams p;
  p.runs = runs;
  p.grid.lambdas = {1e-2, 1e-1};
  p.grid.alphas = {0.5, 1.0};
  p.grid.folds = 3;
  p.dtm.top_k = 40;
  p.dtm.min_vocabulary = 5;
  p.fit.max_iterations = 2000;
  return p;
}

TEST_CASE("document-term matrix filters and ranks") {
  LabeledBags data;
  data.class_names = {"A", "B"};
  data.bags = {{{"casa", 3}, {"il", 9}, {"che", 5}, {"sole", 1}}, {{"casa", 1}, {"sole", 3}}};
  data.labels = {0, 1};
  data.canto_numbers = {1, 1};
  StopwordList stop;
  stop.words = {"che"};
  DtmParams p;
  p.min_vocabulary = 1;
  const DocumentTermMatrix dtm = BuildDtm(data, {0, 1}, stop, p);
  CHECK(dtm.vocabulary == std::vector<std::string>{"casa", "sole"});
  CHECK(dtm.counts(0, 0) == 3);
  CHECK(dtm.counts(1, 1) == 3);
  // Only the listed rows define the vocabulary.
  p.top_k = 1;
  CHECK(BuildDtm(data, {1}, stop, p).vocabulary == std::vector<std::string>{"sole"});
  p.min_vocabulary = 3;
  CHECK_THROWS_AS(BuildDtm(data, {0, 1}, stop, p), ClassifyError);
}

TEST_CASE("validation is deterministic and thread independent") {
  const LabeledBags data = ToyBags(8, 1, true);
  ValidationParams p = SmallParams(3);
  const ValidationReport a = MonteCarloValidate(data, {}, p);
  p.threads = 3;
  const ValidationReport b = MonteCarloValidate(data, {}, p);
  CHECK(a.ToJson() == b.ToJson());
  CHECK(a.mean.accuracy > 0.8);
  CHECK((a.pooled_confusion.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
  std::ostringstream csv;
  WriteConfusionCsv(csv, a);
  CHECK(csv.str().rfind("true,predicted,proportion", 0) == 0);
}

TEST_CASE("uninformative bags give chance-level agreement") {
  LabeledBags data = ToyBags(10, 2, false);
  const ValidationReport r = MonteCarloValidate(data, {}, SmallParams(8));
  CHECK(std::abs(r.mean.mcc) < 0.1 + 2 * r.sd.mcc / std::sqrt(8.0));
}

TEST_CASE("full fit, top terms and progression") {
  const LabeledBags data = ToyBags(8, 3, true);
  const FullFit fit = FitFullData(data, {}, SmallParams(1));
  const auto top = TopTerms(fit.model, 3);
  REQUIRE(top.size() == 3);
  const std::set<std::string> hell = {"ferro", "fuoco", "pianto", "ombra"};
  CHECK(hell.count(top[0][0].term) == 1);
  for (const auto& terms : top) {
    for (size_t i = 1; i < terms.size(); ++i) CHECK(terms[i - 1].coefficient >= terms[i].coefficient);
  }
  const Progression pr = ComputeProgression(fit, data, 1, 2, 0);
  CHECK(pr.points.size() == 8);
  CHECK(pr.points.front().canto_number == 1);
  for (const auto& pt : pr.points) CHECK(std::abs(pt.diff) <= 1.0);
  std::ostringstream terms_csv, prog_csv;
  WriteTopTermsCsv(terms_csv, data.class_names, top);
  WriteProgressionCsv(prog_csv, pr);
  CHECK(terms_csv.str().rfind("class,rank,term,coefficient", 0) == 0);
  CHECK(prog_csv.str().rfind("canto_number,diff", 0) == 0);
}

}  // namespace
}  // namespace graphemic
