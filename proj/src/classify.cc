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

#include "graphemic/classify.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>
#include <unordered_map>

#include "graphemic/csv.h"
#include "graphemic/random.h"

namespace graphemic {
namespace {

constexpr uint64_t kFullFitStream = uint64_t{1} << 32;

int CountPresentClasses(const std::vector<int>& y, int num_classes) {
  std::vector<bool> seen(num_classes, false);
  for (int label : y) {
    if (label < 0 || label >= num_classes) {
      throw ClassifyError("label " + std::to_string(label) + " outside the class range");
    }
    seen[label] = true;
  }
  return static_cast<int>(std::count(seen.begin(), seen.end(), true));
}

Eigen::MatrixXd SoftThreshold(const Eigen::MatrixXd& w, double threshold) {
  return w.unaryExpr([threshold](double v) {
    if (v > threshold) return v - threshold;
    if (v < -threshold) return v + threshold;
    return 0.0;
  });
}

// Largest eigenvalue of x^T x / n by power iteration.
double GramNorm(const Eigen::MatrixXd& x) {
  if (x.size() == 0) return 0.0;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(x.cols()).normalized();
  double estimate = 0.0;
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd next = x.transpose() * (x * v);
    const double norm = next.norm();
    if (norm == 0.0) return 0.0;
    estimate = norm;
    v = next / norm;
  }
  return estimate / static_cast<double>(x.rows());
}

std::vector<int> Gather(const std::vector<int>& values, const std::vector<int>& idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(values[i]);
  return out;
}

Eigen::MatrixXd GatherRows(const Eigen::MatrixXd& x, const std::vector<int>& idx) {
  Eigen::MatrixXd out(idx.size(), x.cols());
  for (size_t i = 0; i < idx.size(); ++i) out.row(i) = x.row(idx[i]);
  return out;
}

double Accuracy(const std::vector<int>& truth, const std::vector<int>& predicted) {
  int correct = 0;
  for (size_t i = 0; i < truth.size(); ++i) correct += truth[i] == predicted[i];
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

nlohmann::json MetricsJson(const Metrics& m) {
  return {{"accuracy", m.accuracy},
          {"balanced_accuracy", m.balanced_accuracy},
          {"macro_f1", m.macro_f1},
          {"mcc", m.mcc}};
}

nlohmann::json MatrixJson(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

LabeledBags MakeBags(const CorpusDocument& doc, const std::vector<TokenizedCanto>& tokens) {
  const std::vector<const Canto*> cantos = doc.Cantos();
  if (cantos.size() != tokens.size()) {
    throw ClassifyError("token table does not match the corpus");
  }
  LabeledBags out;
  for (const Cantica& c : doc.cantiche()) out.class_names.push_back(c.name);
  out.labels = doc.CanticaLabels();
  for (size_t i = 0; i < cantos.size(); ++i) {
    if (tokens[i].canto != cantos[i]->global_index) {
      throw ClassifyError("token table out of reading order at canto " +
                          std::to_string(cantos[i]->global_index));
    }
    std::map<std::string, int> bag;
    for (const Token& t : tokens[i].tokens) ++bag[t.surface];
    out.bags.push_back(std::move(bag));
    out.canto_numbers.push_back(cantos[i]->canto_number);
  }
  return out;
}

DocumentTermMatrix BuildDtm(const LabeledBags& data, const std::vector<int>& rows,
                            const StopwordList& stopwords, const DtmParams& params) {
  std::unordered_map<std::string, long> freq;
  for (int r : rows) {
    for (const auto& [term, count] : data.bags.at(r)) {
      if (text::Length(term) < static_cast<size_t>(params.min_len)) continue;
      if (stopwords.contains(term)) continue;
      freq[term] += count;
    }
  }
  std::vector<std::pair<std::string, long>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > static_cast<size_t>(params.top_k)) ranked.resize(params.top_k);
  if (ranked.size() < static_cast<size_t>(params.min_vocabulary)) {
    throw ClassifyError("vocabulary has " + std::to_string(ranked.size()) +
                        " terms after filtering; at least " +
                        std::to_string(params.min_vocabulary) + " required");
  }
  DocumentTermMatrix dtm;
  dtm.rows = rows;
  for (auto& [term, count] : ranked) dtm.vocabulary.push_back(term);
  dtm.counts = ProjectRows(data, rows, dtm.vocabulary);
  return dtm;
}

Eigen::MatrixXd ProjectRows(const LabeledBags& data, const std::vector<int>& rows,
                            const std::vector<std::string>& vocabulary) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows.size(), vocabulary.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& bag = data.bags.at(rows[i]);
    for (size_t j = 0; j < vocabulary.size(); ++j) {
      auto it = bag.find(vocabulary[j]);
      if (it != bag.end()) out(i, j) = it->second;
    }
  }
  return out;
}

Standardization Standardization::Fit(const Eigen::MatrixXd& x) {
  if (x.rows() == 0) throw ClassifyError("cannot standardize an empty matrix");
  Standardization s;
  s.mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - s.mean;
  s.sd = (centered.array().square().colwise().sum() / static_cast<double>(x.rows())).sqrt();
  return s;
}

Eigen::MatrixXd Standardization::Apply(const Eigen::MatrixXd& x) const {
  if (x.cols() != mean.size()) {
    throw ClassifyError("row length " + std::to_string(x.cols()) + " does not match vocabulary " +
                        std::to_string(mean.size()));
  }
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (sd(j) > 0.0) {
      out.col(j) = (x.col(j).array() - mean(j)) / sd(j);
    } else {
      out.col(j).setZero();
    }
  }
  return out;
}

EnmnlrObjective::EnmnlrObjective(const Eigen::MatrixXd& x, const std::vector<int>& y,
                                 int num_classes, double lambda, double alpha)
    : x_(x), lambda_(lambda), alpha_(alpha) {
  if (static_cast<Eigen::Index>(y.size()) != x.rows()) {
    throw ClassifyError("label count does not match row count");
  }
  onehot_ = Eigen::MatrixXd::Zero(x.rows(), num_classes);
  for (size_t i = 0; i < y.size(); ++i) onehot_(i, y[i]) = 1.0;
}

double EnmnlrObjective::Smooth(const Eigen::MatrixXd& w, const Eigen::VectorXd& b) const {
  return Smooth(w, b, nullptr, nullptr);
}

double EnmnlrObjective::Smooth(const Eigen::MatrixXd& w, const Eigen::VectorXd& b,
                               Eigen::MatrixXd* grad_w, Eigen::VectorXd* grad_b) const {
  const double n = static_cast<double>(x_.rows());
  Eigen::MatrixXd scores = x_ * w.transpose();
  scores.rowwise() += b.transpose();
  // Stable log-sum-exp per row.
  const Eigen::VectorXd max_score = scores.rowwise().maxCoeff();
  Eigen::MatrixXd expd = (scores.colwise() - max_score).array().exp();
  const Eigen::VectorXd sum = expd.rowwise().sum();
  const Eigen::VectorXd lse = max_score.array() + sum.array().log();
  const double ce = (lse - (scores.cwiseProduct(onehot_)).rowwise().sum()).sum() / n;
  const double ridge = lambda_ * (1.0 - alpha_) * 0.5 * w.squaredNorm();
  if (grad_w != nullptr) {
    const Eigen::MatrixXd residual = (expd.array().colwise() / sum.array()).matrix() - onehot_;
    *grad_w = residual.transpose() * x_ / n + lambda_ * (1.0 - alpha_) * w;
    *grad_b = residual.colwise().sum().transpose() / n;
  }
  return ce + ridge;
}

double EnmnlrObjective::L1(const Eigen::MatrixXd& w) const {
  return lambda_ * alpha_ * w.cwiseAbs().sum();
}

Eigen::RowVectorXd Softmax(const Eigen::RowVectorXd& scores) {
  const Eigen::RowVectorXd shifted = scores.array() - scores.maxCoeff();
  Eigen::RowVectorXd e = shifted.array().exp();
  return e / e.sum();
}

Eigen::MatrixXd EnmnlrModel::PredictProba(const Eigen::MatrixXd& counts) const {
  Eigen::MatrixXd scores = standardization.Apply(counts) * coefficients.transpose();
  scores.rowwise() += intercepts.transpose();
  Eigen::MatrixXd out(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) out.row(i) = Softmax(scores.row(i));
  return out;
}

std::vector<int> EnmnlrModel::Predict(const Eigen::MatrixXd& counts) const {
  const Eigen::MatrixXd proba = PredictProba(counts);
  std::vector<int> out(proba.rows());
  for (Eigen::Index i = 0; i < proba.rows(); ++i) {
    Eigen::Index best = 0;
    proba.row(i).maxCoeff(&best);
    out[i] = static_cast<int>(best);
  }
  return out;
}

EnmnlrModel FitEnmnlr(const Eigen::MatrixXd& x, const std::vector<int>& y,
                      const std::vector<std::string>& classes, double lambda, double alpha,
                      const FitOptions& options, const EnmnlrModel* warm) {
  const int k = static_cast<int>(classes.size());
  if (lambda < 0.0 || !std::isfinite(lambda)) throw ClassifyError("lambda must be >= 0");
  if (alpha < 0.0 || alpha > 1.0) throw ClassifyError("alpha must lie in [0, 1]");
  if (CountPresentClasses(y, k) < 2) throw ClassifyError("training data has fewer than 2 classes");

  EnmnlrModel model;
  model.classes = classes;
  model.lambda = lambda;
  model.alpha = alpha;
  model.standardization = Standardization::Fit(x);
  const Eigen::MatrixXd xs = model.standardization.Apply(x);
  const EnmnlrObjective objective(xs, y, k, lambda, alpha);

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(k, x.cols());
  Eigen::VectorXd b(k);
  if (warm != nullptr && warm->coefficients.rows() == k && warm->coefficients.cols() == x.cols()) {
    w = warm->coefficients;
    b = warm->intercepts;
  } else {
    std::vector<double> counts(k, 0.0);
    for (int label : y) counts[label] += 1.0;
    for (int c = 0; c < k; ++c) b(c) = std::log(std::max(counts[c], 0.5));
    b.array() -= b.mean();
  }

  const double lipschitz = 0.5 * (GramNorm(xs) + 1.0) + lambda * (1.0 - alpha);
  double step = 4.0 / lipschitz;
  const double l1_threshold = lambda * alpha;

  double f_current = objective.Full(w, b);
  if (!std::isfinite(f_current)) throw ClassifyError("non-finite objective at the start point");
  if (options.trace != nullptr) options.trace->push_back(f_current);

  Eigen::MatrixXd wy = w;
  Eigen::VectorXd by = b;
  double momentum = 1.0;
  bool restarted = false;
  Eigen::MatrixXd grad_w;
  Eigen::VectorXd grad_b;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    const double g_y = objective.Smooth(wy, by, &grad_w, &grad_b);
    Eigen::MatrixXd wz;
    Eigen::VectorXd bz;
    double g_z = 0.0;
    for (int shrink = 0;; ++shrink) {
      wz = SoftThreshold(wy - step * grad_w, step * l1_threshold);
      bz = by - step * grad_b;
      g_z = objective.Smooth(wz, bz);
      const Eigen::MatrixXd dw = wz - wy;
      const Eigen::VectorXd db = bz - by;
      const double model_bound = g_y + (grad_w.cwiseProduct(dw)).sum() + grad_b.dot(db) +
                                 (dw.squaredNorm() + db.squaredNorm()) / (2.0 * step);
      if (g_z <= model_bound + 1e-12 * std::abs(g_y)) break;
      if (shrink > 60) throw ClassifyError("backtracking failed to find a step");
      step *= 0.5;
    }
    const double f_z = g_z + objective.L1(wz);
    if (!std::isfinite(f_z)) throw ClassifyError("non-finite objective during fit");

    if (f_z <= f_current) {
      const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
      const double beta = (momentum - 1.0) / next_momentum;
      wy = wz + beta * (wz - w);
      by = bz + beta * (bz - b);
      const double rel = (f_current - f_z) / std::max(std::abs(f_current), 1e-300);
      w = std::move(wz);
      b = std::move(bz);
      f_current = f_z;
      momentum = next_momentum;
      restarted = false;
      if (options.trace != nullptr) options.trace->push_back(f_current);
      if (rel < options.tolerance) {
        model.converged = true;
        ++iter;
        break;
      }
    } else {
      // The plain proximal step from w cannot increase the objective, so a
      // second rejection in a row only happens at rounding level.
      if (restarted) {
        model.converged = true;
        ++iter;
        break;
      }
      momentum = 1.0;
      wy = w;
      by = b;
      restarted = true;
    }
  }
  model.iterations = iter;
  model.objective = f_current;
  // Sum-to-zero identification.
  w = w.rowwise() - w.colwise().mean();
  b.array() -= b.mean();
  if (!w.allFinite() || !b.allFinite()) throw ClassifyError("non-finite coefficients");
  model.coefficients = std::move(w);
  model.intercepts = std::move(b);
  return model;
}

nlohmann::json TuningGrid::ToJson() const {
  return {{"lambdas", lambdas}, {"alphas", alphas}, {"folds", folds}};
}

std::vector<int> StratifiedFolds(const std::vector<int>& labels, int folds, uint64_t seed) {
  if (folds < 2) throw ClassifyError("at least 2 folds required");
  std::mt19937_64 rng(seed);
  std::map<int, std::vector<int>> by_class;
  for (size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(static_cast<int>(i));
  std::vector<int> fold(labels.size(), 0);
  int offset = 0;
  for (auto& [label, members] : by_class) {
    Shuffle(members.begin(), members.end(), rng);
    for (size_t j = 0; j < members.size(); ++j) {
      fold[members[j]] = static_cast<int>((j + offset) % folds);
    }
    offset += static_cast<int>(members.size());
  }
  return fold;
}

Split StratifiedSplit(const std::vector<int>& labels, double test_fraction, uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ClassifyError("test fraction must lie in (0, 1)");
  }
  std::mt19937_64 rng(seed);
  std::map<int, std::vector<int>> by_class;
  for (size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(static_cast<int>(i));
  Split split;
  for (auto& [label, members] : by_class) {
    Shuffle(members.begin(), members.end(), rng);
    const size_t n_test = static_cast<size_t>(std::lround(test_fraction * members.size()));
    if (n_test == 0 || n_test >= members.size()) {
      throw ClassifyError("class " + std::to_string(label) + " too small for a stratified split");
    }
    split.test.insert(split.test.end(), members.begin(), members.begin() + n_test);
    split.train.insert(split.train.end(), members.begin() + n_test, members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

TuningResult Tune(const Eigen::MatrixXd& x, const std::vector<int>& y,
                  const std::vector<std::string>& classes, const TuningGrid& grid, uint64_t seed,
                  const FitOptions& options) {
  if (grid.lambdas.empty() || grid.alphas.empty()) throw ClassifyError("tuning grid is empty");
  const int k = static_cast<int>(classes.size());
  if (CountPresentClasses(y, k) < 2) throw ClassifyError("tuning data has fewer than 2 classes");

  std::vector<double> lambdas = grid.lambdas;
  std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
  std::vector<double> alphas = grid.alphas;
  std::sort(alphas.begin(), alphas.end());

  const std::vector<int> fold = StratifiedFolds(y, grid.folds, seed);
  // accuracy[l][a], summed over folds
  std::vector<std::vector<double>> accuracy(lambdas.size(), std::vector<double>(alphas.size(), 0.0));
  for (int f = 0; f < grid.folds; ++f) {
    std::vector<int> train_idx;
    std::vector<int> test_idx;
    for (size_t i = 0; i < y.size(); ++i) {
      (fold[i] == f ? test_idx : train_idx).push_back(static_cast<int>(i));
    }
    if (test_idx.empty()) throw ClassifyError("fold " + std::to_string(f) + " is empty");
    const std::vector<int> y_train = Gather(y, train_idx);
    if (CountPresentClasses(y_train, k) != CountPresentClasses(y, k)) {
      throw ClassifyError("fold " + std::to_string(f) + " training part is missing a class");
    }
    const Eigen::MatrixXd x_train = GatherRows(x, train_idx);
    const Eigen::MatrixXd x_test = GatherRows(x, test_idx);
    const std::vector<int> y_test = Gather(y, test_idx);
    for (size_t a = 0; a < alphas.size(); ++a) {
      EnmnlrModel previous;
      bool have_previous = false;
      for (size_t l = 0; l < lambdas.size(); ++l) {
        EnmnlrModel fit = FitEnmnlr(x_train, y_train, classes, lambdas[l], alphas[a], options,
                                    have_previous ? &previous : nullptr);
        accuracy[l][a] += Accuracy(y_test, fit.Predict(x_test));
        previous = std::move(fit);
        have_previous = true;
      }
    }
  }
  TuningResult best;
  best.cv_accuracy = -1.0;
  // Lambdas descend and alphas ascend, so a strict improvement test keeps
  // the larger lambda on ties; within one lambda, the later (larger) alpha
  // wins ties.
  for (size_t l = 0; l < lambdas.size(); ++l) {
    for (size_t a = 0; a < alphas.size(); ++a) {
      const double mean = accuracy[l][a] / grid.folds;
      const bool better = mean > best.cv_accuracy + 1e-12;
      const bool same_lambda_tie =
          std::abs(mean - best.cv_accuracy) <= 1e-12 && lambdas[l] == best.lambda;
      if (better || same_lambda_tie) {
        best.lambda = lambdas[l];
        best.alpha = alphas[a];
        best.cv_accuracy = mean;
      }
    }
  }
  return best;
}

Eigen::MatrixXd ConfusionCounts(const std::vector<int>& truth, const std::vector<int>& predicted,
                                int num_classes) {
  if (truth.size() != predicted.size()) throw ClassifyError("truth and prediction lengths differ");
  if (truth.empty()) throw ClassifyError("metrics need at least one item");
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(num_classes, num_classes);
  for (size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= num_classes || predicted[i] < 0 ||
        predicted[i] >= num_classes) {
      throw ClassifyError("label outside the class range");
    }
    c(truth[i], predicted[i]) += 1.0;
  }
  return c;
}

Metrics MetricsFromConfusion(const Eigen::MatrixXd& c) {
  const int k = static_cast<int>(c.rows());
  const double s = c.sum();
  if (s <= 0.0) throw ClassifyError("empty confusion matrix");
  const Eigen::VectorXd t = c.rowwise().sum();     // true counts
  const Eigen::RowVectorXd p = c.colwise().sum();  // predicted counts
  Metrics m;
  const double correct = c.trace();
  m.accuracy = correct / s;
  double recall_sum = 0.0;
  int recall_classes = 0;
  double f1_sum = 0.0;
  for (int i = 0; i < k; ++i) {
    if (t(i) > 0) {
      recall_sum += c(i, i) / t(i);
      ++recall_classes;
    }
    const double denom = t(i) + p(i);
    f1_sum += denom > 0 ? 2.0 * c(i, i) / denom : 0.0;
  }
  m.balanced_accuracy = recall_sum / recall_classes;
  m.macro_f1 = f1_sum / k;
  const double cov_xy = correct * s - p.dot(t.transpose());
  const double cov_xx = s * s - p.squaredNorm();
  const double cov_yy = s * s - t.squaredNorm();
  const double denom = std::sqrt(cov_xx * cov_yy);
  m.mcc = denom > 0.0 ? cov_xy / denom : 0.0;
  return m;
}

Metrics ComputeMetrics(const std::vector<int>& truth, const std::vector<int>& predicted,
                       int num_classes) {
  return MetricsFromConfusion(ConfusionCounts(truth, predicted, num_classes));
}

nlohmann::json ValidationReport::ToJson() const {
  nlohmann::json runs_json = nlohmann::json::array();
  for (const RunOutcome& r : runs) {
    nlohmann::json j = MetricsJson(r.metrics);
    j["lambda"] = r.tuning.lambda;
    j["alpha"] = r.tuning.alpha;
    j["cv_accuracy"] = r.tuning.cv_accuracy;
    j["converged"] = r.converged;
    runs_json.push_back(j);
  }
  return {{"classes", classes},
          {"mean", MetricsJson(mean)},
          {"sd", MetricsJson(sd)},
          {"pooled_confusion", MatrixJson(pooled_confusion)},
          {"nonconverged_fits", nonconverged_fits},
          {"runs", runs_json}};
}

ValidationReport MonteCarloValidate(const LabeledBags& data, const StopwordList& stopwords,
                                    const ValidationParams& params) {
  if (params.runs < 1) throw ClassifyError("at least one Monte Carlo run required");
  const int k = static_cast<int>(data.class_names.size());
  ValidationReport report;
  report.classes = data.class_names;
  report.runs.resize(params.runs);

  auto one_run = [&](int i) {
    const uint64_t run_seed = ChildSeed(params.seed, static_cast<uint64_t>(i));
    const Split split = StratifiedSplit(data.labels, params.test_fraction, ChildSeed(run_seed, 0));
    const DocumentTermMatrix dtm = BuildDtm(data, split.train, stopwords, params.dtm);
    const std::vector<int> y_train = Gather(data.labels, split.train);
    const TuningResult tuning =
        Tune(dtm.counts, y_train, data.class_names, params.grid, ChildSeed(run_seed, 1), params.fit);
    const EnmnlrModel model =
        FitEnmnlr(dtm.counts, y_train, data.class_names, tuning.lambda, tuning.alpha, params.fit);
    const Eigen::MatrixXd x_test = ProjectRows(data, split.test, dtm.vocabulary);
    const std::vector<int> y_test = Gather(data.labels, split.test);
    const std::vector<int> predicted = model.Predict(x_test);
    RunOutcome& out = report.runs[i];
    out.tuning = tuning;
    out.converged = model.converged;
    out.confusion = ConfusionCounts(y_test, predicted, k);
    out.metrics = MetricsFromConfusion(out.confusion);
  };

  const int workers = std::max(1, std::min(params.threads, params.runs));
  if (workers == 1) {
    for (int i = 0; i < params.runs; ++i) one_run(i);
  } else {
    std::atomic<int> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < params.runs; i = next++) {
          try {
            one_run(i);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }

  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(k, k);
  std::vector<double> acc, bal, f1, mcc;
  for (const RunOutcome& r : report.runs) {
    pooled += r.confusion;
    acc.push_back(r.metrics.accuracy);
    bal.push_back(r.metrics.balanced_accuracy);
    f1.push_back(r.metrics.macro_f1);
    mcc.push_back(r.metrics.mcc);
    if (!r.converged) ++report.nonconverged_fits;
  }
  auto mean_sd = [](const std::vector<double>& v, double* mean, double* sd) {
    const double n = static_cast<double>(v.size());
    *mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - *mean) * (x - *mean);
    *sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  };
  mean_sd(acc, &report.mean.accuracy, &report.sd.accuracy);
  mean_sd(bal, &report.mean.balanced_accuracy, &report.sd.balanced_accuracy);
  mean_sd(f1, &report.mean.macro_f1, &report.sd.macro_f1);
  mean_sd(mcc, &report.mean.mcc, &report.sd.mcc);
  report.pooled_confusion = pooled;
  for (int i = 0; i < k; ++i) {
    const double row = pooled.row(i).sum();
    if (row > 0) report.pooled_confusion.row(i) /= row;
  }
  return report;
}

std::vector<std::vector<RankedTerm>> TopTerms(const EnmnlrModel& model, int k_per_class) {
  std::vector<std::vector<RankedTerm>> out;
  for (Eigen::Index c = 0; c < model.coefficients.rows(); ++c) {
    std::vector<RankedTerm> terms;
    for (size_t j = 0; j < model.vocabulary.size(); ++j) {
      terms.push_back({model.vocabulary[j], model.coefficients(c, j)});
    }
    std::sort(terms.begin(), terms.end(), [](const RankedTerm& a, const RankedTerm& b) {
      if (a.coefficient != b.coefficient) return a.coefficient > b.coefficient;
      return a.term < b.term;
    });
    if (terms.size() > static_cast<size_t>(k_per_class)) terms.resize(k_per_class);
    out.push_back(std::move(terms));
  }
  return out;
}

FullFit FitFullData(const LabeledBags& data, const StopwordList& stopwords,
                    const ValidationParams& params) {
  std::vector<int> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  FullFit out;
  out.dtm = BuildDtm(data, all, stopwords, params.dtm);
  out.tuning = Tune(out.dtm.counts, data.labels, data.class_names, params.grid,
                    ChildSeed(params.seed, kFullFitStream), params.fit);
  out.model = FitEnmnlr(out.dtm.counts, data.labels, data.class_names, out.tuning.lambda,
                        out.tuning.alpha, params.fit);
  out.model.vocabulary = out.dtm.vocabulary;
  return out;
}

Progression ComputeProgression(const FullFit& fit, const LabeledBags& data, int target_class,
                               int plus_class, int minus_class) {
  const Eigen::MatrixXd proba = fit.model.PredictProba(fit.dtm.counts);
  Progression out;
  std::vector<double> x, y;
  for (size_t i = 0; i < fit.dtm.rows.size(); ++i) {
    const int row = fit.dtm.rows[i];
    if (data.labels[row] != target_class) continue;
    const double diff = proba(i, plus_class) - proba(i, minus_class);
    out.points.push_back({data.canto_numbers[row], diff});
    x.push_back(data.canto_numbers[row]);
    y.push_back(diff);
  }
  if (x.size() < 4) throw ClassifyError("progression needs at least 4 cantos in the target class");
  out.ols = stats::OlsSlopeTest(x, y);
  const bool constant = std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); });
  if (constant) {
    out.spearman.n = static_cast<int>(y.size());
    out.spearman.effect = 0.0;
  } else {
    out.spearman = stats::Spearman(x, y);
  }
  return out;
}

void WriteConfusionCsv(std::ostream& out, const ValidationReport& report) {
  CsvWriter csv(out);
  csv.Row({"true", "predicted", "proportion"});
  for (size_t i = 0; i < report.classes.size(); ++i) {
    for (size_t j = 0; j < report.classes.size(); ++j) {
      csv << report.classes[i] << report.classes[j] << report.pooled_confusion(i, j);
      csv.EndRow();
    }
  }
}

void WriteTopTermsCsv(std::ostream& out, const std::vector<std::string>& classes,
                      const std::vector<std::vector<RankedTerm>>& terms) {
  CsvWriter csv(out);
  csv.Row({"class", "rank", "term", "coefficient"});
  for (size_t c = 0; c < terms.size(); ++c) {
    for (size_t r = 0; r < terms[c].size(); ++r) {
      csv << classes[c] << static_cast<int>(r + 1) << terms[c][r].term << terms[c][r].coefficient;
      csv.EndRow();
    }
  }
}

void WriteProgressionCsv(std::ostream& out, const Progression& progression) {
  CsvWriter csv(out);
  csv.Row({"canto_number", "diff"});
  for (const ProgressionPoint& p : progression.points) {
    csv << p.canto_number << p.diff;
    csv.EndRow();
  }
}

}  // namespace graphemic
