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

#include "graphemic/stats.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace graphemic::stats {
namespace {

void RequireSameLength(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw StatsError("length mismatch: " + std::to_string(x.size()) + " vs " +
                     std::to_string(y.size()));
  }
}

bool IsConstant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
}

double PValueFromT(double r, double df) {
  if (std::abs(r) >= 1.0) return 0.0;
  const double t = r * std::sqrt(df / (1.0 - r * r));
  return StudentTTwoSided(t, df);
}

}  // namespace

double StudentTTwoSided(double t, double df) {
  if (std::isinf(t)) return 0.0;
  boost::math::students_t dist(df);
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))), 0.0, 1.0);
}

double NormalTwoSided(double z) { return std::clamp(std::erfc(std::abs(z) / std::sqrt(2.0)), 0.0, 1.0); }

double ChiSquareUpper(double x, double df) {
  if (x <= 0.0) return 1.0;
  boost::math::chi_squared dist(df);
  return std::clamp(boost::math::cdf(boost::math::complement(dist, x)), 0.0, 1.0);
}

std::vector<double> MidRanks(std::span<const double> values) {
  const size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (size_t i = 0; i < n;) {
    size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double TieSum(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (size_t i = 0; i < sorted.size();) {
    size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    sum += t * t * t - t;
    i = j;
  }
  return sum;
}

double PearsonCorrelation(std::span<const double> x, std::span<const double> y) {
  RequireSameLength(x, y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw StatsError("correlation of a constant vector");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

double ExactSpearmanP(const std::vector<double>& rx, std::vector<double> ry, double rho) {
  if (rx.size() > 10) throw StatsError("exact Spearman p limited to n <= 10");
  std::sort(ry.begin(), ry.end());
  long hits = 0, total = 0;
  const double threshold = std::abs(rho) - 1e-12;
  do {
    ++total;
    if (std::abs(PearsonCorrelation(rx, ry)) >= threshold) ++hits;
  } while (std::next_permutation(ry.begin(), ry.end()));
  // next_permutation skips duplicate arrangements of tied ranks; each
  // distinct arrangement stands for the same number of raw permutations,
  // so the ratio is unaffected.
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

TestResult Spearman(std::span<const double> x, std::span<const double> y, SpearmanPValue method) {
  RequireSameLength(x, y);
  const int n = static_cast<int>(x.size());
  if (n < 4) throw StatsError("Spearman needs n >= 4");
  if (IsConstant(x) || IsConstant(y)) throw StatsError("Spearman of a constant vector");
  const std::vector<double> rx = MidRanks(x);
  const std::vector<double> ry = MidRanks(y);
  const double rho = PearsonCorrelation(rx, ry);
  TestResult r;
  r.statistic = rho;
  r.effect = rho;
  r.n = n;
  const bool exact =
      method == SpearmanPValue::kExact || (method == SpearmanPValue::kAuto && n <= kExactSpearmanMaxN);
  r.p_value = exact ? ExactSpearmanP(rx, ry, rho) : PValueFromT(rho, n - 2);
  return r;
}

TestResult PartialSpearman(std::span<const double> target, std::span<const double> focal,
                           const std::vector<std::vector<double>>& controls) {
  RequireSameLength(target, focal);
  for (const auto& c : controls) RequireSameLength(target, c);
  const int n = static_cast<int>(target.size());
  const int k = static_cast<int>(controls.size());
  if (n <= k + 2) throw StatsError("partial Spearman needs n > controls + 2");
  if (k == 0) return Spearman(target, focal, SpearmanPValue::kTApprox);

  std::vector<std::vector<double>> ranked;
  ranked.push_back(MidRanks(target));
  ranked.push_back(MidRanks(focal));
  for (const auto& c : controls) ranked.push_back(MidRanks(c));
  const int m = k + 2;
  Eigen::MatrixXd corr(m, m);
  for (int i = 0; i < m; ++i) {
    corr(i, i) = 1.0;
    for (int j = i + 1; j < m; ++j) {
      corr(i, j) = corr(j, i) = PearsonCorrelation(ranked[i], ranked[j]);
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(corr);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible()) throw StatsError("singular correlation matrix (collinear controls)");
  const Eigen::MatrixXd precision = lu.inverse();
  const double r =
      std::clamp(-precision(0, 1) / std::sqrt(precision(0, 0) * precision(1, 1)), -1.0, 1.0);
  TestResult out;
  out.statistic = r;
  out.effect = r;
  out.n = n;
  out.p_value = PValueFromT(r, n - 2 - k);
  return out;
}

TestResult OlsSlopeTest(std::span<const double> x, std::span<const double> y) {
  RequireSameLength(x, y);
  const int n = static_cast<int>(x.size());
  if (n < 3) throw StatsError("OLS slope test needs n >= 3");
  if (IsConstant(x)) throw StatsError("OLS slope test with constant x");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  TestResult out;
  out.effect = slope;
  out.n = n;
  if (syy == 0.0) {
    out.effect = 0.0;
    out.statistic = 0.0;
    out.p_value = 1.0;
    return out;
  }
  const double rss = std::max(0.0, syy - slope * sxy);
  if (rss <= 1e-24 * syy) {
    out.statistic = slope > 0 ? std::numeric_limits<double>::infinity()
                              : -std::numeric_limits<double>::infinity();
    out.p_value = 0.0;
    return out;
  }
  const double se = std::sqrt(rss / (n - 2) / sxx);
  out.statistic = slope / se;
  out.p_value = StudentTTwoSided(out.statistic, n - 2);
  return out;
}

namespace {

struct PooledRanks {
  std::vector<double> mean_rank;
  std::vector<int> sizes;
  int total = 0;
  double tie_sum = 0.0;
};

PooledRanks Pool(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw StatsError("need at least 2 groups");
  std::vector<double> all;
  for (const auto& g : groups) {
    if (g.empty()) throw StatsError("empty group");
    all.insert(all.end(), g.begin(), g.end());
  }
  if (all.size() < 5) throw StatsError("need at least 5 observations in total");
  if (IsConstant(all)) throw StatsError("all values identical");
  const std::vector<double> ranks = MidRanks(all);
  PooledRanks pooled;
  pooled.total = static_cast<int>(all.size());
  pooled.tie_sum = TieSum(all);
  size_t offset = 0;
  for (const auto& g : groups) {
    double sum = 0.0;
    for (size_t i = 0; i < g.size(); ++i) sum += ranks[offset + i];
    pooled.mean_rank.push_back(sum / g.size());
    pooled.sizes.push_back(static_cast<int>(g.size()));
    offset += g.size();
  }
  return pooled;
}

}  // namespace

TestResult KruskalWallis(const std::vector<std::vector<double>>& groups) {
  const PooledRanks pooled = Pool(groups);
  const double n = pooled.total;
  double sum = 0.0;
  for (size_t i = 0; i < groups.size(); ++i) {
    const double r = pooled.mean_rank[i] * pooled.sizes[i];
    sum += r * r / pooled.sizes[i];
  }
  const double h_raw = 12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0);
  const double correction = 1.0 - pooled.tie_sum / (n * n * n - n);
  if (correction <= 0.0) throw StatsError("all values identical");
  TestResult out;
  out.statistic = std::max(0.0, h_raw / correction);
  out.effect = out.statistic;
  out.n = pooled.total;
  out.p_value = ChiSquareUpper(out.statistic, static_cast<double>(groups.size() - 1));
  return out;
}

std::vector<double> HolmAdjust(std::span<const double> p_values) {
  const size_t m = p_values.size();
  std::vector<size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return p_values[a] < p_values[b]; });
  std::vector<double> adjusted(m);
  double running = 0.0;
  for (size_t k = 0; k < m; ++k) {
    const double candidate = std::min(1.0, static_cast<double>(m - k) * p_values[order[k]]);
    running = std::max(running, candidate);
    adjusted[order[k]] = running;
  }
  return adjusted;
}

std::vector<DunnComparison> DunnHolm(const std::vector<std::vector<double>>& groups) {
  const PooledRanks pooled = Pool(groups);
  const double n = pooled.total;
  const double base = n * (n + 1.0) / 12.0 - pooled.tie_sum / (12.0 * (n - 1.0));
  std::vector<DunnComparison> out;
  for (size_t i = 0; i < groups.size(); ++i) {
    for (size_t j = i + 1; j < groups.size(); ++j) {
      DunnComparison c;
      c.first = static_cast<int>(i);
      c.second = static_cast<int>(j);
      const double se = std::sqrt(base * (1.0 / pooled.sizes[i] + 1.0 / pooled.sizes[j]));
      c.z = (pooled.mean_rank[i] - pooled.mean_rank[j]) / se;
      c.p_raw = NormalTwoSided(c.z);
      out.push_back(c);
    }
  }
  std::vector<double> raw;
  for (const auto& c : out) raw.push_back(c.p_raw);
  const std::vector<double> adjusted = HolmAdjust(raw);
  for (size_t k = 0; k < out.size(); ++k) out[k].p_adjusted = adjusted[k];
  return out;
}

}  // namespace graphemic::stats
