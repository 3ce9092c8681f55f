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

#ifndef GRAPHEMIC_STATS_H_
#define GRAPHEMIC_STATS_H_

#include <optional>
#include <span>
#include <vector>

#include "graphemic/text.h"

namespace graphemic::stats {

class StatsError : public Error {
 public:
  using Error::Error;
};

struct TestResult {
  double statistic = 0.0;  // rho, t, H or z depending on the test
  double p_value = 1.0;
  std::optional<double> effect;
  int n = 0;
};

// Average ranks for ties, 1-based.
std::vector<double> MidRanks(std::span<const double> values);

// Sum of (t^3 - t) over tie groups.
double TieSum(std::span<const double> values);

double PearsonCorrelation(std::span<const double> x, std::span<const double> y);

enum class SpearmanPValue {
  kAuto,     // exact permutation for n <= kExactSpearmanMaxN, t otherwise
  kTApprox,  // t = rho sqrt((n - 2) / (1 - rho^2)) on n - 2 df
  kExact,    // full enumeration, n <= 10
};

inline constexpr int kExactSpearmanMaxN = 8;

// rho is the Pearson correlation of mid-ranks; two-sided p. n >= 4.
TestResult Spearman(std::span<const double> x, std::span<const double> y,
                    SpearmanPValue method = SpearmanPValue::kAuto);

// Rank-transforms all variables, then the partial Pearson correlation of
// target and focal given controls from the inverse correlation matrix.
// p from t on n - 2 - k df.
TestResult PartialSpearman(std::span<const double> target, std::span<const double> focal,
                           const std::vector<std::vector<double>>& controls);

// Least-squares slope with a two-sided t-test on n - 2 df. statistic = t,
// effect = slope.
TestResult OlsSlopeTest(std::span<const double> x, std::span<const double> y);

// H with tie correction; p from chi-square on g - 1 df.
TestResult KruskalWallis(const std::vector<std::vector<double>>& groups);

struct DunnComparison {
  int first = 0;   // group indices, first < second
  int second = 0;
  double z = 0.0;  // positive when `first` has the higher mean rank
  double p_raw = 1.0;
  double p_adjusted = 1.0;  // Holm
};

// All pairwise Dunn comparisons in (0,1), (0,2), ..., (1,2), ... order.
std::vector<DunnComparison> DunnHolm(const std::vector<std::vector<double>>& groups);

// Holm step-down adjustment, returned in input order.
std::vector<double> HolmAdjust(std::span<const double> p_values);

// Two-sided tail probabilities.
double StudentTTwoSided(double t, double df);
double NormalTwoSided(double z);
double ChiSquareUpper(double x, double df);

}  // namespace graphemic::stats

#endif  // GRAPHEMIC_STATS_H_
