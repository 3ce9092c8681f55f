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

// Two- and four-state Markov models of a V/C sequence and the dispersion
// coefficient of the vowel count.
//
// The dispersion coefficient is the asymptotic variance of the number of
// vowels in n symbols divided by the binomial variance n p (1 - p). It is 1
// for an independent sequence, below 1 when the sequence prefers to
// alternate and above 1 when it prefers runs.
//
// For the two-state chain with r = P(V|V) - P(V|C) it is (1 + r) / (1 - r).
// For the four-state chain on overlapping pairs (VV, VC, CV, CC) it is
// computed exactly from the fundamental matrix Z = (I - Q + 1 pi)^-1:
//
//   sigma^2 = 2 sum_i pi_i g_i (Z g)_i - sum_i pi_i g_i^2,   g = f - p
//
// where f marks the pair states ending in a vowel.

#ifndef GRAPHEMIC_MARKOV_H_
#define GRAPHEMIC_MARKOV_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "graphemic/vc_encoder.h"

namespace graphemic {

class MarkovError : public Error {
 public:
  using Error::Error;
};

struct TwoStateModel {
  double p1 = 0.0;  // P(V | previous V)
  double p0 = 0.0;  // P(V | previous C)
  // counts[from][to], indexed by Symbol (C = 0, V = 1).
  std::array<std::array<long, 2>, 2> counts{};
  long n = 0;

  double r() const { return p1 - p0; }
  // Stationary vowel probability. Throws MarkovError when it is not unique.
  double StationaryVowel() const;

  static TwoStateModel FromProbabilities(double p1, double p0);
};

enum class PairState : uint8_t { kVV = 0, kVC = 1, kCV = 2, kCC = 3 };

std::string_view PairStateName(PairState s);
PairState MakePair(Symbol first, Symbol second);
inline Symbol PairLast(PairState s) {
  return (static_cast<int>(s) & 1) ? Symbol::kConsonant : Symbol::kVowel;
}

struct FourStateModel {
  // P(next = V | pair), in PairState order VV, VC, CV, CC.
  std::array<double, 4> p_vowel{};
  // counts[pair][next], next indexed by Symbol.
  std::array<std::array<long, 2>, 4> counts{};
  long n = 0;

  double p(PairState s) const { return p_vowel[static_cast<int>(s)]; }
  double p11() const { return p(PairState::kVV); }
  double q00() const { return 1.0 - p(PairState::kCC); }
  double p10() const { return p(PairState::kVC); }
  double p01() const { return p(PairState::kCV); }

  // 4x4 pair transition matrix; row (a,b) has mass only on (b,V), (b,C).
  Eigen::Matrix4d TransitionMatrix() const;

  static FourStateModel FromProbabilities(const std::array<double, 4>& p_vowel);
  // The order-1 chain written on pair states: p_ab depends on b only.
  static FourStateModel FromTwoState(const TwoStateModel& model);
};

struct Rescale {
  double a = -1.0;
  double b = 1.0;
};

struct DependencyIndex {
  double cf_simple = 0.0;
  double cf = 0.0;
  double md_simple = 0.0;
  double md = 0.0;
  Rescale rescale;
};

// Maximum-likelihood estimates from raw transition counts, no smoothing.
TwoStateModel EstimateTwoState(std::span<const Symbol> seq);
FourStateModel EstimateFourState(std::span<const Symbol> seq);

// Solves pi Q = pi, sum pi = 1 by Gaussian elimination with partial
// pivoting. Throws MarkovError for reducible chains.
std::array<double, 4> StationaryDistribution(const FourStateModel& model);

double CfTwoState(const TwoStateModel& model);
double CfFourState(const FourStateModel& model);

inline double MemoryDepth(double cf, const Rescale& rescale = {}) {
  return rescale.a * cf + rescale.b;
}

DependencyIndex ComputeDependencyIndex(std::span<const Symbol> seq, const Rescale& rescale = {});

// Seeded simulation. The first state is drawn from the stationary
// distribution unless `start` is given.
std::vector<Symbol> SimulateChain(const TwoStateModel& model, size_t length, uint64_t seed,
                                  std::optional<Symbol> start = std::nullopt);
std::vector<Symbol> SimulateChain(const FourStateModel& model, size_t length, uint64_t seed,
                                  std::optional<PairState> start = std::nullopt);

// Sample variance of vowel counts over disjoint blocks of block_len symbols,
// divided by block_len p (1 - p) with p the observed vowel rate. Requires
// block_len >= 100 and at least 100 blocks.
double BlockVarianceOracle(std::span<const Symbol> seq, size_t block_len);

// Linear solve with partial pivoting; throws MarkovError when a pivot
// vanishes or the residual exceeds 1e-12 (relative).
Eigen::VectorXd SolvePartialPivot(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

}  // namespace graphemic

#endif  // GRAPHEMIC_MARKOV_H_
