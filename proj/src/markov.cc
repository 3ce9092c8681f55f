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

#include "graphemic/markov.h"

#include <cmath>
#include <random>
#include <string>

#include "graphemic/random.h"

namespace graphemic {
namespace {

constexpr double kResidualTolerance = 1e-12;

int Idx(Symbol s) { return static_cast<int>(s); }

void CheckProbability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw MarkovError(std::string(what) + " = " + std::to_string(p) + " is not a probability");
  }
}

// Strong connectivity of the support graph of a 4x4 stochastic matrix.
bool Irreducible(const Eigen::Matrix4d& q) {
  std::array<std::array<bool, 4>, 4> reach{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) reach[i][j] = (i == j) || q(i, j) > 0.0;
  }
  for (int k = 0; k < 4; ++k) {
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) reach[i][j] = reach[i][j] || (reach[i][k] && reach[k][j]);
    }
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (!reach[i][j]) return false;
    }
  }
  return true;
}

}  // namespace

double TwoStateModel::StationaryVowel() const {
  const double denom = 1.0 - p1 + p0;
  if (denom <= 0.0) throw MarkovError("two-state chain has no unique stationary distribution");
  return p0 / denom;
}

TwoStateModel TwoStateModel::FromProbabilities(double p1, double p0) {
  CheckProbability(p1, "p1");
  CheckProbability(p0, "p0");
  TwoStateModel m;
  m.p1 = p1;
  m.p0 = p0;
  return m;
}

std::string_view PairStateName(PairState s) {
  static constexpr std::string_view kNames[] = {"VV", "VC", "CV", "CC"};
  return kNames[static_cast<int>(s)];
}

PairState MakePair(Symbol first, Symbol second) {
  int idx = (first == Symbol::kConsonant ? 2 : 0) + (second == Symbol::kConsonant ? 1 : 0);
  return static_cast<PairState>(idx);
}

Eigen::Matrix4d FourStateModel::TransitionMatrix() const {
  Eigen::Matrix4d q = Eigen::Matrix4d::Zero();
  for (int s = 0; s < 4; ++s) {
    Symbol last = PairLast(static_cast<PairState>(s));
    q(s, static_cast<int>(MakePair(last, Symbol::kVowel))) = p_vowel[s];
    q(s, static_cast<int>(MakePair(last, Symbol::kConsonant))) = 1.0 - p_vowel[s];
  }
  return q;
}

FourStateModel FourStateModel::FromProbabilities(const std::array<double, 4>& p_vowel) {
  for (double p : p_vowel) CheckProbability(p, "p_ab");
  FourStateModel m;
  m.p_vowel = p_vowel;
  return m;
}

FourStateModel FourStateModel::FromTwoState(const TwoStateModel& model) {
  std::array<double, 4> p{};
  for (int s = 0; s < 4; ++s) {
    p[s] = PairLast(static_cast<PairState>(s)) == Symbol::kVowel ? model.p1 : model.p0;
  }
  return FromProbabilities(p);
}

TwoStateModel EstimateTwoState(std::span<const Symbol> seq) {
  if (seq.size() < 2) throw MarkovError("two-state estimation needs at least 2 symbols");
  TwoStateModel m;
  m.n = static_cast<long>(seq.size());
  for (size_t i = 1; i < seq.size(); ++i) ++m.counts[Idx(seq[i - 1])][Idx(seq[i])];
  for (int from = 0; from < 2; ++from) {
    if (m.counts[from][0] + m.counts[from][1] == 0) {
      throw MarkovError(std::string("symbol ") + (from == 1 ? "V" : "C") +
                        " never occurs as a transition source");
    }
  }
  const auto& v = m.counts[Idx(Symbol::kVowel)];
  const auto& c = m.counts[Idx(Symbol::kConsonant)];
  m.p1 = static_cast<double>(v[1]) / (v[0] + v[1]);
  m.p0 = static_cast<double>(c[1]) / (c[0] + c[1]);
  return m;
}

FourStateModel EstimateFourState(std::span<const Symbol> seq) {
  if (seq.size() < 3) throw MarkovError("four-state estimation needs at least 3 symbols");
  FourStateModel m;
  m.n = static_cast<long>(seq.size());
  for (size_t i = 2; i < seq.size(); ++i) {
    ++m.counts[static_cast<int>(MakePair(seq[i - 2], seq[i - 1]))][Idx(seq[i])];
  }
  for (int s = 0; s < 4; ++s) {
    const long total = m.counts[s][0] + m.counts[s][1];
    if (total == 0) {
      throw MarkovError("pair state " + std::string(PairStateName(static_cast<PairState>(s))) +
                        " is never observed");
    }
    m.p_vowel[s] = static_cast<double>(m.counts[s][1]) / total;
  }
  return m;
}

Eigen::VectorXd SolvePartialPivot(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.size() != n) throw MarkovError("linear system shape mismatch");
  Eigen::MatrixXd m = a;
  Eigen::VectorXd rhs = b;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot;
    m.col(col).tail(n - col).cwiseAbs().maxCoeff(&pivot);
    pivot += col;
    if (std::abs(m(pivot, col)) < 1e-13 * scale) throw MarkovError("singular linear system");
    m.row(col).swap(m.row(pivot));
    std::swap(rhs(col), rhs(pivot));
    for (Eigen::Index r = col + 1; r < n; ++r) {
      const double f = m(r, col) / m(col, col);
      m.row(r).tail(n - col) -= f * m.row(col).tail(n - col);
      rhs(r) -= f * rhs(col);
    }
  }
  Eigen::VectorXd x(n);
  for (Eigen::Index r = n - 1; r >= 0; --r) {
    x(r) = (rhs(r) - m.row(r).tail(n - r - 1).dot(x.tail(n - r - 1))) / m(r, r);
  }
  const double residual = (a * x - b).cwiseAbs().maxCoeff();
  if (residual > kResidualTolerance * scale * std::max(1.0, x.cwiseAbs().maxCoeff())) {
    throw MarkovError("linear solve residual " + std::to_string(residual) + " above tolerance");
  }
  return x;
}

std::array<double, 4> StationaryDistribution(const FourStateModel& model) {
  const Eigen::Matrix4d q = model.TransitionMatrix();
  if (!Irreducible(q)) throw MarkovError("pair chain is reducible");
  // (Q^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
  Eigen::MatrixXd a = q.transpose() - Eigen::Matrix4d::Identity();
  a.row(3).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(4);
  rhs(3) = 1.0;
  Eigen::VectorXd pi = SolvePartialPivot(a, rhs);
  return {pi(0), pi(1), pi(2), pi(3)};
}

double CfTwoState(const TwoStateModel& model) {
  const double r = model.r();
  if (r >= 1.0) throw MarkovError("two-state chain is absorbing (p1 - p0 = 1)");
  return (1.0 + r) / (1.0 - r);
}

double CfFourState(const FourStateModel& model) {
  const std::array<double, 4> pi_arr = StationaryDistribution(model);
  const Eigen::Matrix4d q = model.TransitionMatrix();
  Eigen::Vector4d pi(pi_arr[0], pi_arr[1], pi_arr[2], pi_arr[3]);
  Eigen::Vector4d f;
  for (int s = 0; s < 4; ++s) f(s) = PairLast(static_cast<PairState>(s)) == Symbol::kVowel;
  const double p = pi.dot(f);
  if (p <= 0.0 || p >= 1.0) throw MarkovError("stationary vowel probability is degenerate");
  const Eigen::Vector4d g = f.array() - p;

  const Eigen::Matrix4d pi_rows = Eigen::Vector4d::Ones() * pi.transpose();
  const Eigen::MatrixXd fundamental = Eigen::Matrix4d::Identity() - q + pi_rows;
  // Z g, solved directly rather than by forming Z.
  const Eigen::VectorXd zg = SolvePartialPivot(fundamental, g);

  double var0 = 0.0, cross = 0.0;
  for (int i = 0; i < 4; ++i) {
    var0 += pi(i) * g(i) * g(i);
    cross += pi(i) * g(i) * zg(i);
  }
  const double sigma2 = 2.0 * cross - var0;
  return sigma2 / (p * (1.0 - p));
}

DependencyIndex ComputeDependencyIndex(std::span<const Symbol> seq, const Rescale& rescale) {
  DependencyIndex idx;
  idx.rescale = rescale;
  idx.cf_simple = CfTwoState(EstimateTwoState(seq));
  idx.cf = CfFourState(EstimateFourState(seq));
  idx.md_simple = MemoryDepth(idx.cf_simple, rescale);
  idx.md = MemoryDepth(idx.cf, rescale);
  return idx;
}

std::vector<Symbol> SimulateChain(const TwoStateModel& model, size_t length, uint64_t seed,
                                  std::optional<Symbol> start) {
  std::mt19937_64 rng(seed);
  std::vector<Symbol> out;
  out.reserve(length);
  if (length == 0) return out;
  Symbol s = start ? *start
                   : (Uniform01(rng) < model.StationaryVowel() ? Symbol::kVowel
                                                               : Symbol::kConsonant);
  out.push_back(s);
  for (size_t i = 1; i < length; ++i) {
    const double pv = s == Symbol::kVowel ? model.p1 : model.p0;
    s = Uniform01(rng) < pv ? Symbol::kVowel : Symbol::kConsonant;
    out.push_back(s);
  }
  return out;
}

std::vector<Symbol> SimulateChain(const FourStateModel& model, size_t length, uint64_t seed,
                                  std::optional<PairState> start) {
  std::mt19937_64 rng(seed);
  std::vector<Symbol> out;
  out.reserve(length);
  if (length == 0) return out;
  PairState state;
  if (start) {
    state = *start;
  } else {
    const std::array<double, 4> pi = StationaryDistribution(model);
    double u = Uniform01(rng);
    int s = 0;
    while (s < 3 && u >= pi[s]) u -= pi[s++];
    state = static_cast<PairState>(s);
  }
  const int first = static_cast<int>(state);
  out.push_back((first & 2) ? Symbol::kConsonant : Symbol::kVowel);
  if (length > 1) out.push_back(PairLast(state));
  for (size_t i = 2; i < length; ++i) {
    const Symbol next =
        Uniform01(rng) < model.p_vowel[static_cast<int>(state)] ? Symbol::kVowel : Symbol::kConsonant;
    out.push_back(next);
    state = MakePair(PairLast(state), next);
  }
  return out;
}

double BlockVarianceOracle(std::span<const Symbol> seq, size_t block_len) {
  if (block_len < 100) throw MarkovError("block length must be at least 100");
  if (seq.size() < 100 * block_len) {
    throw MarkovError("sequence of length " + std::to_string(seq.size()) +
                      " is too short for 100 blocks of " + std::to_string(block_len));
  }
  const size_t blocks = seq.size() / block_len;
  std::vector<double> counts(blocks, 0.0);
  double total = 0.0;
  for (size_t b = 0; b < blocks; ++b) {
    long c = 0;
    for (size_t i = b * block_len; i < (b + 1) * block_len; ++i) c += seq[i] == Symbol::kVowel;
    counts[b] = static_cast<double>(c);
    total += counts[b];
  }
  const double mean = total / blocks;
  double ss = 0.0;
  for (double c : counts) ss += (c - mean) * (c - mean);
  const double var = ss / (blocks - 1);
  const double p = mean / block_len;
  if (p <= 0.0 || p >= 1.0) throw MarkovError("sequence contains a single symbol");
  return var / (block_len * p * (1.0 - p));
}

}  // namespace graphemic
