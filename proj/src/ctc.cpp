// src/ctc.cpp
//
// Copyright 2026  The robunits Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "robunits/ctc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "robunits/error.hpp"

namespace robunits {

double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b <= kLogZero) return a;
  return a + std::log1p(std::exp(b - a));
}

namespace {

double log_mul(double a, double b) {
  if (a <= kLogZero || b <= kLogZero) return kLogZero;
  return std::max(a + b, kLogZero);
}

void check_problem(const Matrix& logits, std::span<const int> target) {
  if (logits.cols() < 1) throw ValidationError("ctc: logits need at least the blank column");
  const int blank = static_cast<int>(logits.cols()) - 1;
  for (int u : target)
    if (u < 0 || u >= blank) throw ValidationError("ctc: target unit out of range");
  for (double v : logits.data())
    if (!std::isfinite(v)) throw NumericError("ctc: non-finite logit");
}

void check_feasible(const Matrix& logits, std::span<const int> target) {
  if (!ctc_feasible(logits.rows(), target)) {
    std::ostringstream os;
    os << "ctc: target of length " << target.size() << " needs " << ctc_min_frames(target)
       << " frames, got " << logits.rows();
    throw InfeasibleError(os.str());
  }
}

// Blank-interleaved label sequence: blank, y1, blank, y2, ..., blank.
std::vector<int> interleave(std::span<const int> target, int blank) {
  std::vector<int> ext(2 * target.size() + 1, blank);
  for (std::size_t i = 0; i < target.size(); ++i) ext[2 * i + 1] = target[i];
  return ext;
}

// Whether state s may be entered from s - 2 (skipping a blank).
bool can_skip(const std::vector<int>& ext, std::size_t s, int blank) {
  return s >= 2 && ext[s] != blank && ext[s] != ext[s - 2];
}

}  // namespace

Matrix log_softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t t = 0; t < logits.rows(); ++t) {
    const auto row = logits.row(t);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double v : row) sum += std::exp(v - mx);
    const double lse = mx + std::log(sum);
    auto o = out.row(t);
    for (std::size_t k = 0; k < row.size(); ++k) o[k] = row[k] - lse;
  }
  return out;
}

std::size_t ctc_min_frames(std::span<const int> target) {
  std::size_t n = target.size();
  for (std::size_t i = 1; i < target.size(); ++i)
    if (target[i] == target[i - 1]) ++n;
  return n;
}

bool ctc_feasible(std::size_t num_frames, std::span<const int> target) {
  return num_frames >= ctc_min_frames(target) && (num_frames > 0 || target.empty());
}

CtcResult ctc_loss_and_grad(const Matrix& logits, std::span<const int> target) {
  check_problem(logits, target);
  check_feasible(logits, target);
  const std::size_t T = logits.rows();
  const std::size_t C = logits.cols();
  const int blank = static_cast<int>(C) - 1;
  CtcResult result;
  result.grad = Matrix(T, C);
  if (T == 0) return result;  // empty target, empty input: probability 1

  const Matrix lp = log_softmax(logits);
  const auto ext = interleave(target, blank);
  const std::size_t S = ext.size();

  // alpha(t, s): log prob of emitting frames 0..t and ending in state s.
  Matrix alpha(T, S, kLogZero);
  alpha(0, 0) = lp(0, blank);
  if (S > 1) alpha(0, 1) = lp(0, ext[1]);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      double a = alpha(t - 1, s);
      if (s >= 1) a = log_add(a, alpha(t - 1, s - 1));
      if (can_skip(ext, s, blank)) a = log_add(a, alpha(t - 1, s - 2));
      alpha(t, s) = log_mul(a, lp(t, ext[s]));
    }
  }
  double log_p = alpha(T - 1, S - 1);
  if (S > 1) log_p = log_add(log_p, alpha(T - 1, S - 2));
  if (log_p <= kLogZero / 2) throw InfeasibleError("ctc: target has zero probability");
  result.loss = -log_p;

  // beta(t, s): log prob of emitting frames t+1..T-1 given state s at t.
  Matrix beta(T, S, kLogZero);
  beta(T - 1, S - 1) = 0.0;
  if (S > 1) beta(T - 1, S - 2) = 0.0;
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t s = 0; s < S; ++s) {
      double b = log_mul(beta(t + 1, s), lp(t + 1, ext[s]));
      if (s + 1 < S) b = log_add(b, log_mul(beta(t + 1, s + 1), lp(t + 1, ext[s + 1])));
      if (s + 2 < S && can_skip(ext, s + 2, blank))
        b = log_add(b, log_mul(beta(t + 1, s + 2), lp(t + 1, ext[s + 2])));
      beta(t, s) = b;
    }
  }

  // grad = softmax - state occupancy per label.
  std::vector<double> occupancy(C);
  for (std::size_t t = 0; t < T; ++t) {
    std::fill(occupancy.begin(), occupancy.end(), 0.0);
    for (std::size_t s = 0; s < S; ++s) {
      const double g = log_mul(alpha(t, s), beta(t, s));
      if (g > kLogZero) occupancy[static_cast<std::size_t>(ext[s])] += std::exp(g - log_p);
    }
    auto grow = result.grad.row(t);
    for (std::size_t k = 0; k < C; ++k) grow[k] = std::exp(lp(t, k)) - occupancy[k];
  }
  return result;
}

double ctc_loss(const Matrix& logits, std::span<const int> target) {
  return ctc_loss_and_grad(logits, target).loss;
}

Matrix ctc_grad(const Matrix& logits, std::span<const int> target) {
  return ctc_loss_and_grad(logits, target).grad;
}

double ctc_brute_force(const Matrix& logits, std::span<const int> target) {
  check_problem(logits, target);
  const std::size_t T = logits.rows();
  const std::size_t C = logits.cols();
  const int blank = static_cast<int>(C) - 1;
  double paths = 1.0;
  for (std::size_t t = 0; t < T; ++t) paths *= static_cast<double>(C);
  if (paths > 1e6) throw SizeError("ctc_brute_force: more than 1e6 paths");

  const Matrix lp = log_softmax(logits);
  const auto n_paths = static_cast<std::size_t>(paths);
  std::vector<int> path(T, 0);
  std::vector<int> collapsed;
  double total = 0.0;
  for (std::size_t p = 0; p < n_paths; ++p) {
    std::size_t code = p;
    for (std::size_t t = 0; t < T; ++t) {
      path[t] = static_cast<int>(code % C);
      code /= C;
    }
    collapsed.clear();
    int prev = -1;
    for (int a : path) {
      if (a != blank && a != prev) collapsed.push_back(a);
      prev = a;
    }
    if (!std::equal(collapsed.begin(), collapsed.end(), target.begin(), target.end())) continue;
    double log_prob = 0.0;
    for (std::size_t t = 0; t < T; ++t) log_prob += lp(t, static_cast<std::size_t>(path[t]));
    total += std::exp(log_prob);
  }
  if (total <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(total);
}

}  // namespace robunits
