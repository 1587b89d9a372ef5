// include/robunits/ctc.hpp
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

#pragma once

#include <span>

#include "robunits/matrix.hpp"

namespace robunits {

// Log-space "zero". Additions saturate at this value instead of producing
// -inf arithmetic.
inline constexpr double kLogZero = -1e30;

double log_add(double a, double b);

// Row-wise log-softmax.
Matrix log_softmax(const Matrix& logits);

// Frames needed to emit `target` (one extra frame between equal neighbours).
std::size_t ctc_min_frames(std::span<const int> target);
bool ctc_feasible(std::size_t num_frames, std::span<const int> target);

struct CtcResult {
  double loss = 0.0;
  Matrix grad;  // d loss / d logits, T' x (K + 1)
};

// Negative log-likelihood of `target` under CTC with the blank at the last
// column of `logits` (T' x (K + 1)). Throws InfeasibleError when no
// alignment exists.
double ctc_loss(const Matrix& logits, std::span<const int> target);

// Loss plus gradient with respect to the logits via forward-backward.
CtcResult ctc_loss_and_grad(const Matrix& logits, std::span<const int> target);
Matrix ctc_grad(const Matrix& logits, std::span<const int> target);

// Enumerates all (K + 1)^T' paths. Returns +inf when no path collapses to the
// target. Throws SizeError past 1e6 paths.
double ctc_brute_force(const Matrix& logits, std::span<const int> target);

}  // namespace robunits
