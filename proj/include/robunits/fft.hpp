// include/robunits/fft.hpp
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

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace robunits {

using Complex = std::complex<double>;

// In-place iterative radix-2 FFT with precomputed twiddles.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);

  // Shared immutable plan for size n; thread-safe.
  static const FftPlan& cached(std::size_t n);

  std::size_t size() const { return n_; }

  void forward(std::span<Complex> data) const { transform(data, false); }
  // Unscaled inverse; divide by size() for a true inverse.
  void inverse(std::span<Complex> data) const { transform(data, true); }

  // Spectra (bins 0..n/2) of two real inputs of length <= n, zero-padded,
  // computed with one complex transform. `work` must hold n values.
  void forward_real_pair(std::span<const double> a, std::span<const double> b,
                         std::span<Complex> spec_a, std::span<Complex> spec_b,
                         std::span<Complex> work) const;
  // Unscaled inverses of two Hermitian half spectra (bins 0..n/2); the
  // imaginary parts of bins 0 and n/2 are ignored.
  void inverse_real_pair(std::span<const Complex> spec_a, std::span<const Complex> spec_b,
                         std::span<double> a, std::span<double> b,
                         std::span<Complex> work) const;

 private:
  void transform(std::span<Complex> data, bool inverse) const;

  std::size_t n_;
  std::vector<Complex> twiddles_;
  std::vector<std::size_t> bitrev_;
};

std::size_t next_pow2(std::size_t n);
bool is_pow2(std::size_t n);

// Periodic Hann window (the STFT convention).
std::vector<double> hann_window(std::size_t n);

// Linear convolution via FFT; length a.size() + b.size() - 1.
std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b);

}  // namespace robunits
