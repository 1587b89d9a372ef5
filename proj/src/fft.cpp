// src/fft.cpp
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

#include "robunits/fft.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "robunits/error.hpp"

namespace robunits {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

FftPlan::FftPlan(std::size_t n) : n_(n) {
  if (!is_pow2(n)) throw ValidationError("FftPlan: size must be a power of two");
  twiddles_.resize(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / n;
    twiddles_[k] = {std::cos(angle), std::sin(angle)};
  }
  bitrev_.resize(n);
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b)
      if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
    bitrev_[i] = r;
  }
}

const FftPlan& FftPlan::cached(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::unique_ptr<FftPlan>> plans;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = plans[n];
  if (!slot) slot = std::make_unique<FftPlan>(n);
  return *slot;
}

void FftPlan::forward_real_pair(std::span<const double> a, std::span<const double> b,
                                std::span<Complex> spec_a, std::span<Complex> spec_b,
                                std::span<Complex> work) const {
  const std::size_t half = n_ / 2;
  if (a.size() > n_ || b.size() > n_ || work.size() != n_ || spec_a.size() < half + 1 ||
      spec_b.size() < half + 1)
    throw ValidationError("FftPlan: buffer size mismatch");
  std::fill(work.begin(), work.end(), Complex{});
  for (std::size_t i = 0; i < a.size(); ++i) work[i].real(a[i]);
  for (std::size_t i = 0; i < b.size(); ++i) work[i].imag(b[i]);
  forward(work);
  for (std::size_t k = 0; k <= half; ++k) {
    const Complex zk = work[k];
    const Complex zn = std::conj(work[(n_ - k) & (n_ - 1)]);
    spec_a[k] = 0.5 * (zk + zn);
    spec_b[k] = Complex(0.0, -0.5) * (zk - zn);
  }
}

void FftPlan::inverse_real_pair(std::span<const Complex> spec_a, std::span<const Complex> spec_b,
                                std::span<double> a, std::span<double> b,
                                std::span<Complex> work) const {
  const std::size_t half = n_ / 2;
  if (work.size() != n_ || spec_a.size() < half + 1 || spec_b.size() < half + 1 ||
      a.size() != n_ || b.size() != n_)
    throw ValidationError("FftPlan: buffer size mismatch");
  const Complex i1(0.0, 1.0);
  work[0] = Complex(spec_a[0].real(), spec_b[0].real());
  work[half] = Complex(spec_a[half].real(), spec_b[half].real());
  for (std::size_t k = 1; k < half; ++k) {
    work[k] = spec_a[k] + i1 * spec_b[k];
    work[n_ - k] = std::conj(spec_a[k]) + i1 * std::conj(spec_b[k]);
  }
  inverse(work);
  for (std::size_t i = 0; i < n_; ++i) {
    a[i] = work[i].real();
    b[i] = work[i].imag();
  }
}

void FftPlan::transform(std::span<Complex> data, bool inverse) const {
  if (data.size() != n_) throw ValidationError("FftPlan: buffer size mismatch");
  for (std::size_t i = 0; i < n_; ++i)
    if (i < bitrev_[i]) std::swap(data[i], data[bitrev_[i]]);
  // Complex products are expanded by hand; std::complex multiplication
  // goes through a slow NaN-aware path without -ffast-math.
  const double sign = inverse ? -1.0 : 1.0;
  double* d = reinterpret_cast<double*>(data.data());
  for (std::size_t len = 2; len <= n_; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n_ / len;
    for (std::size_t start = 0; start < n_; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const double wr = twiddles_[k * stride].real();
        const double wi = sign * twiddles_[k * stride].imag();
        double* u = d + 2 * (start + k);
        double* v = d + 2 * (start + k + half);
        const double vr = v[0] * wr - v[1] * wi;
        const double vi = v[0] * wi + v[1] * wr;
        v[0] = u[0] - vr;
        v[1] = u[1] - vi;
        u[0] += vr;
        u[1] += vi;
      }
    }
  }
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / n);
  return w;
}

std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = next_pow2(out_len);
  const FftPlan& plan = FftPlan::cached(n);
  // Pack both real inputs into one complex transform: z = a + i*b.
  std::vector<Complex> z(n);
  for (std::size_t i = 0; i < a.size(); ++i) z[i].real(a[i]);
  for (std::size_t i = 0; i < b.size(); ++i) z[i].imag(b[i]);
  plan.forward(z);
  std::vector<Complex> prod(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Complex zk = z[k];
    const Complex zn = std::conj(z[(n - k) % n]);
    const Complex fa = 0.5 * (zk + zn);
    const Complex fb = Complex(0.0, -0.5) * (zk - zn);
    prod[k] = fa * fb;
  }
  plan.inverse(prod);
  std::vector<double> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) out[i] = prod[i].real() / n;
  return out;
}

}  // namespace robunits
