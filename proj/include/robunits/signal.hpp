// include/robunits/signal.hpp
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

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace robunits {

inline constexpr int kCanonicalSampleRate = 16000;

// Mono waveform. Samples are nominally in [-1, 1]; augmentation output may
// overshoot slightly and is clipped only when written to disk.
struct Signal {
  std::vector<double> samples;
  int sample_rate = kCanonicalSampleRate;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }

  // Throws ValidationError on a non-positive rate or non-finite samples.
  void validate() const;
};

// Deterministic random stream. Built on std::mt19937_64, whose output
// sequence is fixed by the standard; the distributions below are our own so
// that draws are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Uniform in [lo, hi); returns lo when lo == hi.
  double uniform(double lo, double hi);
  // Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  // Standard normal via Box-Muller (one value per call, no caching).
  double normal();

  // Child stream for (purpose, index):
  //   splitmix64(root ^ fnv1a64(tag) ^ splitmix64(index + 1))
  static std::uint64_t derive_seed(std::uint64_t root, std::string_view tag,
                                   std::uint64_t index = 0);
  Rng derive(std::string_view tag, std::uint64_t index = 0) const {
    return Rng(derive_seed(seed_, tag, index));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);

enum class WavEncoding { kPcm16, kFloat32 };

// Reads PCM16 or IEEE float32 RIFF/WAVE. Multi-channel input is averaged
// to mono. PCM16 values are scaled by 1/32768.
Signal read_wav(const std::filesystem::path& path);
Signal parse_wav(std::span<const std::uint8_t> bytes);

// Writes the signal; PCM16 output hard-clips to [-1, 1] and logs a warning.
// Returns the number of clipped samples.
std::size_t write_wav(const Signal& signal, const std::filesystem::path& path,
                      WavEncoding encoding = WavEncoding::kPcm16);
std::vector<std::uint8_t> encode_wav(const Signal& signal, WavEncoding encoding,
                                     std::size_t* clipped = nullptr);

// Band-limited (64-tap Kaiser-windowed sinc) resampling.
// Output length is round(len * target_rate / sample_rate).
Signal resample(const Signal& signal, int target_rate);

// Resamples by an arbitrary positive ratio (output rate / input rate).
std::vector<double> resample_ratio(std::span<const double> samples, double ratio);

}  // namespace robunits
