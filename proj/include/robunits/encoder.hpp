// include/robunits/encoder.hpp
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
#include <memory>
#include <span>
#include <vector>

#include "robunits/exec.hpp"
#include "robunits/matrix.hpp"
#include "robunits/signal.hpp"

namespace robunits {

// T' x D continuous features plus their frame rate.
struct FrameSequence {
  Matrix frames;
  double frame_rate = 50.0;

  std::size_t num_frames() const { return frames.rows(); }
  std::size_t dim() const { return frames.cols(); }
};

struct EncoderConfig {
  double window_ms = 25.0;
  double hop_ms = 20.0;
  std::size_t n_fft = 512;
  std::size_t n_mels = 80;
  double fmin = 0.0;
  double fmax = 8000.0;
  double log_floor = 1e-10;
  int sample_rate = kCanonicalSampleRate;

  std::size_t window_samples() const;
  std::size_t hop_samples() const;
  void validate() const;
};

// 1 + floor((len - window) / hop) for len >= window, else 0.
std::size_t frame_count(std::size_t signal_len, const EncoderConfig& config);

// The frame encoder f. Implementations are stateless and never trained.
class FrameEncoder {
 public:
  virtual ~FrameEncoder() = default;
  virtual FrameSequence encode(const Signal& signal) const = 0;
  virtual std::size_t frame_count(std::size_t signal_len) const = 0;
  virtual std::size_t dim() const = 0;
};

// HTK mel scale: 2595 * log10(1 + f / 700).
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// log(mel_filterbank(|STFT|^2) + eps) with a Hann analysis window.
class LogMelEncoder final : public FrameEncoder {
 public:
  explicit LogMelEncoder(EncoderConfig config = {});

  FrameSequence encode(const Signal& signal) const override;
  std::size_t frame_count(std::size_t signal_len) const override;
  std::size_t dim() const override { return config_.n_mels; }

  const EncoderConfig& config() const { return config_; }
  // n_mels x (n_fft/2 + 1) triangular weights.
  const Matrix& filterbank() const { return filterbank_; }
  // Lower and upper edge (Hz) of mel filter m.
  std::pair<double, double> band_edges(std::size_t m) const;

 private:
  EncoderConfig config_;
  Matrix filterbank_;
  std::vector<double> window_;
  std::vector<double> mel_points_hz_;
  std::vector<std::pair<std::size_t, std::size_t>> bin_ranges_;  // non-zero weights
};

// Encodes many signals; parallel over signals.
std::vector<FrameSequence> encode_batch(const FrameEncoder& encoder,
                                        std::span<const Signal> signals,
                                        Exec exec = Exec::kParallel);

// Precomputed feature file, all fields little-endian:
//   bytes 0-3   magic "RUFT"
//   u32         version (1)
//   u32         T' (frames)
//   u32         D (dim)
//   f32         frame rate (Hz)
//   f32[T'*D]   frames, row-major
void save_features(const FrameSequence& seq, const std::filesystem::path& path);
FrameSequence load_features(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_features(const FrameSequence& seq);
FrameSequence decode_features(std::span<const std::uint8_t> bytes);

}  // namespace robunits
