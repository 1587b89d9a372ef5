// src/encoder.cpp
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

#include "robunits/encoder.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "robunits/error.hpp"
#include "robunits/fft.hpp"

namespace robunits {

std::size_t EncoderConfig::window_samples() const {
  return static_cast<std::size_t>(std::llround(window_ms * sample_rate / 1000.0));
}

std::size_t EncoderConfig::hop_samples() const {
  return static_cast<std::size_t>(std::llround(hop_ms * sample_rate / 1000.0));
}

void EncoderConfig::validate() const {
  if (sample_rate <= 0) throw ValidationError("EncoderConfig: sample_rate must be positive");
  if (hop_samples() == 0) throw ValidationError("EncoderConfig: hop must be positive");
  if (hop_ms > window_ms) throw ValidationError("EncoderConfig: hop_ms > window_ms");
  if (!is_pow2(n_fft) || n_fft < window_samples())
    throw ValidationError("EncoderConfig: n_fft must be a power of two >= window");
  if (n_mels == 0) throw ValidationError("EncoderConfig: n_mels must be positive");
  if (!(fmin >= 0.0 && fmin < fmax && fmax <= sample_rate / 2.0))
    throw ValidationError("EncoderConfig: need 0 <= fmin < fmax <= sample_rate/2");
  if (!(log_floor > 0.0)) throw ValidationError("EncoderConfig: log floor must be positive");
}

std::size_t frame_count(std::size_t signal_len, const EncoderConfig& config) {
  const std::size_t window = config.window_samples();
  const std::size_t hop = config.hop_samples();
  if (signal_len < window) return 0;
  return 1 + (signal_len - window) / hop;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

LogMelEncoder::LogMelEncoder(EncoderConfig config) : config_(config) {
  config_.validate();
  const std::size_t n_bins = config_.n_fft / 2 + 1;
  const double mel_lo = hz_to_mel(config_.fmin);
  const double mel_hi = hz_to_mel(config_.fmax);
  mel_points_hz_.resize(config_.n_mels + 2);
  for (std::size_t i = 0; i < mel_points_hz_.size(); ++i)
    mel_points_hz_[i] =
        mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / (config_.n_mels + 1));
  filterbank_ = Matrix(config_.n_mels, n_bins);
  for (std::size_t m = 0; m < config_.n_mels; ++m) {
    const double lo = mel_points_hz_[m];
    const double center = mel_points_hz_[m + 1];
    const double hi = mel_points_hz_[m + 2];
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * config_.sample_rate / config_.n_fft;
      double w = 0.0;
      if (f > lo && f <= center) w = (f - lo) / (center - lo);
      else if (f > center && f < hi) w = (hi - f) / (hi - center);
      filterbank_(m, k) = w;
    }
  }
  bin_ranges_.resize(config_.n_mels);
  for (std::size_t m = 0; m < config_.n_mels; ++m) {
    const auto w = filterbank_.row(m);
    std::size_t b = 0, e = n_bins;
    while (b < n_bins && w[b] == 0.0) ++b;
    while (e > b && w[e - 1] == 0.0) --e;
    bin_ranges_[m] = {b, e};
  }
  window_ = hann_window(config_.window_samples());
}

std::pair<double, double> LogMelEncoder::band_edges(std::size_t m) const {
  return {mel_points_hz_.at(m), mel_points_hz_.at(m + 2)};
}

std::size_t LogMelEncoder::frame_count(std::size_t signal_len) const {
  return robunits::frame_count(signal_len, config_);
}

FrameSequence LogMelEncoder::encode(const Signal& signal) const {
  if (signal.sample_rate != config_.sample_rate)
    throw ValidationError("LogMelEncoder: signal sample rate does not match encoder");
  const std::size_t n_frames = frame_count(signal.size());
  const std::size_t window = config_.window_samples();
  const std::size_t hop = config_.hop_samples();
  const std::size_t n_bins = config_.n_fft / 2 + 1;
  const double log_floor = std::log(config_.log_floor);

  FrameSequence out;
  out.frame_rate = static_cast<double>(config_.sample_rate) / hop;
  out.frames = Matrix(n_frames, config_.n_mels);
  const FftPlan& plan = FftPlan::cached(config_.n_fft);
  std::vector<Complex> work(config_.n_fft), spec_a(n_bins), spec_b(n_bins);
  std::vector<double> frame_a(window), frame_b(window), power(n_bins);

  // Returns false for an all-zero frame.
  auto fill = [&](std::size_t t, std::vector<double>& buf) {
    const double* x = signal.samples.data() + t * hop;
    bool silent = true;
    for (std::size_t i = 0; i < window; ++i) {
      buf[i] = x[i] * window_[i];
      silent = silent && x[i] == 0.0;
    }
    return !silent;
  };
  auto emit = [&](std::size_t t, bool voiced, const std::vector<Complex>& spec) {
    auto row = out.frames.row(t);
    if (!voiced) {
      std::fill(row.begin(), row.end(), log_floor);
      return;
    }
    for (std::size_t k = 0; k < n_bins; ++k) power[k] = std::norm(spec[k]);
    for (std::size_t m = 0; m < config_.n_mels; ++m) {
      const auto weights = filterbank_.row(m);
      const auto [b, e] = bin_ranges_[m];
      double acc = 0.0;
      for (std::size_t k = b; k < e; ++k) acc += weights[k] * power[k];
      row[m] = std::log(acc + config_.log_floor);
    }
  };

  // Frames are transformed two at a time.
  for (std::size_t t = 0; t < n_frames; t += 2) {
    const bool va = fill(t, frame_a);
    const bool has_b = t + 1 < n_frames;
    const bool vb = has_b && fill(t + 1, frame_b);
    if (!has_b) std::fill(frame_b.begin(), frame_b.end(), 0.0);
    plan.forward_real_pair(frame_a, frame_b, spec_a, spec_b, work);
    emit(t, va, spec_a);
    if (has_b) emit(t + 1, vb, spec_b);
  }
  return out;
}

std::vector<FrameSequence> encode_batch(const FrameEncoder& encoder,
                                        std::span<const Signal> signals, Exec exec) {
  std::vector<FrameSequence> out(signals.size());
  parallel_for(signals.size(), exec, [&](std::size_t i) { out[i] = encoder.encode(signals[i]); });
  return out;
}

// ---------------------------------------------------------------------------
// Feature files

namespace {

constexpr char kFeatureMagic[4] = {'R', 'U', 'F', 'T'};
constexpr std::uint32_t kFeatureVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}

void put_f32(std::vector<std::uint8_t>& out, float f) {
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  put_u32(out, u);
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[pos + i];
  return v;
}

float get_f32(std::span<const std::uint8_t> b, std::size_t pos) {
  const std::uint32_t u = get_u32(b, pos);
  float f;
  std::memcpy(&f, &u, 4);
  return f;
}

}  // namespace

std::vector<std::uint8_t> encode_features(const FrameSequence& seq) {
  std::vector<std::uint8_t> out;
  out.reserve(20 + seq.frames.data().size() * 4);
  out.insert(out.end(), kFeatureMagic, kFeatureMagic + 4);
  put_u32(out, kFeatureVersion);
  put_u32(out, static_cast<std::uint32_t>(seq.num_frames()));
  put_u32(out, static_cast<std::uint32_t>(seq.dim()));
  put_f32(out, static_cast<float>(seq.frame_rate));
  for (double v : seq.frames.data()) put_f32(out, static_cast<float>(v));
  return out;
}

FrameSequence decode_features(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 20) throw FormatError("feature file: truncated header");
  if (std::memcmp(bytes.data(), kFeatureMagic, 4) != 0)
    throw FormatError("feature file: bad magic");
  if (get_u32(bytes, 4) != kFeatureVersion)
    throw FormatError("feature file: unsupported version");
  const std::size_t rows = get_u32(bytes, 8);
  const std::size_t cols = get_u32(bytes, 12);
  FrameSequence seq;
  seq.frame_rate = get_f32(bytes, 16);
  if (bytes.size() != 20 + rows * cols * 4) throw FormatError("feature file: truncated data");
  seq.frames = Matrix(rows, cols);
  auto data = seq.frames.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = get_f32(bytes, 20 + 4 * i);
    if (!std::isfinite(data[i])) throw FormatError("feature file: non-finite value");
  }
  return seq;
}

void save_features(const FrameSequence& seq, const std::filesystem::path& path) {
  const auto bytes = encode_features(seq);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

FrameSequence load_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_features(bytes);
}

}  // namespace robunits
