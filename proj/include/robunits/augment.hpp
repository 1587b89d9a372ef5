// include/robunits/augment.hpp
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

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "robunits/signal.hpp"

namespace robunits {

// Augmentation families. kIdentity is the no-op used for sanity checks.
enum class AugKind { kIdentity, kTime, kPitch, kReverb, kNoise };

std::string_view aug_kind_name(AugKind kind);
AugKind parse_aug_kind(std::string_view name);

// ---------------------------------------------------------------------------
// Phase vocoder

struct PhaseVocoderConfig {
  std::size_t n_fft = 2048;
  std::size_t hop = 512;
};

// Time-scale modification without pitch change. rate > 1 shortens the
// signal; output length is round(len / rate).
// Throws DegenerateInputError when the signal is shorter than n_fft.
Signal time_stretch(const Signal& signal, double rate,
                    const PhaseVocoderConfig& cfg = {});

// Shifts pitch by `semitones` while keeping the length: phase-vocoder
// stretch by 2^(-s/12) then resampling by 2^(s/12).
Signal pitch_shift(const Signal& signal, double semitones,
                   const PhaseVocoderConfig& cfg = {});

// ---------------------------------------------------------------------------
// Room simulation

inline constexpr double kSpeedOfSound = 343.0;
inline constexpr int kRirSincTaps = 81;

struct RoomConfig {
  std::array<double, 3> dims{6.0, 5.0, 3.0};
  std::array<double, 3> source{2.0, 2.0, 1.5};
  std::array<double, 3> mic{4.0, 3.0, 1.5};
  double absorption = 0.5;  // alpha in (0, 1]
  int max_order = 6;

  void validate() const;
};

// One image source contributing to the impulse response.
struct ImageSource {
  std::array<double, 3> position;
  int reflections;
  double distance;
  double gain;  // (1 - alpha)^reflections / (4 pi d)
};

// All image sources with reflection order <= max_order and non-zero gain.
std::vector<ImageSource> enumerate_image_sources(const RoomConfig& config);

// Image-source impulse response at `sample_rate`. Each image is a
// fractionally delayed impulse (81-tap Hann-windowed sinc).
Signal simulate_rir(const RoomConfig& config, int sample_rate = kCanonicalSampleRate);

// Full linear convolution, rescaled so the output peak equals the input peak.
Signal reverberate(const Signal& signal, const Signal& rir);

// ---------------------------------------------------------------------------
// Additive noise

enum class NoiseSource { kWhite, kPink, kBabble, kFile };

std::string_view noise_source_name(NoiseSource s);
NoiseSource parse_noise_source(std::string_view name);

// Built-in noise generators (kFile is not accepted here).
std::vector<double> generate_noise(NoiseSource source, std::size_t length, Rng& rng,
                                   int sample_rate = kCanonicalSampleRate);

// Noise recordings loaded from a flat directory of WAV files, resampled to
// the canonical rate and sorted by file name.
class NoiseBank {
 public:
  NoiseBank() = default;
  static NoiseBank from_directory(const std::filesystem::path& dir,
                                  int sample_rate = kCanonicalSampleRate);
  void add(Signal noise);

  std::size_t size() const { return clips_.size(); }
  bool empty() const { return clips_.empty(); }
  const Signal& clip(std::size_t i) const { return clips_.at(i); }

 private:
  std::vector<Signal> clips_;
};

// Scale factor beta so that P_x / P_(beta n) equals 10^(snr/10).
double noise_gain(double signal_power, double noise_power, double snr_db);
double mean_power(std::span<const double> x);

// x + beta * n, with n looped or cropped to len(x) from a random offset.
Signal add_noise(const Signal& signal, std::span<const double> noise, double snr_db,
                 Rng& rng);

// ---------------------------------------------------------------------------
// Augmentation specs (ranges) and concrete transforms (drawn parameters)

struct IdentitySpec {};

struct TimeStretchSpec {
  double min_rate = 0.8;
  double max_rate = 1.2;
};

// Integer semitone shifts drawn uniformly from [min, max].
struct PitchShiftSpec {
  int min_semitones = -4;
  int max_semitones = 4;
};

struct ReverbSpec {
  std::array<double, 3> min_dims{3.0, 3.0, 2.5};
  std::array<double, 3> max_dims{10.0, 10.0, 4.0};
  double min_absorption = 0.2;
  double max_absorption = 0.8;
  int max_order = 6;
  double wall_margin = 0.3;  // source and mic keep this distance from walls
};

struct NoiseSpec {
  double min_snr_db = 5.0;
  double max_snr_db = 15.0;
  std::vector<NoiseSource> sources{NoiseSource::kWhite, NoiseSource::kPink,
                                   NoiseSource::kBabble};
};

using AugmentationSpec =
    std::variant<IdentitySpec, TimeStretchSpec, PitchShiftSpec, ReverbSpec, NoiseSpec>;

AugKind spec_kind(const AugmentationSpec& spec);
void validate_spec(const AugmentationSpec& spec);
AugmentationSpec default_spec(AugKind kind);

struct IdentityTransform {};
struct TimeStretchTransform {
  double rate;
};
struct PitchShiftTransform {
  int semitones;
};
struct ReverbTransform {
  RoomConfig room;
};
struct NoiseTransform {
  double snr_db;
  NoiseSource source;
  std::size_t file_index;  // into the NoiseBank when source == kFile
  std::uint64_t seed;      // noise generation and crop offset
};

using Transform = std::variant<IdentityTransform, TimeStretchTransform,
                               PitchShiftTransform, ReverbTransform, NoiseTransform>;

AugKind transform_kind(const Transform& t);

// Templates sampled uniformly, then parameters uniformly within the
// template's range.
struct AugmentationSet {
  std::vector<AugmentationSpec> specs;
  std::shared_ptr<const NoiseBank> noise_bank;

  static AugmentationSet of(std::initializer_list<AugKind> kinds);
  static AugmentationSet all();
};

Transform sample_transform(const AugmentationSpec& spec, Rng& rng,
                           const NoiseBank* bank = nullptr);
Transform sample_augmentation(const AugmentationSet& set, Rng& rng);

// Applies a concrete transform. Pure function of (signal, transform, bank).
Signal apply_transform(const Transform& t, const Signal& signal,
                       const NoiseBank* bank = nullptr);

}  // namespace robunits
