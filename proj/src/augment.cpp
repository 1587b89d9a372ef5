// src/augment.cpp
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

#include "robunits/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "robunits/error.hpp"
#include "robunits/fft.hpp"

namespace robunits {

namespace {
constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
}  // namespace

std::string_view aug_kind_name(AugKind kind) {
  switch (kind) {
    case AugKind::kIdentity: return "identity";
    case AugKind::kTime: return "time";
    case AugKind::kPitch: return "pitch";
    case AugKind::kReverb: return "reverb";
    case AugKind::kNoise: return "noise";
  }
  return "unknown";
}

AugKind parse_aug_kind(std::string_view name) {
  for (AugKind k : {AugKind::kIdentity, AugKind::kTime, AugKind::kPitch, AugKind::kReverb,
                    AugKind::kNoise})
    if (aug_kind_name(k) == name) return k;
  throw ValidationError("unknown augmentation kind: " + std::string(name));
}

// ---------------------------------------------------------------------------
// Phase vocoder

Signal time_stretch(const Signal& signal, double rate, const PhaseVocoderConfig& cfg) {
  if (!(rate > 0.0)) throw ValidationError("time_stretch: rate must be positive");
  const std::size_t n_fft = cfg.n_fft;
  const std::size_t hop = cfg.hop;
  if (!is_pow2(n_fft) || hop == 0 || hop > n_fft)
    throw ValidationError("time_stretch: bad phase vocoder config");
  const std::size_t len = signal.size();
  if (len < n_fft)
    throw DegenerateInputError("time_stretch: signal shorter than one analysis window");

  const std::size_t n_bins = n_fft / 2 + 1;
  const std::size_t pad = n_fft / 2;
  const std::size_t n_frames = 1 + len / hop;
  const auto window = hann_window(n_fft);
  const FftPlan& plan = FftPlan::cached(n_fft);

  // Analysis on the zero-padded (centered) signal, two frames per
  // transform. One trailing zero frame lets the interpolation read frame
  // i + 1 at the end.
  std::vector<Complex> spec((n_frames + 1) * n_bins, Complex{});
  std::vector<Complex> work(n_fft), half_a(n_bins), half_b(n_bins);
  std::vector<double> frame_a(n_fft), frame_b(n_fft, 0.0);
  auto fill = [&](std::size_t f, std::vector<double>& buf) {
    for (std::size_t i = 0; i < n_fft; ++i) {
      const std::size_t pos = f * hop + i;
      const double x = (pos >= pad && pos - pad < len) ? signal.samples[pos - pad] : 0.0;
      buf[i] = x * window[i];
    }
  };
  for (std::size_t f = 0; f < n_frames; f += 2) {
    fill(f, frame_a);
    if (f + 1 < n_frames) fill(f + 1, frame_b);
    else std::fill(frame_b.begin(), frame_b.end(), 0.0);
    plan.forward_real_pair(frame_a, frame_b, half_a, half_b, work);
    std::copy(half_a.begin(), half_a.end(), spec.begin() + static_cast<std::ptrdiff_t>(f * n_bins));
    if (f + 1 < n_frames)
      std::copy(half_b.begin(), half_b.end(),
                spec.begin() + static_cast<std::ptrdiff_t>((f + 1) * n_bins));
  }

  std::vector<double> phase_advance(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k)
    phase_advance[k] = 2.0 * kPi * static_cast<double>(k * hop) / n_fft;

  std::vector<double> mags(spec.size()), args(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    mags[i] = std::abs(spec[i]);
    args[i] = std::arg(spec[i]);
  }
  std::vector<double> phase(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(n_bins));

  const auto n_out_frames =
      static_cast<std::size_t>(std::ceil(static_cast<double>(n_frames) / rate));
  const std::size_t out_total = n_fft + hop * (n_out_frames - 1);
  std::vector<double> out(out_total, 0.0);
  std::vector<double> win_sum(out_total, 0.0);

  // Synthesis frames are produced in order (the phase accumulates) and
  // inverted two at a time.
  std::vector<std::vector<Complex>> pending(2, std::vector<Complex>(n_bins));
  auto overlap_add = [&](std::size_t j, const std::vector<double>& frame) {
    const std::size_t offset = j * hop;
    for (std::size_t n = 0; n < n_fft; ++n) {
      out[offset + n] += frame[n] / static_cast<double>(n_fft) * window[n];
      win_sum[offset + n] += window[n] * window[n];
    }
  };
  for (std::size_t j = 0; j < n_out_frames; ++j) {
    const double t = static_cast<double>(j) * rate;
    const auto i = std::min(static_cast<std::size_t>(t), n_frames - 1);
    const double alpha = t - static_cast<double>(i);
    const double* mag_a = &mags[i * n_bins];
    const double* mag_b = &mags[(i + 1) * n_bins];
    const double* arg_a = &args[i * n_bins];
    const double* arg_b = &args[(i + 1) * n_bins];
    auto& cur = pending[j % 2];
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double mag = (1.0 - alpha) * mag_a[k] + alpha * mag_b[k];
      cur[k] = std::polar(mag, phase[k]);
      double dphase = arg_b[k] - arg_a[k] - phase_advance[k];
      dphase -= 2.0 * kPi * std::round(dphase / (2.0 * kPi));
      phase[k] += phase_advance[k] + dphase;
    }
    if (j % 2 == 1 || j + 1 == n_out_frames) {
      if (j % 2 == 0) std::fill(pending[1].begin(), pending[1].end(), Complex{});
      plan.inverse_real_pair(pending[0], pending[1], frame_a, frame_b, work);
      const std::size_t first = j - j % 2;
      overlap_add(first, frame_a);
      if (j % 2 == 1) overlap_add(j, frame_b);
    }
  }
  constexpr double kTiny = 1e-10;
  for (std::size_t n = 0; n < out_total; ++n)
    if (win_sum[n] > kTiny) out[n] /= win_sum[n];

  const auto target_len =
      static_cast<std::size_t>(std::llround(static_cast<double>(len) / rate));
  Signal result;
  result.sample_rate = signal.sample_rate;
  result.samples.assign(target_len, 0.0);
  for (std::size_t n = 0; n < target_len && n + pad < out_total; ++n)
    result.samples[n] = out[n + pad];
  return result;
}

Signal pitch_shift(const Signal& signal, double semitones, const PhaseVocoderConfig& cfg) {
  if (semitones == 0.0) {
    if (signal.size() < cfg.n_fft)
      throw DegenerateInputError("pitch_shift: signal shorter than one analysis window");
    return signal;
  }
  const double rate = std::pow(2.0, -semitones / 12.0);
  const Signal stretched = time_stretch(signal, rate, cfg);
  Signal out;
  out.sample_rate = signal.sample_rate;
  out.samples = resample_ratio(stretched.samples, rate);
  out.samples.resize(signal.size(), 0.0);
  return out;
}

// ---------------------------------------------------------------------------
// Room simulation

void RoomConfig::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (!(dims[a] > 0.0)) throw ValidationError("RoomConfig: dimensions must be positive");
    if (!(source[a] > 0.0 && source[a] < dims[a]))
      throw ValidationError("RoomConfig: source outside the room");
    if (!(mic[a] > 0.0 && mic[a] < dims[a]))
      throw ValidationError("RoomConfig: microphone outside the room");
  }
  if (!(absorption > 0.0 && absorption <= 1.0))
    throw ValidationError("RoomConfig: absorption must be in (0, 1]");
  if (max_order < 0) throw ValidationError("RoomConfig: max_order must be >= 0");
}

std::vector<ImageSource> enumerate_image_sources(const RoomConfig& config) {
  config.validate();
  const int n_max = config.max_order;
  const double reflection = 1.0 - config.absorption;
  std::vector<ImageSource> images;
  for (int nx = -n_max; nx <= n_max; ++nx)
    for (int qx = 0; qx < 2; ++qx)
      for (int ny = -n_max; ny <= n_max; ++ny)
        for (int qy = 0; qy < 2; ++qy)
          for (int nz = -n_max; nz <= n_max; ++nz)
            for (int qz = 0; qz < 2; ++qz) {
              const std::array<int, 3> n{nx, ny, nz};
              const std::array<int, 3> q{qx, qy, qz};
              int order = 0;
              for (int a = 0; a < 3; ++a) order += std::abs(n[a] - q[a]) + std::abs(n[a]);
              if (order > config.max_order) continue;
              if (order > 0 && reflection == 0.0) continue;
              ImageSource img{};
              double d2 = 0.0;
              for (int a = 0; a < 3; ++a) {
                img.position[a] = (1 - 2 * q[a]) * config.source[a] + 2.0 * n[a] * config.dims[a];
                const double diff = img.position[a] - config.mic[a];
                d2 += diff * diff;
              }
              img.reflections = order;
              img.distance = std::sqrt(d2);
              img.gain = std::pow(reflection, order) / (4.0 * kPi * img.distance);
              images.push_back(img);
            }
  return images;
}

Signal simulate_rir(const RoomConfig& config, int sample_rate) {
  if (sample_rate <= 0) throw ValidationError("simulate_rir: sample_rate must be positive");
  const auto images = enumerate_image_sources(config);
  constexpr int kHalf = kRirSincTaps / 2;
  double max_delay = 0.0;
  for (const auto& img : images)
    max_delay = std::max(max_delay, img.distance / kSpeedOfSound * sample_rate);
  const auto length = static_cast<std::size_t>(std::ceil(max_delay)) + kHalf + 1;
  Signal rir;
  rir.sample_rate = sample_rate;
  rir.samples.assign(length, 0.0);
  for (const auto& img : images) {
    const double delay = img.distance / kSpeedOfSound * sample_rate;
    const auto center = static_cast<std::int64_t>(std::floor(delay));
    for (std::int64_t n = center - kHalf; n <= center + kHalf + 1; ++n) {
      if (n < 0 || n >= static_cast<std::int64_t>(length)) continue;
      const double x = static_cast<double>(n) - delay;
      if (std::abs(x) > kRirSincTaps / 2.0) continue;
      const double sinc = x == 0.0 ? 1.0 : std::sin(kPi * x) / (kPi * x);
      const double window = 0.5 * (1.0 + std::cos(2.0 * kPi * x / kRirSincTaps));
      rir.samples[static_cast<std::size_t>(n)] += img.gain * sinc * window;
    }
  }
  return rir;
}

namespace {

double peak(std::span<const double> x) {
  double p = 0.0;
  for (double v : x) p = std::max(p, std::abs(v));
  return p;
}

std::vector<double> direct_convolve(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

}  // namespace

Signal reverberate(const Signal& signal, const Signal& rir) {
  if (signal.empty() || rir.empty())
    throw ValidationError("reverberate: signal and rir must be non-empty");
  constexpr std::size_t kDirectLimit = 64;
  Signal out;
  out.sample_rate = signal.sample_rate;
  out.samples = std::min(signal.size(), rir.size()) <= kDirectLimit
                    ? direct_convolve(signal.samples, rir.samples)
                    : fft_convolve(signal.samples, rir.samples);
  const double in_peak = peak(signal.samples);
  const double out_peak = peak(out.samples);
  if (out_peak > 0.0) {
    const double scale = in_peak / out_peak;
    for (double& v : out.samples) v *= scale;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Noise

std::string_view noise_source_name(NoiseSource s) {
  switch (s) {
    case NoiseSource::kWhite: return "white";
    case NoiseSource::kPink: return "pink";
    case NoiseSource::kBabble: return "babble";
    case NoiseSource::kFile: return "file";
  }
  return "unknown";
}

NoiseSource parse_noise_source(std::string_view name) {
  for (NoiseSource s :
       {NoiseSource::kWhite, NoiseSource::kPink, NoiseSource::kBabble, NoiseSource::kFile})
    if (noise_source_name(s) == name) return s;
  throw ValidationError("unknown noise source: " + std::string(name));
}

double mean_power(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

namespace {

void normalize_rms(std::vector<double>& x) {
  const double p = mean_power(x);
  if (p <= 0.0) return;
  const double s = 1.0 / std::sqrt(p);
  for (double& v : x) v *= s;
}

// Two-pole resonator (Klatt form) with unity gain at DC.
class Resonator {
 public:
  Resonator(double freq, double bandwidth, int sample_rate) {
    const double r = std::exp(-kPi * bandwidth / sample_rate);
    c_ = -r * r;
    b_ = 2.0 * r * std::cos(2.0 * kPi * freq / sample_rate);
    a_ = 1.0 - b_ - c_;
  }
  double operator()(double x) {
    const double y = a_ * x + b_ * y1_ + c_ * y2_;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double a_, b_, c_;
  double y1_ = 0.0, y2_ = 0.0;
};

}  // namespace

std::vector<double> generate_noise(NoiseSource source, std::size_t length, Rng& rng,
                                   int sample_rate) {
  std::vector<double> out(length, 0.0);
  switch (source) {
    case NoiseSource::kWhite:
      for (double& v : out) v = rng.normal();
      break;
    case NoiseSource::kPink: {
      // Paul Kellet's refined pink filter.
      double b0 = 0, b1 = 0, b2 = 0, b3 = 0, b4 = 0, b5 = 0, b6 = 0;
      for (double& v : out) {
        const double w = rng.normal();
        b0 = 0.99886 * b0 + w * 0.0555179;
        b1 = 0.99332 * b1 + w * 0.0750759;
        b2 = 0.96900 * b2 + w * 0.1538520;
        b3 = 0.86650 * b3 + w * 0.3104856;
        b4 = 0.55000 * b4 + w * 0.5329522;
        b5 = -0.7616 * b5 - w * 0.0168980;
        v = b0 + b1 + b2 + b3 + b4 + b5 + b6 + w * 0.5362;
        b6 = w * 0.115926;
      }
      break;
    }
    case NoiseSource::kBabble: {
      // Several band-passed noise "talkers" with slow syllable-rate envelopes.
      constexpr int kTalkers = 6;
      for (int k = 0; k < kTalkers; ++k) {
        Resonator res(rng.uniform(300.0, 3000.0), rng.uniform(200.0, 600.0), sample_rate);
        const double mod_hz = rng.uniform(2.0, 6.0);
        const double mod_phase = rng.uniform(0.0, 2.0 * kPi);
        for (std::size_t n = 0; n < length; ++n) {
          const double env =
              0.5 * (1.0 + std::sin(2.0 * kPi * mod_hz * n / sample_rate + mod_phase));
          out[n] += env * env * res(rng.normal());
        }
      }
      break;
    }
    case NoiseSource::kFile:
      throw ValidationError("generate_noise: file noise comes from a NoiseBank");
  }
  normalize_rms(out);
  return out;
}

NoiseBank NoiseBank::from_directory(const std::filesystem::path& dir, int sample_rate) {
  if (!std::filesystem::is_directory(dir))
    throw IoError("noise directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".wav") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  NoiseBank bank;
  for (const auto& f : files) bank.add(resample(read_wav(f), sample_rate));
  if (bank.empty()) throw ValidationError("noise directory has no WAV files: " + dir.string());
  return bank;
}

void NoiseBank::add(Signal noise) {
  if (mean_power(noise.samples) <= 0.0) throw ValidationError("NoiseBank: silent noise clip");
  clips_.push_back(std::move(noise));
}

double noise_gain(double signal_power, double noise_power, double snr_db) {
  return std::sqrt(signal_power / (noise_power * std::pow(10.0, snr_db / 10.0)));
}

Signal add_noise(const Signal& signal, std::span<const double> noise, double snr_db,
                 Rng& rng) {
  if (noise.empty() || mean_power(noise) <= 0.0)
    throw ValidationError("add_noise: noise is silent");
  const double px = mean_power(signal.samples);
  if (px <= 0.0) throw DegenerateInputError("add_noise: signal is silent");
  const auto offset =
      static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(noise.size()) - 1));
  std::vector<double> segment(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i)
    segment[i] = noise[(offset + i) % noise.size()];
  const double pn = mean_power(segment);
  if (pn <= 0.0) throw ValidationError("add_noise: selected noise segment is silent");
  const double beta = noise_gain(px, pn, snr_db);
  Signal out = signal;
  for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] += beta * segment[i];
  return out;
}

// ---------------------------------------------------------------------------
// Specs and transforms

AugKind spec_kind(const AugmentationSpec& spec) {
  return std::visit(Overloaded{
                        [](const IdentitySpec&) { return AugKind::kIdentity; },
                        [](const TimeStretchSpec&) { return AugKind::kTime; },
                        [](const PitchShiftSpec&) { return AugKind::kPitch; },
                        [](const ReverbSpec&) { return AugKind::kReverb; },
                        [](const NoiseSpec&) { return AugKind::kNoise; },
                    },
                    spec);
}

AugKind transform_kind(const Transform& t) {
  return std::visit(Overloaded{
                        [](const IdentityTransform&) { return AugKind::kIdentity; },
                        [](const TimeStretchTransform&) { return AugKind::kTime; },
                        [](const PitchShiftTransform&) { return AugKind::kPitch; },
                        [](const ReverbTransform&) { return AugKind::kReverb; },
                        [](const NoiseTransform&) { return AugKind::kNoise; },
                    },
                    t);
}

void validate_spec(const AugmentationSpec& spec) {
  std::visit(
      Overloaded{
          [](const IdentitySpec&) {},
          [](const TimeStretchSpec& s) {
            if (!(s.min_rate > 0.0 && s.min_rate <= s.max_rate))
              throw ValidationError("TimeStretchSpec: need 0 < min_rate <= max_rate");
          },
          [](const PitchShiftSpec& s) {
            if (s.min_semitones > s.max_semitones)
              throw ValidationError("PitchShiftSpec: min_semitones > max_semitones");
          },
          [](const ReverbSpec& s) {
            for (int a = 0; a < 3; ++a)
              if (!(s.min_dims[a] > 2.0 * s.wall_margin && s.min_dims[a] <= s.max_dims[a]))
                throw ValidationError("ReverbSpec: bad room dimension range");
            if (!(s.min_absorption > 0.0 && s.min_absorption <= s.max_absorption &&
                  s.max_absorption <= 1.0))
              throw ValidationError("ReverbSpec: absorption range must lie in (0, 1]");
            if (s.max_order < 0) throw ValidationError("ReverbSpec: negative max_order");
          },
          [](const NoiseSpec& s) {
            if (s.min_snr_db > s.max_snr_db)
              throw ValidationError("NoiseSpec: min_snr_db > max_snr_db");
            if (s.sources.empty()) throw ValidationError("NoiseSpec: no noise sources");
          },
      },
      spec);
}

AugmentationSpec default_spec(AugKind kind) {
  switch (kind) {
    case AugKind::kIdentity: return IdentitySpec{};
    case AugKind::kTime: return TimeStretchSpec{};
    case AugKind::kPitch: return PitchShiftSpec{};
    case AugKind::kReverb: return ReverbSpec{};
    case AugKind::kNoise: return NoiseSpec{};
  }
  throw ValidationError("default_spec: unknown kind");
}

AugmentationSet AugmentationSet::of(std::initializer_list<AugKind> kinds) {
  AugmentationSet set;
  for (AugKind k : kinds) set.specs.push_back(default_spec(k));
  return set;
}

AugmentationSet AugmentationSet::all() {
  return of({AugKind::kTime, AugKind::kPitch, AugKind::kReverb, AugKind::kNoise});
}

Transform sample_transform(const AugmentationSpec& spec, Rng& rng, const NoiseBank* bank) {
  validate_spec(spec);
  return std::visit(
      Overloaded{
          [](const IdentitySpec&) -> Transform { return IdentityTransform{}; },
          [&](const TimeStretchSpec& s) -> Transform {
            return TimeStretchTransform{rng.uniform(s.min_rate, s.max_rate)};
          },
          [&](const PitchShiftSpec& s) -> Transform {
            return PitchShiftTransform{
                static_cast<int>(rng.uniform_int(s.min_semitones, s.max_semitones))};
          },
          [&](const ReverbSpec& s) -> Transform {
            RoomConfig room;
            for (int a = 0; a < 3; ++a) room.dims[a] = rng.uniform(s.min_dims[a], s.max_dims[a]);
            for (int a = 0; a < 3; ++a)
              room.source[a] = rng.uniform(s.wall_margin, room.dims[a] - s.wall_margin);
            for (int a = 0; a < 3; ++a)
              room.mic[a] = rng.uniform(s.wall_margin, room.dims[a] - s.wall_margin);
            room.absorption = rng.uniform(s.min_absorption, s.max_absorption);
            room.max_order = s.max_order;
            return ReverbTransform{room};
          },
          [&](const NoiseSpec& s) -> Transform {
            NoiseTransform t{};
            t.snr_db = rng.uniform(s.min_snr_db, s.max_snr_db);
            t.source = s.sources[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(s.sources.size()) - 1))];
            t.file_index = 0;
            if (t.source == NoiseSource::kFile) {
              if (bank == nullptr || bank->empty())
                throw ValidationError("file noise requested without a noise bank");
              t.file_index = static_cast<std::size_t>(
                  rng.uniform_int(0, static_cast<std::int64_t>(bank->size()) - 1));
            }
            t.seed = rng.next_u64();
            return t;
          },
      },
      spec);
}

Transform sample_augmentation(const AugmentationSet& set, Rng& rng) {
  if (set.specs.empty()) throw ValidationError("sample_augmentation: empty augmentation set");
  const auto idx = static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(set.specs.size()) - 1));
  return sample_transform(set.specs[idx], rng, set.noise_bank.get());
}

Signal apply_transform(const Transform& t, const Signal& signal, const NoiseBank* bank) {
  return std::visit(
      Overloaded{
          [&](const IdentityTransform&) { return signal; },
          [&](const TimeStretchTransform& s) { return time_stretch(signal, s.rate); },
          [&](const PitchShiftTransform& s) {
            return pitch_shift(signal, static_cast<double>(s.semitones));
          },
          [&](const ReverbTransform& s) {
            return reverberate(signal, simulate_rir(s.room, signal.sample_rate));
          },
          [&](const NoiseTransform& s) {
            Rng rng(s.seed);
            if (s.source == NoiseSource::kFile) {
              if (bank == nullptr || s.file_index >= bank->size())
                throw ValidationError("apply_transform: noise file not available");
              return add_noise(signal, bank->clip(s.file_index).samples, s.snr_db, rng);
            }
            const auto noise = generate_noise(s.source, signal.size(), rng, signal.sample_rate);
            return add_noise(signal, noise, s.snr_db, rng);
          },
      },
      t);
}

}  // namespace robunits
