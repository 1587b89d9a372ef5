// src/signal.cpp
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

#include "robunits/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>

#include "robunits/error.hpp"
#include "robunits/log.hpp"

namespace robunits {

void Signal::validate() const {
  if (sample_rate <= 0) throw ValidationError("Signal: sample_rate must be positive");
  for (double s : samples)
    if (!std::isfinite(s)) throw ValidationError("Signal: non-finite sample");
}

// ---------------------------------------------------------------------------
// Rng

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t Rng::derive_seed(std::uint64_t root, std::string_view tag,
                               std::uint64_t index) {
  return splitmix64(root ^ fnv1a64(tag) ^ splitmix64(index + 1));
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  if (lo == hi) return lo;
  return lo + (hi - lo) * uniform();
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw ValidationError("Rng::uniform_int: empty range");
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(engine_());
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return lo + static_cast<std::int64_t>(r % span);
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// ---------------------------------------------------------------------------
// WAV

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t pos() const { return pos_; }

  void need(std::size_t n) const {
    if (remaining() < n) throw FormatError("WAV: truncated file");
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = bytes_[pos_] | (bytes_[pos_ + 1] << 8);
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[pos_ + i];
    pos_ += 4;
    return v;
  }
  std::string tag() {
    need(4);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), 4);
    pos_ += 4;
    return s;
  }
  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(v & 0xFF);
  out.push_back(v >> 8);
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace

Signal parse_wav(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.remaining() < 12) throw FormatError("WAV: truncated header");
  if (r.tag() != "RIFF") throw FormatError("WAV: missing RIFF tag");
  r.u32();
  if (r.tag() != "WAVE") throw FormatError("WAV: missing WAVE tag");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  while (true) {
    if (r.remaining() < 8) throw FormatError("WAV: no data chunk");
    const std::string id = r.tag();
    const std::uint32_t size = r.u32();
    if (id == "fmt ") {
      if (size < 16) throw FormatError("WAV: fmt chunk too small");
      r.need(size);
      const std::size_t start = r.pos();
      format = r.u16();
      channels = r.u16();
      rate = r.u32();
      r.u32();  // byte rate
      r.u16();  // block align
      bits = r.u16();
      if (format == kFormatExtensible) {
        if (size < 40) throw FormatError("WAV: extensible fmt chunk too small");
        r.u16();  // cbSize
        r.u16();  // valid bits
        r.u32();  // channel mask
        format = r.u16();  // first two bytes of the subformat GUID
      }
      r.skip(size - (r.pos() - start));
      if (size % 2) r.skip(std::min<std::size_t>(1, r.remaining()));
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw FormatError("WAV: data chunk before fmt chunk");
      if (channels == 0) throw FormatError("WAV: zero channels");
      if (rate == 0) throw FormatError("WAV: zero sample rate");
      const bool pcm16 = format == kFormatPcm && bits == 16;
      const bool f32 = format == kFormatFloat && bits == 32;
      if (!pcm16 && !f32) {
        std::ostringstream os;
        os << "WAV: unsupported encoding (format " << format << ", " << bits
           << " bits)";
        throw UnsupportedError(os.str());
      }
      const auto payload = r.take(size);
      const std::size_t frame_bytes = static_cast<std::size_t>(channels) * bits / 8;
      const std::size_t frames = payload.size() / frame_bytes;
      Signal sig;
      sig.sample_rate = static_cast<int>(rate);
      sig.samples.resize(frames);
      for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
          const std::uint8_t* p = payload.data() + i * frame_bytes + c * bits / 8;
          if (pcm16) {
            const auto v = static_cast<std::int16_t>(p[0] | (p[1] << 8));
            acc += v / 32768.0;
          } else {
            std::uint32_t u = p[0] | (p[1] << 8) | (p[2] << 16) |
                              (static_cast<std::uint32_t>(p[3]) << 24);
            float f;
            std::memcpy(&f, &u, 4);
            acc += f;
          }
        }
        sig.samples[i] = acc / channels;
      }
      sig.validate();
      return sig;
    } else {
      r.skip(size);
      if (size % 2 && r.remaining() > 0) r.skip(1);
    }
  }
}

Signal read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_wav(bytes);
}

std::vector<std::uint8_t> encode_wav(const Signal& signal, WavEncoding encoding,
                                     std::size_t* clipped) {
  signal.validate();
  const bool pcm16 = encoding == WavEncoding::kPcm16;
  const std::uint16_t bits = pcm16 ? 16 : 32;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(signal.size() * bits / 8);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, pcm16 ? kFormatPcm : kFormatFloat);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(signal.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(signal.sample_rate) * bits / 8);
  put_u16(out, bits / 8);
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  std::size_t n_clipped = 0;
  for (double s : signal.samples) {
    if (pcm16) {
      if (s > 1.0 || s < -1.0) ++n_clipped;
      const double v = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
      put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
    } else {
      const float f = static_cast<float>(s);
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      put_u32(out, u);
    }
  }
  if (clipped) *clipped = n_clipped;
  return out;
}

std::size_t write_wav(const Signal& signal, const std::filesystem::path& path,
                      WavEncoding encoding) {
  std::size_t clipped = 0;
  const auto bytes = encode_wav(signal, encoding, &clipped);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
  if (clipped > 0)
    log_warning("write_wav: clipped " + std::to_string(clipped) + " samples in " +
                path.string());
  return clipped;
}

// ---------------------------------------------------------------------------
// Resampling

namespace {

constexpr int kHalfTaps = 32;
constexpr int kTableResolution = 1024;
constexpr double kKaiserBeta = 8.6;

// sinc(x) * kaiser(x / kHalfTaps) for x in [0, kHalfTaps], tabulated.
const std::vector<double>& kernel_table() {
  static const std::vector<double> table = [] {
    const std::size_t n = kHalfTaps * kTableResolution + 2;
    std::vector<double> t(n, 0.0);
    const double norm = std::cyl_bessel_i(0.0, kKaiserBeta);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = static_cast<double>(i) / kTableResolution;
      if (x >= kHalfTaps) break;
      const double u = x / kHalfTaps;
      const double kaiser = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - u * u)) / norm;
      const double sinc = x == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
      t[i] = sinc * kaiser;
    }
    return t;
  }();
  return table;
}

double kernel_at(double x) {
  x = std::abs(x);
  if (x >= kHalfTaps) return 0.0;
  const auto& t = kernel_table();
  const double pos = x * kTableResolution;
  const auto i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  return t[i] + frac * (t[i + 1] - t[i]);
}

}  // namespace

std::vector<double> resample_ratio(std::span<const double> samples, double ratio) {
  if (!(ratio > 0.0)) throw ValidationError("resample: ratio must be positive");
  const auto out_len =
      static_cast<std::size_t>(std::llround(static_cast<double>(samples.size()) * ratio));
  std::vector<double> out(out_len, 0.0);
  if (samples.empty()) return out;
  const double cutoff = std::min(1.0, ratio);
  const double half_width = kHalfTaps / cutoff;
  const auto n_in = static_cast<std::int64_t>(samples.size());
  for (std::size_t n = 0; n < out_len; ++n) {
    const double t = static_cast<double>(n) / ratio;
    const auto lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(t - half_width)));
    const auto hi = std::min<std::int64_t>(n_in - 1, static_cast<std::int64_t>(std::floor(t + half_width)));
    double acc = 0.0;
    for (std::int64_t k = lo; k <= hi; ++k)
      acc += samples[k] * kernel_at((t - static_cast<double>(k)) * cutoff);
    out[n] = acc * cutoff;
  }
  return out;
}

Signal resample(const Signal& signal, int target_rate) {
  if (target_rate <= 0) throw ValidationError("resample: target_rate must be positive");
  if (target_rate == signal.sample_rate) return signal;
  Signal out;
  out.sample_rate = target_rate;
  out.samples = resample_ratio(signal.samples,
                               static_cast<double>(target_rate) / signal.sample_rate);
  return out;
}

}  // namespace robunits
