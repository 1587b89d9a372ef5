// tests/test_signal.cpp
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

#include "doctest.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "robunits/error.hpp"
#include "robunits/log.hpp"
#include "robunits/signal.hpp"

using namespace robunits;

namespace {

// Minimal RIFF writer, independent of the library's encoder.
std::vector<std::uint8_t> make_wav(std::uint16_t format, std::uint16_t channels,
                                   std::uint16_t bits, int rate,
                                   const std::vector<std::uint8_t>& data) {
  std::vector<std::uint8_t> out;
  auto put = [&](const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
  };
  auto u32 = [&](std::uint32_t v) { put(&v, 4); };
  auto u16 = [&](std::uint16_t v) { put(&v, 2); };
  put("RIFF", 4);
  u32(static_cast<std::uint32_t>(36 + data.size()));
  put("WAVE", 4);
  put("fmt ", 4);
  u32(16);
  u16(format);
  u16(channels);
  u32(static_cast<std::uint32_t>(rate));
  u32(static_cast<std::uint32_t>(rate * channels * bits / 8));
  u16(static_cast<std::uint16_t>(channels * bits / 8));
  u16(bits);
  put("data", 4);
  u32(static_cast<std::uint32_t>(data.size()));
  put(data.data(), data.size());
  return out;
}

template <class T>
std::vector<std::uint8_t> bytes_of(const std::vector<T>& v) {
  std::vector<std::uint8_t> b(v.size() * sizeof(T));
  std::memcpy(b.data(), v.data(), b.size());
  return b;
}

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "robunits_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("splitmix64 and fnv1a64 match published test vectors") {
  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFULL);
  CHECK(fnv1a64("") == 0xCBF29CE484222325ULL);
  CHECK(fnv1a64("a") == 0xAF63DC4C8601EC8CULL);
}

TEST_CASE("Rng wraps the standard mt19937_64 stream") {
  Rng rng(5489);
  std::uint64_t v = 0;
  for (int i = 0; i < 10000; ++i) v = rng.next_u64();
  CHECK(v == 9981545732273789042ULL);
}

TEST_CASE("Rng streams are reproducible and derived seeds follow the documented mix") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
  const std::uint64_t expect = splitmix64(7 ^ fnv1a64("noise") ^ splitmix64(3 + 1));
  CHECK(Rng::derive_seed(7, "noise", 3) == expect);
  CHECK(Rng::derive_seed(7, "noise", 3) != Rng::derive_seed(7, "noise", 4));
  CHECK(Rng::derive_seed(7, "noise", 3) != Rng::derive_seed(7, "time", 3));
}

TEST_CASE("Rng distributions respect their ranges") {
  Rng rng(1);
  bool saw_lo = false, saw_hi = false;
  for (int i = 0; i < 5000; ++i) {
    const double u = rng.uniform(0.8, 1.2);
    CHECK(u >= 0.8);
    CHECK(u < 1.2);
    const auto k = rng.uniform_int(-4, 4);
    CHECK(k >= -4);
    CHECK(k <= 4);
    saw_lo = saw_lo || k == -4;
    saw_hi = saw_hi || k == 4;
  }
  CHECK(saw_lo);
  CHECK(saw_hi);
  CHECK(rng.uniform(1.0, 1.0) == 1.0);
  CHECK_THROWS_AS(rng.uniform_int(3, 2), ValidationError);
}

TEST_CASE("read_wav scales PCM16 by 1/32768") {
  const std::vector<std::int16_t> pcm{32767, -32768, 0, 16384};
  const Signal s = parse_wav(make_wav(1, 1, 16, 16000, bytes_of(pcm)));
  REQUIRE(s.size() == 4);
  CHECK(s.sample_rate == 16000);
  CHECK(s.samples[0] == doctest::Approx(32767.0 / 32768.0).epsilon(1e-15));
  CHECK(s.samples[1] == -1.0);
  CHECK(s.samples[2] == 0.0);
  CHECK(s.samples[3] == 0.5);
}

TEST_CASE("read_wav averages channels to mono") {
  const std::vector<float> stereo{1.0f, 0.0f, 0.5f, -0.5f};
  const Signal s = parse_wav(make_wav(3, 2, 32, 8000, bytes_of(stereo)));
  REQUIRE(s.size() == 2);
  CHECK(s.samples[0] == 0.5);
  CHECK(s.samples[1] == 0.0);
  CHECK(s.sample_rate == 8000);
}

TEST_CASE("read_wav rejects malformed and unsupported files") {
  const std::vector<std::int16_t> pcm(100, 1);
  auto good = make_wav(1, 1, 16, 16000, bytes_of(pcm));
  SUBCASE("truncated data chunk") {
    good.resize(good.size() - 50);
    CHECK_THROWS_AS(parse_wav(good), FormatError);
  }
  SUBCASE("truncated header") {
    good.resize(20);
    CHECK_THROWS_AS(parse_wav(good), FormatError);
  }
  SUBCASE("bad magic") {
    good[0] = 'X';
    CHECK_THROWS_AS(parse_wav(good), FormatError);
  }
  SUBCASE("24-bit PCM is unsupported") {
    const std::vector<std::uint8_t> data(30, 0);
    CHECK_THROWS_AS(parse_wav(make_wav(1, 1, 24, 16000, data)), UnsupportedError);
  }
  SUBCASE("ADPCM is unsupported") {
    CHECK_THROWS_AS(parse_wav(make_wav(2, 1, 16, 16000, bytes_of(pcm))), UnsupportedError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_wav(temp_path("does_not_exist.wav")), IoError);
  }
}

TEST_CASE("write_wav round trip stays within one PCM16 step") {
  Signal s;
  s.samples = oracle::sine(440.0, 16000, 16000, 0.9);
  const auto path = temp_path("sine.wav");
  CHECK(write_wav(s, path) == 0);
  const Signal back = read_wav(path);
  REQUIRE(back.size() == s.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    worst = std::max(worst, std::abs(back.samples[i] - s.samples[i]));
  CHECK(worst <= std::pow(2.0, -15));
}

TEST_CASE("write_wav float32 round trip is exact to float precision") {
  Signal s;
  s.samples = oracle::sine(1000.0, 1000, 16000, 0.7);
  const Signal back = parse_wav(encode_wav(s, WavEncoding::kFloat32));
  REQUIRE(back.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    CHECK(back.samples[i] == static_cast<double>(static_cast<float>(s.samples[i])));
}

TEST_CASE("write_wav handles the empty signal") {
  const auto path = temp_path("empty.wav");
  write_wav(Signal{}, path);
  const Signal back = read_wav(path);
  CHECK(back.empty());
  CHECK(back.sample_rate == kCanonicalSampleRate);
}

TEST_CASE("write_wav clips out-of-range samples and logs a warning") {
  std::vector<std::string> warnings;
  auto old = set_log_sink([&](LogLevel level, const std::string& msg) {
    if (level == LogLevel::kWarning) warnings.push_back(msg);
  });
  Signal s;
  s.samples = {0.0, 1.5, -2.0, 0.25};
  std::size_t clipped = 0;
  const Signal back = parse_wav(encode_wav(s, WavEncoding::kPcm16, &clipped));
  CHECK(clipped == 2);
  CHECK(write_wav(s, temp_path("clip.wav")) == 2);
  set_log_sink(old);
  CHECK(warnings.size() == 1);
  CHECK(back.samples[1] == doctest::Approx(32767.0 / 32768.0));
  CHECK(back.samples[2] == -1.0);
}

TEST_CASE("write_wav to an unwritable path is an I/O error") {
  Signal s;
  s.samples = {0.0};
  CHECK_THROWS_AS(write_wav(s, "/nonexistent_dir/x/y.wav"), IoError);
}

TEST_CASE("resample to the same rate is the identity") {
  Signal s;
  s.samples = oracle::sine(300.0, 777, 16000);
  const Signal r = resample(s, 16000);
  CHECK(r.samples == s.samples);
}

TEST_CASE("resample output length is round(len * target / source)") {
  Signal s;
  s.samples.assign(16000, 0.1);
  CHECK(resample(s, 8000).size() == 8000);
  oracle::Gen gen(3);
  for (int trial = 0; trial < 50; ++trial) {
    Signal x;
    x.sample_rate = gen.integer(4000, 48000);
    x.samples.assign(static_cast<std::size_t>(gen.integer(0, 3000)), 0.0);
    const int target = gen.integer(4000, 48000);
    const auto expect = static_cast<std::size_t>(
        std::llround(static_cast<double>(x.size()) * target / x.sample_rate));
    const Signal y = resample(x, target);
    CHECK(y.size() == expect);
    CHECK(y.sample_rate == target);
  }
}

TEST_CASE("resample keeps a 440 Hz tone at 440 Hz") {
  Signal s;
  s.samples = oracle::sine(440.0, 16000, 16000);
  const Signal r = resample(s, 12000);
  const std::size_t n = 4096;
  const double bin = 12000.0 / n;
  CHECK(std::abs(oracle::dft_peak_hz(r.samples, 12000, n, 2000) - 440.0) <= bin);
}

TEST_CASE("resample rejects a non-positive rate") {
  Signal s;
  s.samples = {0.0, 1.0};
  CHECK_THROWS_AS(resample(s, 0), ValidationError);
}

TEST_CASE("Signal::validate catches bad rates and non-finite samples") {
  Signal s;
  s.samples = {0.0, NAN};
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s.samples = {0.0};
  s.sample_rate = 0;
  CHECK_THROWS_AS(s.validate(), ValidationError);
}
