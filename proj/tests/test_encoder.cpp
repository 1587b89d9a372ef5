// tests/test_encoder.cpp
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

#include <cmath>

#include "oracles.hpp"
#include "robunits/encoder.hpp"
#include "robunits/error.hpp"

using namespace robunits;

namespace {

Signal noise_signal(std::uint64_t seed, std::size_t n) {
  oracle::Gen gen(seed);
  Signal s;
  s.samples.resize(n);
  for (double& v : s.samples) v = 0.2 * gen.normal();
  return s;
}

}  // namespace

TEST_CASE("frame_count follows the framing formula") {
  const EncoderConfig cfg;
  CHECK(cfg.window_samples() == 400);
  CHECK(cfg.hop_samples() == 320);
  CHECK(frame_count(0, cfg) == 0);
  CHECK(frame_count(399, cfg) == 0);
  CHECK(frame_count(400, cfg) == 1);
  CHECK(frame_count(719, cfg) == 1);
  CHECK(frame_count(720, cfg) == 2);
  CHECK(frame_count(16000, cfg) == 49);
}

TEST_CASE("encode produces frame_count frames of dimension n_mels") {
  const LogMelEncoder enc;
  oracle::Gen gen(1);
  for (int trial = 0; trial < 30; ++trial) {
    const auto n = static_cast<std::size_t>(gen.integer(0, 6000));
    const auto seq = enc.encode(noise_signal(static_cast<std::uint64_t>(trial), n));
    CHECK(seq.num_frames() == enc.frame_count(n));
    if (seq.num_frames() > 0) CHECK(seq.dim() == 80);
    CHECK(seq.frame_rate == 50.0);
  }
}

TEST_CASE("one second at 16 kHz gives 49 frames") {
  const LogMelEncoder enc;
  CHECK(enc.encode(noise_signal(2, 16000)).num_frames() == 49);
}

TEST_CASE("digital silence maps to log(eps) everywhere") {
  const LogMelEncoder enc;
  Signal s;
  s.samples.assign(4000, 0.0);
  const auto seq = enc.encode(s);
  REQUIRE(seq.num_frames() > 0);
  for (double v : seq.frames.data()) CHECK(v == std::log(1e-10));
}

TEST_CASE("a 1 kHz tone puts its energy in the bands covering 1 kHz") {
  const LogMelEncoder enc;
  Signal s;
  s.samples = oracle::sine(1000.0, 8000, kCanonicalSampleRate);
  const auto seq = enc.encode(s);
  std::vector<std::size_t> covering;
  for (std::size_t m = 0; m < enc.dim(); ++m) {
    const auto [lo, hi] = enc.band_edges(m);
    if (lo <= 1000.0 && 1000.0 <= hi) covering.push_back(m);
  }
  REQUIRE(!covering.empty());
  for (std::size_t t = 0; t < seq.num_frames(); ++t) {
    double total = 0.0, inside = 0.0;
    for (std::size_t m = 0; m < enc.dim(); ++m) total += std::exp(seq.frames(t, m)) - 1e-10;
    for (std::size_t m : covering) inside += std::exp(seq.frames(t, m)) - 1e-10;
    CHECK(inside / total >= 0.9);
  }
}

TEST_CASE("mel filterbank is triangular between its band edges") {
  const LogMelEncoder enc;
  const auto& fb = enc.filterbank();
  CHECK(fb.rows() == 80);
  CHECK(fb.cols() == 257);
  for (std::size_t m = 0; m < fb.rows(); ++m) {
    const auto [lo, hi] = enc.band_edges(m);
    double peak = 0.0;
    for (std::size_t k = 0; k < fb.cols(); ++k) {
      const double f = k * 16000.0 / 512.0;
      const double w = fb(m, k);
      CHECK(w >= 0.0);
      CHECK(w <= 1.0);
      if (f <= lo || f >= hi) CHECK(w == 0.0);
      peak = std::max(peak, w);
    }
    CHECK(peak > 0.0);
  }
}

TEST_CASE("HTK mel conversion round trips") {
  CHECK(hz_to_mel(0.0) == 0.0);
  CHECK(hz_to_mel(700.0) == doctest::Approx(2595.0 * std::log10(2.0)));
  for (double f : {10.0, 440.0, 1000.0, 8000.0}) CHECK(mel_to_hz(hz_to_mel(f)) == doctest::Approx(f));
}

TEST_CASE("encode is deterministic") {
  const LogMelEncoder enc;
  const Signal s = noise_signal(3, 9000);
  CHECK(enc.encode(s).frames == enc.encode(s).frames);
}

TEST_CASE("shifting by one hop shifts the frames by one") {
  const LogMelEncoder enc;
  const Signal s = noise_signal(4, 10000);
  Signal shifted;
  shifted.samples.assign(s.samples.begin() + 320, s.samples.end());
  const auto a = enc.encode(s);
  const auto b = enc.encode(shifted);
  REQUIRE(b.num_frames() + 1 == a.num_frames());
  for (std::size_t t = 0; t < b.num_frames(); ++t)
    for (std::size_t m = 0; m < enc.dim(); ++m) CHECK(std::abs(b.frames(t, m) - a.frames(t + 1, m)) <= 1e-6);
}

TEST_CASE("encode_batch serial and parallel agree with encode") {
  const LogMelEncoder enc;
  std::vector<Signal> signals;
  for (int i = 0; i < 6; ++i) signals.push_back(noise_signal(10 + i, 1000 + 700 * i));
  const auto serial = encode_batch(enc, signals, Exec::kSerial);
  const auto parallel = encode_batch(enc, signals, Exec::kParallel);
  for (std::size_t i = 0; i < signals.size(); ++i) {
    CHECK(serial[i].frames == enc.encode(signals[i]).frames);
    CHECK(parallel[i].frames == serial[i].frames);
  }
}

TEST_CASE("encoder validates its configuration and input rate") {
  EncoderConfig cfg;
  cfg.hop_ms = 30.0;
  CHECK_THROWS_AS(LogMelEncoder{cfg}, ValidationError);
  cfg = EncoderConfig{};
  cfg.fmax = 9000.0;
  CHECK_THROWS_AS(LogMelEncoder{cfg}, ValidationError);
  cfg = EncoderConfig{};
  cfg.n_fft = 256;
  CHECK_THROWS_AS(LogMelEncoder{cfg}, ValidationError);
  Signal s;
  s.sample_rate = 8000;
  s.samples.assign(1000, 0.0);
  CHECK_THROWS_AS(LogMelEncoder{}.encode(s), ValidationError);
}

TEST_CASE("feature files round trip at f32 precision") {
  FrameSequence seq;
  seq.frame_rate = 50.0;
  seq.frames = Matrix(3, 2);
  seq.frames(0, 0) = 1.0;
  seq.frames(1, 1) = -2.5;
  seq.frames(2, 0) = 0.1;
  const auto bytes = encode_features(seq);
  REQUIRE(bytes.size() == 20 + 3 * 2 * 4);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "RUFT");
  CHECK(bytes[4] == 1);
  CHECK(bytes[8] == 3);
  CHECK(bytes[12] == 2);
  const auto back = decode_features(bytes);
  CHECK(back.frame_rate == 50.0);
  REQUIRE(back.num_frames() == 3);
  CHECK(back.frames(2, 0) == static_cast<double>(0.1f));
  CHECK(back.frames(1, 1) == -2.5);
  const auto path = std::filesystem::temp_directory_path() / "robunits_feat.ruft";
  save_features(seq, path);
  CHECK(load_features(path).frames == back.frames);
}

TEST_CASE("feature decoding rejects bad input") {
  FrameSequence seq;
  seq.frames = Matrix(2, 2, 1.0);
  auto bytes = encode_features(seq);
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_features(bad), FormatError);
  bad = bytes;
  bad[4] = 9;
  CHECK_THROWS_AS(decode_features(bad), FormatError);
  bad = bytes;
  bad.pop_back();
  CHECK_THROWS_AS(decode_features(bad), FormatError);
}
