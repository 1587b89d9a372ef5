// tests/test_robustness.cpp
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
#include "robunits/error.hpp"
#include "robunits/robustness.hpp"

using namespace robunits;

namespace {

// Tones at distinct pitches give a few well separated log-mel clusters.
Utterance tone_utterance(const std::string& id, std::vector<double> freqs, double seg_s = 0.25) {
  Utterance u;
  u.id = id;
  const auto n = static_cast<std::size_t>(seg_s * kCanonicalSampleRate);
  for (double f : freqs) {
    const auto s = oracle::sine(f, n, kCanonicalSampleRate, 0.4);
    u.signal.samples.insert(u.signal.samples.end(), s.begin(), s.end());
  }
  return u;
}

KMeansQuantizer tone_quantizer(const FrameEncoder& enc, std::size_t k) {
  Matrix all;
  for (double f : {300.0, 700.0, 1500.0, 3000.0}) {
    const auto seq = enc.encode(tone_utterance("c", {f}, 0.5).signal);
    for (std::size_t r = 0; r < seq.num_frames(); ++r) all.append_row(seq.frames.row(r));
  }
  Rng rng(7);
  return kmeans_fit(all, k, {}, rng).model;
}

UedReport report_with(std::size_t k, std::vector<std::pair<AugKind, double>> values) {
  UedReport r;
  r.num_units = k;
  for (auto [kind, v] : values) r.summaries.push_back({kind, v, 0.0, 1, 0});
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Edit distance

TEST_CASE("levenshtein on hand cases") {
  using V = std::vector<int>;
  CHECK(levenshtein(V{}, V{}) == 0);
  CHECK(levenshtein(V{1, 2, 3}, V{}) == 3);
  CHECK(levenshtein(V{}, V{4, 4}) == 2);
  CHECK(levenshtein(V{1, 2, 3}, V{1, 2, 3}) == 0);
  CHECK(levenshtein(V{1, 2, 3}, V{1, 3}) == 1);
  CHECK(levenshtein(V{1, 2, 3}, V{3, 2, 1}) == 2);
  // kitten -> sitting
  CHECK(levenshtein(V{'k', 'i', 't', 't', 'e', 'n'}, V{'s', 'i', 't', 't', 'i', 'n', 'g'}) == 3);
}

TEST_CASE("levenshtein matches the recursive definition") {
  oracle::Gen gen(11);
  for (int trial = 0; trial < 500; ++trial) {
    const auto a = gen.sequence(8, 4);
    const auto b = gen.sequence(8, 4);
    CHECK(levenshtein(a, b) == oracle::levenshtein_recursive(a, b));
  }
}

TEST_CASE("levenshtein is a metric") {
  oracle::Gen gen(12);
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = gen.sequence(10, 3);
    const auto b = gen.sequence(10, 3);
    const auto c = gen.sequence(10, 3);
    CHECK(levenshtein(a, a) == 0);
    CHECK(levenshtein(a, b) == levenshtein(b, a));
    CHECK(levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c));
    if (a != b) CHECK(levenshtein(a, b) > 0);
    const auto len_gap = a.size() > b.size() ? a.size() - b.size() : b.size() - a.size();
    CHECK(levenshtein(a, b) >= len_gap);
    CHECK(levenshtein(a, b) <= std::max(a.size(), b.size()));
  }
}

// ---------------------------------------------------------------------------
// UED from unit sequences

TEST_CASE("UED divides by the clean frame count, not the deduplicated length") {
  const std::vector<int> clean{1, 1, 2, 2};
  const std::vector<int> aug{1, 3, 3, 3};
  const auto s = ued_from_units(clean, aug);
  REQUIRE(s);
  CHECK(s->distance == 1);
  CHECK(s->clean_frames == 4);
  CHECK(s->clean_dedup_len == 2);
  CHECK(s->aug_dedup_len == 2);
  CHECK(s->ratio == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("UED ignores repeats and handles empty sequences") {
  CHECK(ued_from_units(std::vector<int>{5, 5, 6}, std::vector<int>{5, 6, 6, 6, 6})->ratio == 0.0);
  CHECK_FALSE(ued_from_units(std::vector<int>{}, std::vector<int>{1}));
  const auto s = ued_from_units(std::vector<int>{1, 2, 3}, std::vector<int>{});
  REQUIRE(s);
  CHECK(s->ratio == doctest::Approx(1.0));
}

TEST_CASE("UED property: bounded by max dedup length over clean frames") {
  oracle::Gen gen(21);
  for (int trial = 0; trial < 300; ++trial) {
    auto clean = gen.sequence(12, 4);
    if (clean.empty()) clean.push_back(0);
    const auto aug = gen.sequence(12, 4);
    const auto s = *ued_from_units(clean, aug);
    const auto dc = dedup(clean), da = dedup(aug);
    CHECK(s.distance == oracle::levenshtein_recursive(dc, da));
    CHECK(s.ratio >= 0.0);
    CHECK(s.ratio <= static_cast<double>(std::max(dc.size(), da.size())) / clean.size() + 1e-12);
    CHECK(ued_from_units(clean, clean)->ratio == 0.0);
  }
}

TEST_CASE("identity augmentation has zero UED") {
  LogMelEncoder enc;
  const Quantizer q = tone_quantizer(enc, 4);
  const auto u = tone_utterance("u", {300.0, 1500.0, 700.0});
  const auto s = ued_sample(q, enc, IdentityTransform{}, u.signal);
  REQUIRE(s);
  CHECK(s->ratio == 0.0);
}

TEST_CASE("a one-unit quantizer has zero UED under any augmentation") {
  LogMelEncoder enc;
  Matrix c(1, enc.dim(), 0.0);
  const Quantizer q = KMeansQuantizer(c);
  const auto u = tone_utterance("u", {300.0, 1500.0});
  for (const Transform& t : std::vector<Transform>{TimeStretchTransform{1.2},
                                                   PitchShiftTransform{3},
                                                   NoiseTransform{5.0, NoiseSource::kWhite, 0, 9}}) {
    const auto s = ued_sample(q, enc, t, u.signal);
    REQUIRE(s);
    CHECK(s->ratio == 0.0);
  }
}

// ---------------------------------------------------------------------------
// Aggregation

TEST_CASE("summaries report mean x100 with standard error") {
  std::vector<UedRecord> recs(2);
  recs[0].kind = recs[1].kind = AugKind::kTime;
  recs[0].value.clean_frames = recs[1].value.clean_frames = 10;
  recs[0].value.ratio = 0.2;
  recs[1].value.ratio = 0.4;
  const std::vector<AugKind> kinds{AugKind::kTime};
  const auto mean = summarize(recs, kinds, UedAggregate::kMean);
  REQUIRE(mean.size() == 1);
  CHECK(mean[0].value == doctest::Approx(30.0));
  // sample sd = 0.1414..., / sqrt(2) = 0.1
  CHECK(mean[0].stderr_value == doctest::Approx(10.0));
  CHECK(mean[0].count == 2);
  const auto sum = summarize(recs, kinds, UedAggregate::kSum);
  CHECK(sum[0].value == doctest::Approx(60.0));
}

TEST_CASE("zero-frame records are skipped, not averaged") {
  std::vector<UedRecord> recs(3);
  for (auto& r : recs) r.kind = AugKind::kNoise;
  recs[0].value.clean_frames = 5;
  recs[0].value.ratio = 0.5;
  recs[1].value.clean_frames = 5;
  recs[1].value.ratio = 0.1;
  const std::vector<AugKind> kinds{AugKind::kNoise, AugKind::kPitch};
  const auto s = summarize(recs, kinds, UedAggregate::kMean);
  CHECK(s[0].count == 2);
  CHECK(s[0].skipped == 1);
  CHECK(s[0].value == doctest::Approx(30.0));
  CHECK(s[1].count == 0);
  CHECK(s[1].value == 0.0);
}

// ---------------------------------------------------------------------------
// Dataset evaluation

TEST_CASE("ued_dataset is deterministic and serial matches parallel") {
  LogMelEncoder enc;
  const Quantizer q = tone_quantizer(enc, 4);
  const std::vector<Utterance> data{tone_utterance("a", {300.0, 700.0, 1500.0}),
                                    tone_utterance("b", {3000.0, 300.0}),
                                    tone_utterance("c", {700.0, 700.0, 3000.0, 1500.0})};
  const auto set = AugmentationSet::of({AugKind::kTime, AugKind::kNoise});
  UedOptions opt;
  opt.trials_per_sample = 2;
  const auto a = ued_dataset(q, enc, set, data, 42, opt);
  opt.exec = Exec::kSerial;
  const auto b = ued_dataset(q, enc, set, data, 42, opt);
  CHECK(report_to_json(a).dump() == report_to_json(b).dump());
  CHECK(a.records.size() == 2 * 3 * 2);
  CHECK(a.summary(AugKind::kTime).count == 6);
  CHECK(a.summary(AugKind::kNoise).count == 6);
  CHECK_THROWS_AS(a.summary(AugKind::kReverb), ValidationError);

  const auto c = ued_dataset(q, enc, set, data, 43, opt);
  CHECK(report_to_json(a)["records"] != report_to_json(c)["records"]);
}

TEST_CASE("ued_dataset skips silent utterances instead of aborting") {
  LogMelEncoder enc;
  const Quantizer q = tone_quantizer(enc, 3);
  std::vector<Utterance> data{tone_utterance("tone", {700.0})};
  Utterance silent;
  silent.id = "silent";
  silent.signal.samples.assign(8000, 0.0);
  data.push_back(silent);
  const auto r = ued_dataset(q, enc, AugmentationSet::of({AugKind::kNoise}), data, 1);
  CHECK(r.summary(AugKind::kNoise).count == 1);
  CHECK(r.summary(AugKind::kNoise).skipped == 1);
}

TEST_CASE("ued_dataset rejects bad input") {
  LogMelEncoder enc;
  const Quantizer q = tone_quantizer(enc, 2);
  const std::vector<Utterance> none;
  CHECK_THROWS_AS(ued_dataset(q, enc, AugmentationSet::all(), none, 0), ValidationError);
  const std::vector<Utterance> one{tone_utterance("a", {300.0})};
  CHECK_THROWS_AS(ued_dataset(q, enc, AugmentationSet{}, one, 0), ValidationError);
  UedOptions opt;
  opt.trials_per_sample = 0;
  CHECK_THROWS_AS(ued_dataset(q, enc, AugmentationSet::all(), one, 0, opt), ValidationError);
}

// ---------------------------------------------------------------------------
// Reports

TEST_CASE("report JSON round-trips and CSV has one row per kind") {
  LogMelEncoder enc;
  const Quantizer q = tone_quantizer(enc, 4);
  const std::vector<Utterance> data{tone_utterance("a", {300.0, 1500.0}),
                                    tone_utterance("b", {700.0, 3000.0})};
  UedOptions opt;
  opt.dataset_id = "tones";
  opt.quantizer_id = "km4";
  opt.config_hash = "abc";
  const auto r = ued_dataset(q, enc, AugmentationSet::of({AugKind::kPitch, AugKind::kReverb}),
                             data, 5, opt);
  const auto j = report_to_json(r);
  CHECK(j["units"] == 4);
  CHECK(j["seed"] == 5);
  CHECK(j["dataset_id"] == "tones");
  CHECK(j["config_hash"] == "abc");
  CHECK(j["results"].size() == 2);
  const auto back = report_from_json(nlohmann::json::parse(j.dump()));
  CHECK(report_to_json(back).dump() == j.dump());

  const auto csv = report_to_csv(r);
  CHECK(csv.rfind("augmentation,ued,stderr,count\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.find("\npitch,") != std::string::npos);
  CHECK(csv.find("\nreverb,") != std::string::npos);

  CHECK_THROWS_AS(report_from_json(nlohmann::json{{"results", 1}}), FormatError);
}

TEST_CASE("compare reports relative improvement per kind") {
  const auto base = report_with(50, {{AugKind::kTime, 40.0}, {AugKind::kNoise, 10.0}});
  const auto cand = report_with(50, {{AugKind::kNoise, 12.0}, {AugKind::kTime, 28.0}});
  const auto c = compare_reports(base, cand);
  REQUIRE(c.kinds.size() == 2);
  CHECK(c.kinds[0].kind == AugKind::kTime);
  CHECK(c.kinds[0].relative_improvement == doctest::Approx(0.30));
  CHECK(c.kinds[0].improved);
  CHECK(c.kinds[1].relative_improvement == doctest::Approx(-0.2));
  CHECK_FALSE(c.kinds[1].improved);
  CHECK_FALSE(c.improves_all());

  const auto better = report_with(50, {{AugKind::kTime, 39.0}, {AugKind::kNoise, 9.0}});
  CHECK(compare_reports(base, better).improves_all());
  CHECK_FALSE(compare_reports(base, base).improves_all());

  CHECK_THROWS_AS(compare_reports(base, report_with(100, {{AugKind::kTime, 1.0},
                                                          {AugKind::kNoise, 1.0}})),
                  ValidationError);
  CHECK_THROWS_AS(compare_reports(base, report_with(50, {{AugKind::kTime, 1.0}})),
                  ValidationError);
  CHECK_THROWS_AS(compare_reports(base, report_with(50, {{AugKind::kTime, 1.0},
                                                         {AugKind::kPitch, 1.0}})),
                  ValidationError);
}
