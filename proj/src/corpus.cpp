// src/corpus.cpp
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

#include "robunits/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <set>

#include "robunits/error.hpp"

namespace robunits {

// ---------------------------------------------------------------------------
// Manifest

void DatasetManifest::validate() const {
  std::set<std::string> seen;
  for (const auto& e : entries) {
    if (e.id.empty()) throw ValidationError("manifest: empty utterance id");
    if (!seen.insert(e.id).second) throw ValidationError("manifest: duplicate id " + e.id);
    if (e.path.empty() && !e.synth) throw ValidationError("manifest: entry " + e.id + " has no audio");
  }
}

std::vector<const ManifestEntry*> DatasetManifest::split(const std::string& name) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries)
    if (name.empty() || e.split == name) out.push_back(&e);
  return out;
}

nlohmann::json manifest_to_json(const DatasetManifest& m) {
  nlohmann::json utts = nlohmann::json::array();
  for (const auto& e : m.entries) {
    nlohmann::json j{{"id", e.id}, {"split", e.split}};
    if (!e.path.empty()) j["path"] = e.path;
    if (e.synth) j["synth"] = {{"seed", e.synth->seed}, {"duration", e.synth->duration_seconds}};
    utts.push_back(j);
  }
  return {{"dataset_id", m.dataset_id}, {"utterances", utts}};
}

DatasetManifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  DatasetManifest m;
  m.base_dir = base_dir;
  try {
    m.dataset_id = j.at("dataset_id").get<std::string>();
    for (const auto& u : j.at("utterances")) {
      ManifestEntry e;
      e.id = u.at("id").get<std::string>();
      e.split = u.value("split", "train");
      e.path = u.value("path", "");
      if (u.contains("synth"))
        e.synth = SynthSpec{u["synth"].at("seed").get<std::uint64_t>(),
                            u["synth"].at("duration").get<double>()};
      m.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("manifest: ") + ex.what());
  }
  m.validate();
  return m;
}

void write_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  m.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << manifest_to_json(m).dump(2) << '\n';
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError("manifest " + path.string() + ": " + ex.what());
  }
  auto m = manifest_from_json(j, path.parent_path());
  for (const auto& e : m.entries)
    if (!e.path.empty() && !std::filesystem::exists(m.base_dir / e.path))
      throw IoError("manifest: missing audio file " + (m.base_dir / e.path).string());
  return m;
}

std::vector<Utterance> load_utterances(const DatasetManifest& m, const std::string& split) {
  const auto entries = m.split(split);
  std::vector<Utterance> out(entries.size());
  const auto n = static_cast<std::int64_t>(entries.size());
  std::vector<std::string> errors(entries.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& e = *entries[i];
    try {
      out[i].id = e.id;
      out[i].signal = e.path.empty() ? synthesize_utterance(*e.synth)
                                     : resample(read_wav(m.base_dir / e.path), kCanonicalSampleRate);
    } catch (const std::exception& ex) {
      errors[i] = e.id + ": " + ex.what();
    }
  }
  for (const auto& err : errors)
    if (!err.empty()) throw Error("load_utterances: " + err);
  return out;
}

// ---------------------------------------------------------------------------
// Synthesis

const std::vector<Formants>& phone_inventory() {
  static const std::vector<Formants> phones{
      {270, 2290}, {390, 1990}, {530, 1840}, {660, 1720}, {730, 1090}, {570, 840},
      {440, 1020}, {300, 870},  {640, 1190}, {490, 1350}, {350, 1600}, {450, 2100},
      {600, 1500}, {800, 1300}, {320, 1200}, {700, 2000}};
  return phones;
}

std::vector<SegmentPlan> plan_utterance(const SynthSpec& spec, const SynthOptions& opt) {
  Rng rng(spec.seed);
  const auto total = static_cast<std::size_t>(std::llround(spec.duration_seconds * opt.sample_rate));
  const auto min_len = static_cast<std::size_t>(std::llround(opt.min_segment_s * opt.sample_rate));
  const auto max_len = static_cast<std::size_t>(std::llround(opt.max_segment_s * opt.sample_rate));
  const std::size_t lo = std::max(opt.min_segments, (total + max_len - 1) / max_len);
  const std::size_t hi = std::min(opt.max_segments, total / min_len);
  if (lo > hi || min_len == 0)
    throw ValidationError("plan_utterance: duration cannot be split into segments");
  const auto n = static_cast<std::size_t>(rng.uniform_int(lo, hi));

  // Start every segment at the minimum and hand out the rest by random
  // weights, respecting the maximum.
  std::vector<std::size_t> lens(n, min_len);
  std::size_t remaining = total - n * min_len;
  std::vector<double> weights(n);
  for (double& w : weights) w = rng.uniform(0.1, 1.0);
  while (remaining > 0) {
    double wsum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (lens[i] < max_len) wsum += weights[i];
    const std::size_t pool = remaining;
    std::size_t given = 0;
    for (std::size_t i = 0; i < n && remaining > 0; ++i) {
      if (lens[i] >= max_len) continue;
      auto add = static_cast<std::size_t>(std::floor(pool * weights[i] / wsum));
      add = std::min({add, max_len - lens[i], remaining});
      lens[i] += add;
      remaining -= add;
      given += add;
    }
    if (given == 0) {
      for (std::size_t i = 0; i < n && remaining > 0; ++i)
        if (lens[i] < max_len) {
          ++lens[i];
          --remaining;
        }
    }
  }

  const auto& phones = phone_inventory();
  std::vector<SegmentPlan> plan(n);
  std::size_t prev = phones.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t p;
    if (prev == phones.size()) {
      p = static_cast<std::size_t>(rng.uniform_int(0, phones.size() - 1));
    } else {
      p = static_cast<std::size_t>(rng.uniform_int(0, phones.size() - 2));
      if (p >= prev) ++p;
    }
    prev = p;
    plan[i].phone = p;
    plan[i].f0 = rng.uniform(opt.min_f0, opt.max_f0);
    plan[i].f1 = phones[p].f1 * rng.uniform(0.95, 1.05);
    plan[i].f2 = phones[p].f2 * rng.uniform(0.95, 1.05);
    plan[i].length = lens[i];
  }
  return plan;
}

namespace {

constexpr double kPi = std::numbers::pi;

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

Signal synthesize_utterance(const SynthSpec& spec, const SynthOptions& opt) {
  const auto plan = plan_utterance(spec, opt);
  Rng rng(Rng::derive_seed(spec.seed, "render"));
  const auto xf = static_cast<std::size_t>(std::llround(opt.crossfade_s * opt.sample_rate));
  std::size_t total = 0;
  for (const auto& s : plan) total += s.length;
  Signal out;
  out.sample_rate = opt.sample_rate;
  out.samples.assign(total + xf, 0.0);

  const double max_harmonic_hz = 0.45 * opt.sample_rate;
  std::size_t start = 0;
  std::vector<double> seg;
  for (std::size_t si = 0; si < plan.size(); ++si) {
    const auto& s = plan[si];
    const std::size_t len = s.length + xf;
    seg.assign(len, 0.0);
    const double gain = rng.uniform(0.7, 1.0);
    for (int h = 1; h * s.f0 < max_harmonic_hz; ++h) {
      const double w = 2.0 * kPi * h * s.f0 / opt.sample_rate;
      const std::complex<double> step(std::cos(w), std::sin(w));
      std::complex<double> z = std::polar(1.0, rng.uniform(0.0, 2.0 * kPi));
      const double amp = 1.0 / h;
      for (std::size_t n = 0; n < len; ++n) {
        seg[n] += amp * z.imag();
        z *= step;
      }
    }
    Resonator r1(s.f1, 80.0, opt.sample_rate);
    Resonator r2(s.f2, 120.0, opt.sample_rate);
    double power = 0.0;
    for (double& v : seg) {
      v = r2(r1(v));
      power += v * v;
    }
    const double scale = gain / std::sqrt(power / static_cast<double>(len) + 1e-20);
    for (std::size_t n = 0; n < len; ++n) {
      double fade = 1.0;
      if (si > 0 && n < xf) fade = 0.5 - 0.5 * std::cos(kPi * (n + 0.5) / xf);
      if (n >= s.length) fade *= 0.5 + 0.5 * std::cos(kPi * (n - s.length + 0.5) / xf);
      out.samples[start + n] += scale * fade * seg[n];
    }
    start += s.length;
  }
  out.samples.resize(total);
  if (opt.noise_floor_snr_db > 0.0 && total > 0) {
    // Recording noise floor; without it bands above the last formants sit at
    // the encoder's log floor, which no real recording does.
    double power = 0.0;
    for (double v : out.samples) power += v * v;
    const double sd = std::sqrt(power / static_cast<double>(total) *
                                std::pow(10.0, -opt.noise_floor_snr_db / 10.0));
    Rng floor_rng(Rng::derive_seed(spec.seed, "noise-floor"));
    for (double& v : out.samples) v += sd * floor_rng.normal();
  }
  double peak = 0.0;
  for (double v : out.samples) peak = std::max(peak, std::abs(v));
  if (peak > 0.0)
    for (double& v : out.samples) v *= opt.peak / peak;
  return out;
}

DatasetManifest synth_manifest(const CorpusOptions& options) {
  if (options.n_train + options.n_dev == 0)
    throw ValidationError("gen_synth_corpus: need at least one utterance");
  if (!(options.min_duration_s > 0.0 && options.min_duration_s <= options.max_duration_s))
    throw ValidationError("gen_synth_corpus: bad duration range");
  DatasetManifest m;
  m.dataset_id = options.dataset_id;
  const std::size_t total = options.n_train + options.n_dev;
  for (std::size_t i = 0; i < total; ++i) {
    ManifestEntry e;
    char buf[32];
    std::snprintf(buf, sizeof buf, "utt%05zu", i);
    e.id = buf;
    e.split = i < options.n_train ? "train" : "dev";
    Rng dur_rng(Rng::derive_seed(options.seed, "duration", i));
    SynthSpec spec{Rng::derive_seed(options.seed, "utterance", i),
                   dur_rng.uniform(options.min_duration_s, options.max_duration_s)};
    plan_utterance(spec, options.synth);  // validates the duration
    e.synth = spec;
    m.entries.push_back(std::move(e));
  }
  return m;
}

DatasetManifest gen_synth_corpus(const std::filesystem::path& out_dir,
                                 const CorpusOptions& options) {
  DatasetManifest m = synth_manifest(options);
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "wavs", ec);
  if (ec) throw IoError("cannot create " + (out_dir / "wavs").string() + ": " + ec.message());
  m.base_dir = out_dir;
  const auto n = static_cast<std::int64_t>(m.entries.size());
  std::vector<std::string> errors(m.entries.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    auto& e = m.entries[i];
    e.path = "wavs/" + e.id + ".wav";
    try {
      write_wav(synthesize_utterance(*e.synth, options.synth), out_dir / e.path);
    } catch (const std::exception& ex) {
      errors[i] = ex.what();
    }
  }
  for (const auto& err : errors)
    if (!err.empty()) throw IoError("gen_synth_corpus: " + err);
  write_manifest(m, out_dir / "manifest.json");
  return m;
}

}  // namespace robunits
