// src/robustness.cpp
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

#include "robunits/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "robunits/error.hpp"
#include "robunits/log.hpp"
#include "robunits/version.hpp"

namespace robunits {

std::size_t levenshtein(std::span<const int> a, std::span<const int> b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::optional<UedSample> ued_from_units(std::span<const int> clean,
                                        std::span<const int> augmented) {
  if (clean.empty()) return std::nullopt;
  const auto dc = dedup(clean);
  const auto da = dedup(augmented);
  UedSample s;
  s.clean_frames = clean.size();
  s.clean_dedup_len = dc.size();
  s.aug_dedup_len = da.size();
  s.distance = levenshtein(dc, da);
  s.ratio = static_cast<double>(s.distance) / static_cast<double>(s.clean_frames);
  return s;
}

std::optional<UedSample> ued_sample(const Quantizer& quantizer, const FrameEncoder& encoder,
                                    const Transform& transform, const Signal& signal,
                                    const NoiseBank* bank) {
  const auto clean = quantize(quantizer, encoder.encode(signal).frames);
  if (clean.empty()) return std::nullopt;
  const auto aug = quantize(quantizer, encoder.encode(apply_transform(transform, signal, bank)).frames);
  return ued_from_units(clean, aug);
}

const UedSummary& UedReport::summary(AugKind kind) const {
  for (const auto& s : summaries)
    if (s.kind == kind) return s;
  throw ValidationError("UedReport: no results for augmentation " +
                        std::string(aug_kind_name(kind)));
}

std::vector<UedSummary> summarize(std::span<const UedRecord> records,
                                  std::span<const AugKind> kinds, UedAggregate aggregate) {
  std::vector<UedSummary> out;
  for (AugKind kind : kinds) {
    UedSummary s;
    s.kind = kind;
    std::vector<double> values;
    for (const auto& r : records) {
      if (r.kind != kind) continue;
      if (r.value.clean_frames == 0) {
        ++s.skipped;
        continue;
      }
      values.push_back(r.value.ratio);
    }
    s.count = values.size();
    if (!values.empty()) {
      double sum = 0.0;
      for (double v : values) sum += v;
      const double n = static_cast<double>(values.size());
      const double mean = sum / n;
      double var = 0.0;
      if (values.size() > 1) {
        for (double v : values) var += (v - mean) * (v - mean);
        var /= n - 1.0;
      }
      const double sd = std::sqrt(var);
      if (aggregate == UedAggregate::kMean) {
        s.value = 100.0 * mean;
        s.stderr_value = 100.0 * sd / std::sqrt(n);
      } else {
        s.value = 100.0 * sum;
        s.stderr_value = 100.0 * sd * std::sqrt(n);
      }
    }
    out.push_back(s);
  }
  return out;
}

UedReport ued_dataset(const Quantizer& quantizer, const FrameEncoder& encoder,
                      const AugmentationSet& set, std::span<const Utterance> dataset,
                      std::uint64_t seed, const UedOptions& options) {
  if (dataset.empty()) throw ValidationError("ued_dataset: empty dataset");
  if (set.specs.empty()) throw ValidationError("ued_dataset: empty augmentation set");
  if (options.trials_per_sample < 1)
    throw ValidationError("ued_dataset: trials_per_sample must be >= 1");
  const std::size_t n = dataset.size();
  const auto trials = static_cast<std::size_t>(options.trials_per_sample);
  const NoiseBank* bank = set.noise_bank.get();

  std::vector<UnitSequence> clean(n);
  parallel_for(n, options.exec, [&](std::size_t i) {
    clean[i] = quantize(quantizer, encoder.encode(dataset[i].signal).frames);
  });

  const std::size_t per_kind = n * trials;
  std::vector<UedRecord> records(set.specs.size() * per_kind);
  std::vector<char> degenerate(records.size(), 0);
  parallel_for(records.size(), options.exec, [&](std::size_t job) {
    const std::size_t spec_idx = job / per_kind;
    const std::size_t within = job % per_kind;
    const std::size_t i = within / trials;
    const auto& spec = set.specs[spec_idx];
    const AugKind kind = spec_kind(spec);
    Rng rng(Rng::derive_seed(seed, "ued/" + std::string(aug_kind_name(kind)), within));
    const Transform t = sample_transform(spec, rng, bank);
    UedRecord& rec = records[job];
    rec.sample_id = dataset[i].id;
    rec.kind = kind;
    rec.trial = static_cast<int>(within % trials);
    rec.params = transform_to_json(t);
    if (clean[i].empty()) return;
    Signal augmented;
    try {
      augmented = apply_transform(t, dataset[i].signal, bank);
    } catch (const DegenerateInputError&) {
      // e.g. a silent utterance cannot be mixed at a target SNR
      degenerate[job] = 1;
      return;
    }
    const auto aug = quantize(quantizer, encoder.encode(augmented).frames);
    rec.value = *ued_from_units(clean[i], aug);
  });
  const auto n_degenerate = std::count(degenerate.begin(), degenerate.end(), 1);
  if (n_degenerate > 0)
    log_warning("ued_dataset: skipped " + std::to_string(n_degenerate) +
                " trials whose augmentation rejected the input");

  UedReport report;
  report.dataset_id = options.dataset_id;
  report.quantizer_id = options.quantizer_id;
  report.num_units = num_units(quantizer);
  report.seed = seed;
  report.trials_per_sample = options.trials_per_sample;
  report.aggregate = options.aggregate;
  report.config_hash = options.config_hash;
  report.tool_version = kToolVersion;
  std::vector<AugKind> kinds;
  for (const auto& s : set.specs) kinds.push_back(spec_kind(s));
  report.summaries = summarize(records, kinds, options.aggregate);
  for (const auto& s : report.summaries)
    if (s.skipped > 0)
      log_warning("ued_dataset: skipped " + std::to_string(s.skipped) + " trials (" +
                  std::string(aug_kind_name(s.kind)) + ")");
  report.records = std::move(records);
  return report;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {
template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

std::string aggregate_name(UedAggregate a) { return a == UedAggregate::kMean ? "mean" : "sum"; }
}  // namespace

nlohmann::json transform_to_json(const Transform& t) {
  using nlohmann::json;
  return std::visit(
      Overloaded{
          [](const IdentityTransform&) { return json{{"kind", "identity"}}; },
          [](const TimeStretchTransform& s) { return json{{"kind", "time"}, {"rate", s.rate}}; },
          [](const PitchShiftTransform& s) {
            return json{{"kind", "pitch"}, {"semitones", s.semitones}};
          },
          [](const ReverbTransform& s) {
            return json{{"kind", "reverb"},
                        {"dims", s.room.dims},
                        {"source", s.room.source},
                        {"mic", s.room.mic},
                        {"absorption", s.room.absorption},
                        {"max_order", s.room.max_order}};
          },
          [](const NoiseTransform& s) {
            json j{{"kind", "noise"},
                   {"snr_db", s.snr_db},
                   {"source", std::string(noise_source_name(s.source))},
                   {"seed", s.seed}};
            if (s.source == NoiseSource::kFile) j["file_index"] = s.file_index;
            return j;
          },
      },
      t);
}

nlohmann::json report_to_json(const UedReport& report) {
  using nlohmann::json;
  json j;
  j["tool_version"] = report.tool_version;
  j["dataset_id"] = report.dataset_id;
  j["quantizer_id"] = report.quantizer_id;
  j["units"] = report.num_units;
  j["seed"] = report.seed;
  j["trials_per_sample"] = report.trials_per_sample;
  j["aggregate"] = aggregate_name(report.aggregate);
  j["config_hash"] = report.config_hash;
  json results = json::array();
  for (const auto& s : report.summaries)
    results.push_back({{"augmentation", std::string(aug_kind_name(s.kind))},
                       {"ued", s.value},
                       {"stderr", s.stderr_value},
                       {"count", s.count},
                       {"skipped", s.skipped}});
  j["results"] = results;
  json recs = json::array();
  for (const auto& r : report.records)
    recs.push_back({{"sample_id", r.sample_id},
                    {"augmentation", std::string(aug_kind_name(r.kind))},
                    {"trial", r.trial},
                    {"params", r.params},
                    {"clean_frames", r.value.clean_frames},
                    {"clean_dedup_len", r.value.clean_dedup_len},
                    {"aug_dedup_len", r.value.aug_dedup_len},
                    {"distance", r.value.distance},
                    {"ratio", r.value.ratio}});
  j["records"] = recs;
  return j;
}

UedReport report_from_json(const nlohmann::json& j) {
  try {
    UedReport r;
    r.tool_version = j.value("tool_version", "");
    r.dataset_id = j.value("dataset_id", "");
    r.quantizer_id = j.value("quantizer_id", "");
    r.num_units = j.at("units").get<std::size_t>();
    r.seed = j.value("seed", std::uint64_t{0});
    r.trials_per_sample = j.value("trials_per_sample", 1);
    r.aggregate = j.value("aggregate", "mean") == "sum" ? UedAggregate::kSum : UedAggregate::kMean;
    r.config_hash = j.value("config_hash", "");
    for (const auto& s : j.at("results")) {
      UedSummary sum;
      sum.kind = parse_aug_kind(s.at("augmentation").get<std::string>());
      sum.value = s.at("ued").get<double>();
      sum.stderr_value = s.value("stderr", 0.0);
      sum.count = s.value("count", std::size_t{0});
      sum.skipped = s.value("skipped", std::size_t{0});
      r.summaries.push_back(sum);
    }
    if (j.contains("records")) {
      for (const auto& rec : j.at("records")) {
        UedRecord x;
        x.sample_id = rec.at("sample_id").get<std::string>();
        x.kind = parse_aug_kind(rec.at("augmentation").get<std::string>());
        x.trial = rec.value("trial", 0);
        x.params = rec.value("params", nlohmann::json::object());
        x.value.clean_frames = rec.at("clean_frames").get<std::size_t>();
        x.value.clean_dedup_len = rec.value("clean_dedup_len", std::size_t{0});
        x.value.aug_dedup_len = rec.value("aug_dedup_len", std::size_t{0});
        x.value.distance = rec.at("distance").get<std::size_t>();
        x.value.ratio = rec.at("ratio").get<double>();
        r.records.push_back(std::move(x));
      }
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("UED report: ") + e.what());
  }
}

std::string report_to_csv(const UedReport& report) {
  std::ostringstream os;
  os << "augmentation,ued,stderr,count\n";
  char buf[128];
  for (const auto& s : report.summaries) {
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%zu\n",
                  std::string(aug_kind_name(s.kind)).c_str(), s.value, s.stderr_value, s.count);
    os << buf;
  }
  return os.str();
}

bool Comparison::improves_all() const {
  if (kinds.empty()) return false;
  return std::all_of(kinds.begin(), kinds.end(), [](const auto& k) { return k.improved; });
}

Comparison compare_reports(const UedReport& baseline, const UedReport& candidate) {
  if (baseline.num_units != candidate.num_units)
    throw ValidationError("compare: reports use different unit counts (K)");
  if (baseline.summaries.size() != candidate.summaries.size())
    throw ValidationError("compare: reports cover different augmentation sets");
  Comparison c;
  for (const auto& a : baseline.summaries) {
    const auto it = std::find_if(candidate.summaries.begin(), candidate.summaries.end(),
                                 [&](const auto& b) { return b.kind == a.kind; });
    if (it == candidate.summaries.end())
      throw ValidationError("compare: reports cover different augmentation sets");
    KindComparison k{a.kind, a.value, it->value, 0.0, it->value < a.value};
    if (a.value != 0.0) k.relative_improvement = (a.value - it->value) / a.value;
    c.kinds.push_back(k);
  }
  return c;
}

}  // namespace robunits
