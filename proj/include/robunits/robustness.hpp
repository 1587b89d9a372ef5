// include/robunits/robustness.hpp
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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "robunits/augment.hpp"
#include "robunits/encoder.hpp"
#include "robunits/exec.hpp"
#include "robunits/quantizer.hpp"

namespace robunits {

// Minimum number of insertions, deletions and substitutions.
std::size_t levenshtein(std::span<const int> a, std::span<const int> b);

struct UedSample {
  double ratio = 0.0;  // distance / clean_frames
  std::size_t clean_frames = 0;
  std::size_t clean_dedup_len = 0;
  std::size_t aug_dedup_len = 0;
  std::size_t distance = 0;
};

// Unit edit distance from raw (not yet deduplicated) unit sequences. The
// normaliser is the clean utterance's frame count, i.e. clean.size().
// Returns nullopt when the clean sequence has no frames.
std::optional<UedSample> ued_from_units(std::span<const int> clean,
                                        std::span<const int> augmented);

std::optional<UedSample> ued_sample(const Quantizer& quantizer, const FrameEncoder& encoder,
                                    const Transform& transform, const Signal& signal,
                                    const NoiseBank* bank = nullptr);

struct Utterance {
  std::string id;
  Signal signal;
};

enum class UedAggregate { kMean, kSum };

struct UedRecord {
  std::string sample_id;
  AugKind kind = AugKind::kIdentity;
  int trial = 0;
  nlohmann::json params;
  UedSample value;
};

// Per augmentation kind; value and stderr are scaled by 100.
struct UedSummary {
  AugKind kind = AugKind::kIdentity;
  double value = 0.0;
  double stderr_value = 0.0;
  std::size_t count = 0;
  std::size_t skipped = 0;
};

struct UedReport {
  std::string dataset_id;
  std::string quantizer_id;
  std::size_t num_units = 0;
  std::uint64_t seed = 0;
  int trials_per_sample = 1;
  UedAggregate aggregate = UedAggregate::kMean;
  std::string config_hash;
  std::string tool_version;
  std::vector<UedSummary> summaries;
  std::vector<UedRecord> records;

  const UedSummary& summary(AugKind kind) const;
};

struct UedOptions {
  int trials_per_sample = 1;
  UedAggregate aggregate = UedAggregate::kMean;
  Exec exec = Exec::kParallel;
  std::string dataset_id = "dataset";
  std::string quantizer_id = "quantizer";
  std::string config_hash;
};

// Evaluates every spec of `set` on every utterance (trials_per_sample draws
// each). Draw (kind, sample i, trial j) uses
//   Rng::derive_seed(seed, "ued/<kind>", i * trials + j).
// Throws ValidationError for an empty dataset.
UedReport ued_dataset(const Quantizer& quantizer, const FrameEncoder& encoder,
                      const AugmentationSet& set, std::span<const Utterance> dataset,
                      std::uint64_t seed, const UedOptions& options = {});

// Aggregates records in the given kind order. Records with
// value.clean_frames == 0 count as skipped.
std::vector<UedSummary> summarize(std::span<const UedRecord> records,
                                  std::span<const AugKind> kinds, UedAggregate aggregate);

nlohmann::json transform_to_json(const Transform& t);

nlohmann::json report_to_json(const UedReport& report);
UedReport report_from_json(const nlohmann::json& j);
// Header "augmentation,ued,stderr,count"; one row per kind, 6 decimals.
std::string report_to_csv(const UedReport& report);

// Per-kind relative improvement (a - b) / a of report b over baseline a.
struct KindComparison {
  AugKind kind;
  double baseline;
  double candidate;
  double relative_improvement;  // fraction, 0 when both are 0
  bool improved;                // candidate strictly lower
};

struct Comparison {
  std::vector<KindComparison> kinds;
  bool improves_all() const;
};

// Throws ValidationError when K or the augmentation kinds differ.
Comparison compare_reports(const UedReport& baseline, const UedReport& candidate);

}  // namespace robunits
