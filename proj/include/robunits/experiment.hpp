// include/robunits/experiment.hpp
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
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "robunits/augment.hpp"
#include "robunits/corpus.hpp"
#include "robunits/encoder.hpp"
#include "robunits/quantizer.hpp"
#include "robunits/training.hpp"

namespace robunits {

// Everything a CLI run depends on besides its input files. Loaded from
// defaults, then a --config JSON file, then command-line flags.
struct ExperimentConfig {
  EncoderConfig encoder;
  std::size_t units = 50;
  std::vector<AugKind> augmentations{AugKind::kTime, AugKind::kPitch, AugKind::kReverb,
                                     AugKind::kNoise};
  KMeansOptions kmeans;
  TrainConfig train;
  int rounds = 1;
  int trials_per_sample = 1;
  CorpusOptions corpus;
  std::filesystem::path noise_dir;  // optional recorded-noise clips
  std::uint64_t seed = 0;

  // Checks invariants (seed is always present; K >= 2).
  void validate() const;

  // Materialises the augmentation set, loading noise_dir when given (its
  // clips join the noise sources).
  AugmentationSet augmentation_set() const;
};

// Keys mirror the struct; unknown keys are a ValidationError so typos in a
// config file do not pass silently.
nlohmann::json config_to_json(const ExperimentConfig& c);
void merge_config(ExperimentConfig& c, const nlohmann::json& overrides);
ExperimentConfig load_config(const std::filesystem::path& path);

// fnv1a64 of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

// "time,pitch" or "all" (the four content-preserving kinds).
std::vector<AugKind> parse_aug_list(const std::string& text);

}  // namespace robunits
