// include/robunits/corpus.hpp
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
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "robunits/robustness.hpp"
#include "robunits/signal.hpp"

namespace robunits {

// Parameters of one generated utterance; rendering is deterministic.
struct SynthSpec {
  std::uint64_t seed = 0;
  double duration_seconds = 3.0;
};

struct ManifestEntry {
  std::string id;
  std::string path;               // relative to the manifest directory
  std::optional<SynthSpec> synth;  // used when path is empty
  std::string split = "train";
};

struct DatasetManifest {
  std::string dataset_id;
  std::vector<ManifestEntry> entries;
  std::filesystem::path base_dir;  // not serialized

  // Unique ids; each entry has a path or a synth spec.
  void validate() const;
  std::vector<const ManifestEntry*> split(const std::string& name) const;
};

nlohmann::json manifest_to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const nlohmann::json& j,
                                   const std::filesystem::path& base_dir = {});
void write_manifest(const DatasetManifest& m, const std::filesystem::path& path);
DatasetManifest read_manifest(const std::filesystem::path& path);

// Loads (or renders) audio, resampled to the canonical rate. An empty split
// name selects every entry.
std::vector<Utterance> load_utterances(const DatasetManifest& m, const std::string& split = "");

// ---------------------------------------------------------------------------
// Synthetic speech-like corpus

struct SynthOptions {
  std::size_t min_segments = 5;
  std::size_t max_segments = 20;
  double min_segment_s = 0.08;
  double max_segment_s = 0.30;
  double min_f0 = 100.0;
  double max_f0 = 300.0;
  double crossfade_s = 0.01;
  // White background noise this many dB below the speech power; <= 0 turns
  // it off.
  double noise_floor_snr_db = 35.0;
  double peak = 0.5;
  int sample_rate = kCanonicalSampleRate;
};

// Vowel-like (F1, F2) pairs that segments draw from.
struct Formants {
  double f1;
  double f2;
};
const std::vector<Formants>& phone_inventory();

struct SegmentPlan {
  std::size_t phone;  // index into phone_inventory()
  double f0;
  double f1;
  double f2;
  std::size_t length;  // samples
};

// Segment layout for one utterance: 5-20 segments of 80-300 ms summing to
// the requested duration, no phone repeated back to back.
std::vector<SegmentPlan> plan_utterance(const SynthSpec& spec, const SynthOptions& opt = {});
Signal synthesize_utterance(const SynthSpec& spec, const SynthOptions& opt = {});

struct CorpusOptions {
  std::size_t n_train = 500;
  std::size_t n_dev = 100;
  double min_duration_s = 2.0;
  double max_duration_s = 6.0;
  std::uint64_t seed = 0;
  std::string dataset_id = "synth";
  SynthOptions synth;
};

// Manifest only (entries carry synth specs, no files written).
DatasetManifest synth_manifest(const CorpusOptions& options);

// Writes wavs/<id>.wav and manifest.json under out_dir.
DatasetManifest gen_synth_corpus(const std::filesystem::path& out_dir,
                                 const CorpusOptions& options);

}  // namespace robunits
