// src/experiment.cpp
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

#include "robunits/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "robunits/error.hpp"

namespace robunits {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ValidationError("config: " + where + " must be an object");
  for (const auto& [k, _] : j.items())
    if (!allowed.count(k)) throw ValidationError("config: unknown key " + where + "." + k);
}

template <class T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json aug_list_json(const std::vector<AugKind>& kinds) {
  json a = json::array();
  for (AugKind k : kinds) a.push_back(std::string(aug_kind_name(k)));
  return a;
}

}  // namespace

void ExperimentConfig::validate() const {
  encoder.validate();
  if (units < 2) throw ValidationError("config: units (K) must be >= 2");
  if (augmentations.empty()) throw ValidationError("config: empty augmentation list");
  if (rounds < 1) throw ValidationError("config: rounds must be >= 1");
  if (trials_per_sample < 1) throw ValidationError("config: trials_per_sample must be >= 1");
  TrainConfig t = train;
  t.augmentations = AugmentationSet::of({AugKind::kIdentity});
  t.validate();
}

AugmentationSet ExperimentConfig::augmentation_set() const {
  AugmentationSet set;
  for (AugKind k : augmentations) set.specs.push_back(default_spec(k));
  if (!noise_dir.empty()) {
    set.noise_bank = std::make_shared<NoiseBank>(NoiseBank::from_directory(noise_dir));
    for (auto& s : set.specs)
      if (auto* n = std::get_if<NoiseSpec>(&s)) n->sources.push_back(NoiseSource::kFile);
  }
  return set;
}

json config_to_json(const ExperimentConfig& c) {
  return json{
      {"seed", c.seed},
      {"units", c.units},
      {"augmentations", aug_list_json(c.augmentations)},
      {"rounds", c.rounds},
      {"trials_per_sample", c.trials_per_sample},
      {"noise_dir", c.noise_dir.string()},
      {"encoder",
       {{"window_ms", c.encoder.window_ms},
        {"hop_ms", c.encoder.hop_ms},
        {"n_fft", c.encoder.n_fft},
        {"n_mels", c.encoder.n_mels},
        {"fmin", c.encoder.fmin},
        {"fmax", c.encoder.fmax},
        {"log_floor", c.encoder.log_floor}}},
      {"kmeans", {{"max_iters", c.kmeans.max_iters}, {"tol", c.kmeans.tol}}},
      {"train",
       {{"learning_rate", c.train.learning_rate},
        {"batch_size", c.train.batch_size},
        {"max_epochs", c.train.max_epochs},
        {"patience", c.train.patience},
        {"validation_fraction", c.train.validation_fraction},
        {"grad_clip_norm", c.train.grad_clip_norm},
        {"max_infeasible_fraction", c.train.max_infeasible_fraction},
        {"standardize_inputs", c.train.standardize_inputs}}},
      {"corpus",
       {{"n_train", c.corpus.n_train},
        {"n_dev", c.corpus.n_dev},
        {"min_duration_s", c.corpus.min_duration_s},
        {"max_duration_s", c.corpus.max_duration_s},
        {"dataset_id", c.corpus.dataset_id}}},
  };
}

void merge_config(ExperimentConfig& c, const json& o) {
  try {
    check_keys(o, "root",
               {"seed", "units", "augmentations", "rounds", "trials_per_sample", "noise_dir",
                "encoder", "kmeans", "train", "corpus"});
    take(o, "seed", c.seed);
    take(o, "units", c.units);
    take(o, "rounds", c.rounds);
    take(o, "trials_per_sample", c.trials_per_sample);
    if (o.contains("noise_dir")) c.noise_dir = o.at("noise_dir").get<std::string>();
    if (o.contains("augmentations")) {
      const auto& a = o.at("augmentations");
      c.augmentations.clear();
      if (a.is_string()) {
        c.augmentations = parse_aug_list(a.get<std::string>());
      } else {
        for (const auto& k : a) c.augmentations.push_back(parse_aug_kind(k.get<std::string>()));
      }
    }
    if (o.contains("encoder")) {
      const auto& e = o.at("encoder");
      check_keys(e, "encoder",
                 {"window_ms", "hop_ms", "n_fft", "n_mels", "fmin", "fmax", "log_floor"});
      take(e, "window_ms", c.encoder.window_ms);
      take(e, "hop_ms", c.encoder.hop_ms);
      take(e, "n_fft", c.encoder.n_fft);
      take(e, "n_mels", c.encoder.n_mels);
      take(e, "fmin", c.encoder.fmin);
      take(e, "fmax", c.encoder.fmax);
      take(e, "log_floor", c.encoder.log_floor);
    }
    if (o.contains("kmeans")) {
      const auto& k = o.at("kmeans");
      check_keys(k, "kmeans", {"max_iters", "tol"});
      take(k, "max_iters", c.kmeans.max_iters);
      take(k, "tol", c.kmeans.tol);
    }
    if (o.contains("train")) {
      const auto& t = o.at("train");
      check_keys(t, "train",
                 {"learning_rate", "batch_size", "max_epochs", "patience", "validation_fraction",
                  "grad_clip_norm", "max_infeasible_fraction", "standardize_inputs"});
      take(t, "learning_rate", c.train.learning_rate);
      take(t, "batch_size", c.train.batch_size);
      take(t, "max_epochs", c.train.max_epochs);
      take(t, "patience", c.train.patience);
      take(t, "validation_fraction", c.train.validation_fraction);
      take(t, "grad_clip_norm", c.train.grad_clip_norm);
      take(t, "max_infeasible_fraction", c.train.max_infeasible_fraction);
      take(t, "standardize_inputs", c.train.standardize_inputs);
    }
    if (o.contains("corpus")) {
      const auto& k = o.at("corpus");
      check_keys(k, "corpus", {"n_train", "n_dev", "min_duration_s", "max_duration_s", "dataset_id"});
      take(k, "n_train", c.corpus.n_train);
      take(k, "n_dev", c.corpus.n_dev);
      take(k, "min_duration_s", c.corpus.min_duration_s);
      take(k, "max_duration_s", c.corpus.max_duration_s);
      take(k, "dataset_id", c.corpus.dataset_id);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("config " + path.string() + ": " + e.what());
  }
  ExperimentConfig c;
  merge_config(c, j);
  return c;
}

std::string config_hash(const ExperimentConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(config_to_json(c).dump())));
  return buf;
}

std::vector<AugKind> parse_aug_list(const std::string& text) {
  std::vector<AugKind> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item == "all") {
      for (AugKind k : {AugKind::kTime, AugKind::kPitch, AugKind::kReverb, AugKind::kNoise})
        out.push_back(k);
    } else {
      out.push_back(parse_aug_kind(item));
    }
  }
  if (out.empty()) throw ValidationError("empty augmentation list: '" + text + "'");
  return out;
}

}  // namespace robunits
