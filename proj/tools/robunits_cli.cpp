// tools/robunits_cli.cpp
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

// Command-line front end: corpus generation, quantizer training, UED
// evaluation and report comparison.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "robunits/corpus.hpp"
#include "robunits/error.hpp"
#include "robunits/experiment.hpp"
#include "robunits/log.hpp"
#include "robunits/robustness.hpp"
#include "robunits/training.hpp"
#include "robunits/version.hpp"

namespace fs = std::filesystem;
using namespace robunits;
using nlohmann::json;

namespace {

// Exit codes: 0 ok, 1 compare found no improvement, 2 runtime error.
constexpr int kExitNoImprovement = 1;
constexpr int kExitError = 2;

struct Common {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> units;
  std::optional<int> rounds;
  std::string aug;
  std::string out;
  bool timing = false;
};

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = c.config_file.empty() ? ExperimentConfig{} : load_config(c.config_file);
  if (c.seed) cfg.seed = *c.seed;
  if (c.units) cfg.units = *c.units;
  if (c.rounds) cfg.rounds = *c.rounds;
  if (!c.aug.empty()) cfg.augmentations = parse_aug_list(c.aug);
  cfg.validate();
  return cfg;
}

fs::path out_dir(const Common& c) {
  if (c.out.empty()) throw ValidationError("--out is required");
  fs::path p(c.out);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create " + p.string() + ": " + ec.message());
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

json provenance(const ExperimentConfig& cfg) {
  return json{{"tool_version", kToolVersion},
              {"seed", cfg.seed},
              {"config_hash", config_hash(cfg)},
              {"config", config_to_json(cfg)}};
}

Matrix pool_frames(const std::vector<FrameSequence>& feats, std::size_t dim) {
  std::size_t rows = 0;
  for (const auto& f : feats) rows += f.num_frames();
  Matrix pool(rows, dim);
  std::size_t r = 0;
  for (const auto& f : feats)
    for (std::size_t t = 0; t < f.num_frames(); ++t, ++r)
      std::copy(f.frames.row(t).begin(), f.frames.row(t).end(), pool.row(r).begin());
  return pool;
}

// ---------------------------------------------------------------------------

int cmd_gen_corpus(const Common& c, std::size_t n_train, std::size_t n_dev) {
  ExperimentConfig cfg = resolve(c);
  CorpusOptions opt = cfg.corpus;
  opt.seed = cfg.seed;
  if (n_train) opt.n_train = n_train;
  if (n_dev) opt.n_dev = n_dev;
  const auto dir = out_dir(c);
  const auto m = gen_synth_corpus(dir, opt);
  std::printf("wrote %zu utterances to %s\n", m.entries.size(), dir.string().c_str());
  return 0;
}

int cmd_train_kmeans(const Common& c, const std::string& manifest_path) {
  const ExperimentConfig cfg = resolve(c);
  const auto m = read_manifest(manifest_path);
  const auto train = load_utterances(m, "train");
  if (train.empty()) throw ValidationError("manifest has no train utterances");
  LogMelEncoder enc(cfg.encoder);
  std::vector<Signal> signals;
  for (const auto& u : train) signals.push_back(u.signal);
  const Matrix pool = pool_frames(encode_batch(enc, signals), enc.dim());
  Rng rng(Rng::derive_seed(cfg.seed, "kmeans"));
  const auto fit = kmeans_fit(pool, cfg.units, cfg.kmeans, rng);
  const auto dir = out_dir(c);
  save_quantizer(fit.model, dir / "kmeans.ruqz");
  json j = provenance(cfg);
  j["dataset_id"] = m.dataset_id;
  j["units"] = cfg.units;
  j["dim"] = enc.dim();
  j["frames"] = pool.rows();
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["inertia"] = fit.inertia.empty() ? 0.0 : fit.inertia.back();
  j["fingerprint"] = quantizer_fingerprint(fit.model);
  write_text(dir / "kmeans.json", j.dump(2) + "\n");
  std::printf("k-means K=%zu on %zu frames, %d iterations -> %s\n", cfg.units, pool.rows(),
              fit.iterations, (dir / "kmeans.ruqz").string().c_str());
  return 0;
}

int cmd_train_robust(const Common& c, const std::string& manifest_path,
                     const std::string& teacher_path) {
  ExperimentConfig cfg = resolve(c);
  const auto m = read_manifest(manifest_path);
  const auto train = load_utterances(m, "train");
  const Quantizer teacher = load_quantizer(teacher_path);
  LogMelEncoder enc(cfg.encoder);
  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  tc.augmentations = cfg.augmentation_set();
  const auto dir = out_dir(c);
  const auto res = train_iterative(teacher, enc, train, tc, cfg.rounds, [](const EpochRecord& e) {
    log_info("round " + std::to_string(e.round) + " epoch " + std::to_string(e.epoch) +
             " train " + std::to_string(e.train_loss) + " val " + std::to_string(e.val_loss) +
             (e.best ? " *" : ""));
  });
  json j = provenance(cfg);
  j["dataset_id"] = m.dataset_id;
  j["teacher"] = fs::path(teacher_path).filename().string();
  j["teacher_fingerprint"] = quantizer_fingerprint(teacher);
  json rounds = json::array();
  for (std::size_t r = 0; r < res.rounds.size(); ++r) {
    const auto name = "round-" + std::to_string(r + 1) + ".ruqz";
    save_quantizer(res.rounds[r], dir / name);
    rounds.push_back({{"file", name}, {"fingerprint", quantizer_fingerprint(res.rounds[r])}});
  }
  j["rounds"] = rounds;
  write_text(dir / "train_log.jsonl", to_jsonl(res.log, c.timing));
  write_text(dir / "train.json", j.dump(2) + "\n");
  std::printf("trained %zu round(s) -> %s\n", res.rounds.size(), dir.string().c_str());
  return 0;
}

void write_report(const UedReport& r, const fs::path& dir) {
  write_text(dir / "ued.json", report_to_json(r).dump(2) + "\n");
  const auto csv = report_to_csv(r);
  write_text(dir / "ued.csv", csv);
  std::fputs(csv.c_str(), stdout);
}

int cmd_eval_ued(const Common& c, const std::string& manifest_path,
                 const std::string& quantizer_path, const std::string& split) {
  const ExperimentConfig cfg = resolve(c);
  const auto m = read_manifest(manifest_path);
  const auto data = load_utterances(m, split);
  if (data.empty()) throw ValidationError("split '" + split + "' is empty");
  const Quantizer q = load_quantizer(quantizer_path);
  LogMelEncoder enc(cfg.encoder);
  UedOptions opt;
  opt.trials_per_sample = cfg.trials_per_sample;
  opt.dataset_id = m.dataset_id + "/" + split;
  opt.quantizer_id = fs::path(quantizer_path).filename().string();
  opt.config_hash = config_hash(cfg);
  const auto report = ued_dataset(q, enc, cfg.augmentation_set(), data, cfg.seed, opt);
  write_report(report, out_dir(c));
  return 0;
}

// Precomputed unit files: line i of each file is utterance i.
int cmd_eval_units(const Common& c, const std::string& clean_path, const std::string& aug_path,
                   const std::string& kind_name, std::size_t units) {
  const ExperimentConfig cfg = resolve(c);
  const auto clean = read_unit_file(clean_path);
  const auto aug = read_unit_file(aug_path);
  if (clean.size() != aug.size())
    throw ValidationError("unit files have different line counts (" +
                          std::to_string(clean.size()) + " vs " + std::to_string(aug.size()) + ")");
  const AugKind kind = parse_aug_kind(kind_name);
  UedReport r;
  r.dataset_id = fs::path(clean_path).filename().string();
  r.quantizer_id = "unit-files";
  r.num_units = units;
  r.seed = cfg.seed;
  r.config_hash = config_hash(cfg);
  r.tool_version = kToolVersion;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    UedRecord rec;
    rec.sample_id = std::to_string(i);
    rec.kind = kind;
    if (auto s = ued_from_units(clean[i], aug[i])) rec.value = *s;
    r.records.push_back(std::move(rec));
  }
  const std::vector<AugKind> kinds{kind};
  r.summaries = summarize(r.records, kinds, UedAggregate::kMean);
  write_report(r, out_dir(c));
  return 0;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

int cmd_compare(const Common& c, const std::string& a_path, const std::string& b_path) {
  const auto a = report_from_json(read_json(a_path));
  const auto b = report_from_json(read_json(b_path));
  const auto cmp = compare_reports(a, b);
  std::ostringstream csv;
  csv << "augmentation,baseline,candidate,relative_improvement_pct,improved\n";
  char buf[160];
  for (const auto& k : cmp.kinds) {
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f,%d\n",
                  std::string(aug_kind_name(k.kind)).c_str(), k.baseline, k.candidate,
                  100.0 * k.relative_improvement, k.improved ? 1 : 0);
    csv << buf;
  }
  std::fputs(csv.str().c_str(), stdout);
  if (!c.out.empty()) {
    const auto dir = out_dir(c);
    write_text(dir / "compare.csv", csv.str());
  }
  const bool all = cmp.improves_all();
  std::printf("%s\n", all ? "candidate improves on every augmentation"
                          : "no improvement on every augmentation");
  return all ? 0 : kExitNoImprovement;
}

int cmd_augment(const Common& c, const std::string& in_path) {
  const ExperimentConfig cfg = resolve(c);
  if (c.out.empty()) throw ValidationError("--out FILE.wav is required");
  if (cfg.augmentations.size() != 1)
    throw ValidationError("augment takes exactly one --aug kind");
  const Signal x = resample(read_wav(in_path), kCanonicalSampleRate);
  const auto set = cfg.augmentation_set();
  Rng rng(Rng::derive_seed(cfg.seed, "augment"));
  const Transform t = sample_transform(set.specs.front(), rng, set.noise_bank.get());
  write_wav(apply_transform(t, x, set.noise_bank.get()), c.out);
  std::printf("%s\n", transform_to_json(t).dump().c_str());
  return 0;
}

int cmd_encode(const Common& c, const std::string& in_path) {
  const ExperimentConfig cfg = resolve(c);
  if (c.out.empty()) throw ValidationError("--out FILE is required");
  LogMelEncoder enc(cfg.encoder);
  const auto seq = enc.encode(resample(read_wav(in_path), kCanonicalSampleRate));
  save_features(seq, c.out);
  std::printf("%zu frames x %zu dims -> %s\n", seq.num_frames(), seq.dim(), c.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robustness of discrete speech units: measure UED, train robust quantizers"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub, bool with_units = false) {
    sub->add_option("--config", common.config_file, "JSON file overriding defaults")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "root seed");
    sub->add_option("--aug", common.aug, "time,pitch,reverb,noise,identity or all");
    sub->add_option("--out", common.out, "output directory (file for augment/encode)");
    if (with_units) sub->add_option("--units", common.units, "number of units K");
  };

  std::size_t n_train = 0, n_dev = 0;
  auto* gen = app.add_subcommand("gen-corpus", "render the synthetic corpus to WAV + manifest");
  add_common(gen);
  gen->add_option("--n-train", n_train, "training utterances (default 500)");
  gen->add_option("--n-dev", n_dev, "dev utterances (default 100)");

  std::string manifest, teacher, quantizer, split = "dev";
  auto* km = app.add_subcommand("train-kmeans", "fit k-means units on the train split");
  add_common(km, true);
  km->add_option("--manifest", manifest)->required();

  auto* tr = app.add_subcommand("train-robust", "pseudo-label a robust MLP quantizer");
  add_common(tr);
  tr->add_option("--manifest", manifest)->required();
  tr->add_option("--teacher", teacher, "initial teacher quantizer file")->required();
  tr->add_option("--rounds", common.rounds, "iterative rounds R (default 1)");
  tr->add_flag("--timing", common.timing, "include wall-clock seconds in the log");

  std::string clean_units, aug_units, units_kind = "identity";
  auto* ev = app.add_subcommand("eval-ued", "unit edit distance per augmentation");
  add_common(ev, true);
  ev->add_option("--manifest", manifest);
  ev->add_option("--quantizer", quantizer);
  ev->add_option("--split", split, "manifest split to evaluate");
  ev->add_option("--clean-units", clean_units, "precomputed clean unit file");
  ev->add_option("--augmented-units", aug_units, "precomputed augmented unit file");
  ev->add_option("--units-kind", units_kind, "augmentation label for unit-file mode");

  std::string report_a, report_b;
  auto* cmp = app.add_subcommand("compare", "relative UED improvement of B over A");
  cmp->add_option("baseline", report_a)->required()->check(CLI::ExistingFile);
  cmp->add_option("candidate", report_b)->required()->check(CLI::ExistingFile);
  cmp->add_option("--out", common.out, "also write compare.csv here");

  std::string in_path;
  auto* aug = app.add_subcommand("augment", "apply one sampled augmentation to a WAV");
  add_common(aug);
  aug->add_option("--in", in_path)->required()->check(CLI::ExistingFile);

  auto* enc = app.add_subcommand("encode", "dump log-mel features of a WAV");
  add_common(enc);
  enc->add_option("--in", in_path)->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  set_log_sink([](LogLevel level, const std::string& msg) {
    std::fprintf(stderr, "%s: %s\n", level == LogLevel::kWarning ? "warning" : "info", msg.c_str());
  });

  try {
    if (*gen) return cmd_gen_corpus(common, n_train, n_dev);
    if (*km) return cmd_train_kmeans(common, manifest);
    if (*tr) return cmd_train_robust(common, manifest, teacher);
    if (*ev) {
      if (!clean_units.empty() || !aug_units.empty()) {
        if (clean_units.empty() || aug_units.empty())
          throw ValidationError("--clean-units and --augmented-units go together");
        return cmd_eval_units(common, clean_units, aug_units, units_kind,
                              common.units.value_or(0));
      }
      if (manifest.empty() || quantizer.empty())
        throw ValidationError("eval-ued needs --manifest and --quantizer (or unit files)");
      return cmd_eval_ued(common, manifest, quantizer, split);
    }
    if (*cmp) return cmd_compare(common, report_a, report_b);
    if (*aug) return cmd_augment(common, in_path);
    if (*enc) return cmd_encode(common, in_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
