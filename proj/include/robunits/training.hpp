// include/robunits/training.hpp
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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "robunits/augment.hpp"
#include "robunits/encoder.hpp"
#include "robunits/exec.hpp"
#include "robunits/quantizer.hpp"
#include "robunits/robustness.hpp"

namespace robunits {

struct AdamState {
  explicit AdamState(std::size_t num_params) : m(num_params, 0.0), v(num_params, 0.0) {}

  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam. Throws NumericError naming the first non-finite
// gradient entry; parameters are untouched in that case.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double learning_rate);

// Scales grads in place so their L2 norm is at most max_norm. Returns the
// norm before scaling.
double clip_global_norm(std::span<double> grads, double max_norm);

// Parameter gradients of the MLP given d loss / d logits, in the same flat
// layout as MlpQuantizer::params(). No gradient flows into the frames: the
// encoder is frozen.
std::vector<double> mlp_backward(const MlpQuantizer& model, const Matrix& frames,
                                 const Matrix& logit_grads);
void mlp_backward(const MlpQuantizer& model, const Matrix& frames,
                  const MlpActivations& acts, const Matrix& logit_grads,
                  std::span<double> grads);

// Per-dimension input standardization (x - mean) * inv_std.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> inv_std;

  // Statistics over all rows; standard deviations are floored at min_std.
  static Standardizer fit(std::span<const Matrix> frames, double min_std = 1e-3);
  Matrix apply(const Matrix& frames) const;
};

// Returns a model m' with m'.forward(x) == m.forward(s.apply(x)), by
// rescaling the first layer.
MlpQuantizer fold_standardizer(const MlpQuantizer& model, const Standardizer& s);

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t batch_size = 32;
  int max_epochs = 200;
  int patience = 5;
  double validation_fraction = 0.1;
  std::uint64_t seed = 0;
  double grad_clip_norm = 5.0;
  // An epoch with more than this fraction of CTC-infeasible items aborts.
  double max_infeasible_fraction = 0.5;
  AugmentationSet augmentations = AugmentationSet::all();
  // Train on standardized frames; the saved model folds the statistics into
  // its first layer, so it still reads raw frames.
  bool standardize_inputs = true;
  Exec exec = Exec::kParallel;

  void validate() const;
};

struct EpochRecord {
  int round = 1;
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  std::size_t train_items = 0;
  std::size_t infeasible_train = 0;
  std::size_t infeasible_val = 0;
  std::size_t skipped_batches = 0;
  bool best = false;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  std::string teacher;              // "kmeans", "mlp", or "round-<r>"
  std::string teacher_fingerprint;  // fnv1a64 of the teacher's file bytes
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
};

// One JSON object per epoch. Wall-clock is included only on request so that
// re-runs produce identical bytes.
std::string to_jsonl(const TrainLog& log, bool include_timing = false);

std::string quantizer_fingerprint(const Quantizer& q);

struct TrainResult {
  MlpQuantizer model;  // best-validation checkpoint
  TrainLog log;
  int best_epoch = 0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Pseudo-labeling: the student sees f(g(x)) and is trained with CTC against
// dedup(teacher(f(x))), where targets come from clean audio only.
TrainResult train_robust(const Quantizer& teacher, const FrameEncoder& encoder,
                         std::span<const Utterance> dataset, const TrainConfig& config,
                         const EpochCallback& on_epoch = {}, int round = 1,
                         const std::string& teacher_name = "");

struct IterativeResult {
  std::vector<MlpQuantizer> rounds;  // E_1 ... E_R
  TrainLog log;
};

// Round r trains E_r with E_(r-1) frozen as teacher. Round 1 uses
// config.seed; round r > 1 uses Rng::derive_seed(config.seed, "round", r).
IterativeResult train_iterative(const Quantizer& teacher, const FrameEncoder& encoder,
                                std::span<const Utterance> dataset, const TrainConfig& config,
                                int rounds, const EpochCallback& on_epoch = {});

}  // namespace robunits
