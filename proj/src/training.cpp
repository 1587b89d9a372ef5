// src/training.cpp
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

#include "robunits/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <sstream>

#include "robunits/ctc.hpp"
#include "robunits/error.hpp"
#include "robunits/log.hpp"

namespace robunits {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double learning_rate) {
  if (params.size() != grads.size() || state.m.size() != params.size())
    throw ValidationError("adam_step: shape mismatch");
  for (std::size_t i = 0; i < grads.size(); ++i)
    if (!std::isfinite(grads[i])) {
      std::ostringstream os;
      os << "adam_step: non-finite gradient at parameter " << i << " (step " << state.step + 1
         << ")";
      throw NumericError(os.str());
    }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

double clip_global_norm(std::span<double> grads, double max_norm) {
  double sq = 0.0;
  for (double g : grads) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (double& g : grads) g *= s;
  }
  return norm;
}

// ---------------------------------------------------------------------------
// Backprop

namespace {

// dW += delta^T * input, db += sum_t delta; returns delta * W (d input).
Matrix affine_backward(ConstLayerView layer, const Matrix& input, const Matrix& delta,
                       std::span<double> dweight, std::span<double> dbias, bool need_input) {
  const std::size_t T = input.rows();
  for (std::size_t t = 0; t < T; ++t) {
    const auto x = input.row(t);
    const auto d = delta.row(t);
    for (std::size_t j = 0; j < layer.out; ++j) {
      const double dj = d[j];
      if (dj == 0.0) continue;
      dbias[j] += dj;
      double* w = dweight.data() + j * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) w[i] += dj * x[i];
    }
  }
  Matrix dinput;
  if (!need_input) return dinput;
  dinput = Matrix(T, layer.in);
  for (std::size_t t = 0; t < T; ++t) {
    const auto d = delta.row(t);
    auto out = dinput.row(t);
    for (std::size_t j = 0; j < layer.out; ++j) {
      const double dj = d[j];
      if (dj == 0.0) continue;
      const double* w = layer.weight.data() + j * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) out[i] += dj * w[i];
    }
  }
  return dinput;
}

void leaky_backward(Matrix& grad, const Matrix& pre) {
  auto g = grad.data();
  const auto z = pre.data();
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!(z[i] > 0.0)) g[i] *= kLeakySlope;
}

}  // namespace

void mlp_backward(const MlpQuantizer& model, const Matrix& frames, const MlpActivations& acts,
                  const Matrix& logit_grads, std::span<double> grads) {
  const auto& s = model.shape();
  if (grads.size() != s.num_params()) throw ValidationError("mlp_backward: bad gradient size");
  if (logit_grads.rows() != frames.rows() ||
      (frames.rows() > 0 && logit_grads.cols() != s.outputs()))
    throw ValidationError("mlp_backward: logit gradient shape does not match forward pass");
  if (frames.rows() == 0) return;
  if (frames.cols() != s.input_dim) throw ValidationError("mlp_backward: frame dim mismatch");

  // Gradient spans mirror the parameter layout.
  const std::span<const double> base = model.params();
  auto slice = [&](int l, bool bias) {
    const auto v = model.layer(l);
    const auto& part = bias ? v.bias : v.weight;
    const auto offset = static_cast<std::size_t>(part.data() - base.data());
    return grads.subspan(offset, part.size());
  };

  Matrix d = affine_backward(model.layer(2), acts.post2, logit_grads, slice(2, false),
                             slice(2, true), true);
  leaky_backward(d, acts.pre2);
  d = affine_backward(model.layer(1), acts.post1, d, slice(1, false), slice(1, true), true);
  leaky_backward(d, acts.pre1);
  affine_backward(model.layer(0), frames, d, slice(0, false), slice(0, true), false);
}

std::vector<double> mlp_backward(const MlpQuantizer& model, const Matrix& frames,
                                 const Matrix& logit_grads) {
  std::vector<double> grads(model.shape().num_params(), 0.0);
  mlp_backward(model, frames, model.forward_cached(frames), logit_grads, grads);
  return grads;
}

// ---------------------------------------------------------------------------
// Input standardization

Standardizer Standardizer::fit(std::span<const Matrix> frames, double min_std) {
  if (frames.empty()) throw ValidationError("Standardizer::fit: no frames");
  std::size_t D = 0;
  for (const auto& m : frames)
    if (m.rows() > 0) {
      D = m.cols();
      break;
    }
  std::vector<double> sum(D, 0.0), sq(D, 0.0);
  std::size_t rows = 0;
  for (const auto& m : frames) {
    if (m.rows() > 0 && m.cols() != D) throw ValidationError("Standardizer::fit: dim mismatch");
    for (std::size_t t = 0; t < m.rows(); ++t) {
      const auto r = m.row(t);
      for (std::size_t d = 0; d < D; ++d) sum[d] += r[d];
    }
    rows += m.rows();
  }
  if (rows == 0) throw ValidationError("Standardizer::fit: no frames");
  Standardizer s;
  s.mean.resize(D);
  s.inv_std.resize(D);
  for (std::size_t d = 0; d < D; ++d) s.mean[d] = sum[d] / static_cast<double>(rows);
  for (const auto& m : frames)
    for (std::size_t t = 0; t < m.rows(); ++t) {
      const auto r = m.row(t);
      for (std::size_t d = 0; d < D; ++d) sq[d] += (r[d] - s.mean[d]) * (r[d] - s.mean[d]);
    }
  for (std::size_t d = 0; d < D; ++d)
    s.inv_std[d] = 1.0 / std::max(min_std, std::sqrt(sq[d] / static_cast<double>(rows)));
  return s;
}

Matrix Standardizer::apply(const Matrix& frames) const {
  Matrix out = frames;
  if (frames.rows() > 0 && frames.cols() != mean.size())
    throw ValidationError("Standardizer::apply: dim mismatch");
  for (std::size_t t = 0; t < out.rows(); ++t) {
    auto r = out.row(t);
    for (std::size_t d = 0; d < r.size(); ++d) r[d] = (r[d] - mean[d]) * inv_std[d];
  }
  return out;
}

MlpQuantizer fold_standardizer(const MlpQuantizer& model, const Standardizer& s) {
  if (s.mean.size() != model.dim() || s.inv_std.size() != model.dim())
    throw ValidationError("fold_standardizer: dim mismatch");
  MlpQuantizer out = model;
  auto l = out.layer(0);
  // W (x - mu) * a + b  ==  (W a) x + (b - W a mu)
  for (std::size_t j = 0; j < l.out; ++j) {
    double* w = l.weight.data() + j * l.in;
    double shift = 0.0;
    for (std::size_t i = 0; i < l.in; ++i) {
      w[i] *= s.inv_std[i];
      shift += w[i] * s.mean[i];
    }
    l.bias[j] -= shift;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Logs

std::string to_jsonl(const TrainLog& log, bool include_timing) {
  std::ostringstream os;
  for (const auto& e : log.epochs) {
    nlohmann::json j{{"round", e.round},
                     {"epoch", e.epoch},
                     {"train_loss", e.train_loss},
                     {"val_loss", e.val_loss},
                     {"train_items", e.train_items},
                     {"infeasible_train", e.infeasible_train},
                     {"infeasible_val", e.infeasible_val},
                     {"skipped_batches", e.skipped_batches},
                     {"best", e.best},
                     {"seed", e.seed},
                     {"teacher", e.teacher},
                     {"teacher_fingerprint", e.teacher_fingerprint}};
    if (include_timing) j["wall_seconds"] = e.wall_seconds;
    os << j.dump() << '\n';
  }
  return os.str();
}

std::string quantizer_fingerprint(const Quantizer& q) {
  const auto bytes = encode_quantizer(q);
  const std::string_view view(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(view)));
  return buf;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("TrainConfig: learning_rate must be > 0");
  if (batch_size < 1) throw ValidationError("TrainConfig: batch_size must be >= 1");
  if (patience < 1) throw ValidationError("TrainConfig: patience must be >= 1");
  if (max_epochs < 1) throw ValidationError("TrainConfig: max_epochs must be >= 1");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
    throw ValidationError("TrainConfig: validation_fraction must be in [0, 1)");
  if (augmentations.specs.empty()) throw ValidationError("TrainConfig: empty augmentation set");
  for (const auto& s : augmentations.specs) validate_spec(s);
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct ItemResult {
  bool feasible = false;
  double loss = 0.0;
  std::vector<double> grads;
};

ItemResult loss_and_grads(const MlpQuantizer& model, const Matrix& frames,
                          const UnitSequence& target, bool want_grads) {
  ItemResult r;
  if (frames.rows() == 0 || !ctc_feasible(frames.rows(), target)) return r;
  const auto acts = model.forward_cached(frames);
  CtcResult ctc;
  try {
    ctc = ctc_loss_and_grad(acts.logits, target);
  } catch (const InfeasibleError&) {
    return r;
  }
  r.feasible = true;
  r.loss = ctc.loss;
  if (want_grads) {
    r.grads.assign(model.shape().num_params(), 0.0);
    mlp_backward(model, frames, acts, ctc.grad, r.grads);
  }
  return r;
}

std::string teacher_kind(const Quantizer& q) {
  return std::holds_alternative<KMeansQuantizer>(q) ? "kmeans" : "mlp";
}

}  // namespace

TrainResult train_robust(const Quantizer& teacher, const FrameEncoder& encoder,
                         std::span<const Utterance> dataset, const TrainConfig& config,
                         const EpochCallback& on_epoch, int round,
                         const std::string& teacher_name) {
  config.validate();
  if (dataset.empty()) throw ValidationError("train_robust: empty dataset");
  if (input_dim(teacher) != encoder.dim())
    throw ValidationError("train_robust: teacher input dim does not match encoder");
  const std::size_t K = num_units(teacher);
  if (K < 2) throw ValidationError("train_robust: need K >= 2 units");
  const std::uint64_t seed = config.seed;
  const NoiseBank* bank = config.augmentations.noise_bank.get();
  const std::string tname = teacher_name.empty() ? teacher_kind(teacher) : teacher_name;
  const std::string tprint = quantizer_fingerprint(teacher);

  // Train / validation split.
  const std::size_t n = dataset.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  {
    Rng rng(Rng::derive_seed(seed, "split"));
    for (std::size_t i = n; i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(0, i - 1))]);
  }
  std::size_t n_val = static_cast<std::size_t>(std::llround(config.validation_fraction * n));
  if (config.validation_fraction > 0.0 && n_val == 0 && n >= 2) n_val = 1;
  if (n_val >= n) n_val = n - 1;
  const std::vector<std::size_t> val_idx(order.begin(), order.begin() + n_val);
  const std::vector<std::size_t> train_idx(order.begin() + n_val, order.end());

  // Targets from clean audio only, deduplicated.
  std::vector<UnitSequence> targets(n);
  parallel_for(n, config.exec, [&](std::size_t i) {
    targets[i] = dedup(quantize(teacher, encoder.encode(dataset[i].signal).frames));
  });

  // A transform that rejects its input (e.g. noise on a silent utterance)
  // yields no frames; the item then counts as infeasible.
  auto augment_encode = [&](const Transform& t, std::size_t i) {
    try {
      return encoder.encode(apply_transform(t, dataset[i].signal, bank)).frames;
    } catch (const DegenerateInputError&) {
      return Matrix();
    }
  };

  // Standardization statistics come from the student's input distribution:
  // one augmented draw per training utterance.
  std::optional<Standardizer> norm;
  if (config.standardize_inputs) {
    std::vector<Matrix> sample(train_idx.size());
    parallel_for(train_idx.size(), config.exec, [&](std::size_t k) {
      const std::size_t i = train_idx[k];
      Rng rng(Rng::derive_seed(seed, "norm-aug", i));
      const Transform t = sample_augmentation(config.augmentations, rng);
      sample[k] = augment_encode(t, i);
    });
    norm = Standardizer::fit(sample);
  }
  auto prepare = [&](Matrix frames) { return norm ? norm->apply(frames) : frames; };

  // Validation inputs use one fixed augmentation draw per utterance.
  std::vector<Matrix> val_frames(n_val);
  parallel_for(n_val, config.exec, [&](std::size_t v) {
    const std::size_t i = val_idx[v];
    Rng rng(Rng::derive_seed(seed, "val-aug", i));
    const Transform t = sample_augmentation(config.augmentations, rng);
    val_frames[v] = prepare(augment_encode(t, i));
  });

  // Probe for the frozen-encoder invariant.
  const std::size_t probe = train_idx.front();
  const Matrix probe_frames = encoder.encode(dataset[probe].signal).frames;

  Rng init_rng(Rng::derive_seed(seed, "init"));
  MlpQuantizer model = MlpQuantizer::initialize(MlpShape::for_dims(encoder.dim(), K), init_rng);
  AdamState adam(model.shape().num_params());

  TrainResult result;
  result.model = norm ? fold_standardizer(model, *norm) : model;
  double best_val = std::numeric_limits<double>::infinity();
  int bad_epochs = 0;
  const std::size_t P = model.shape().num_params();

  auto evaluate_val = [&](const MlpQuantizer& m, std::size_t& infeasible) {
    std::vector<ItemResult> items(n_val);
    parallel_for(n_val, config.exec, [&](std::size_t v) {
      items[v] = loss_and_grads(m, val_frames[v], targets[val_idx[v]], false);
    });
    double sum = 0.0;
    std::size_t ok = 0;
    for (const auto& it : items) {
      if (!it.feasible) continue;
      sum += it.loss;
      ++ok;
    }
    infeasible = n_val - ok;
    return ok ? sum / static_cast<double>(ok) : std::numeric_limits<double>::infinity();
  };

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::size_t> epoch_order = train_idx;
    {
      Rng rng(Rng::derive_seed(seed, "epoch", static_cast<std::uint64_t>(epoch)));
      for (std::size_t i = epoch_order.size(); i > 1; --i)
        std::swap(epoch_order[i - 1],
                  epoch_order[static_cast<std::size_t>(rng.uniform_int(0, i - 1))]);
    }

    EpochRecord rec;
    rec.round = round;
    rec.epoch = epoch;
    rec.seed = seed;
    rec.teacher = tname;
    rec.teacher_fingerprint = tprint;
    double loss_sum = 0.0;
    std::size_t feasible_total = 0;
    std::vector<double> grad(P);

    for (std::size_t start = 0; start < epoch_order.size(); start += config.batch_size) {
      const std::size_t end = std::min(epoch_order.size(), start + config.batch_size);
      const std::size_t bs = end - start;
      std::vector<ItemResult> items(bs);
      parallel_for(bs, config.exec, [&](std::size_t b) {
        const std::size_t i = epoch_order[start + b];
        Rng rng(Rng::derive_seed(seed, "train-aug",
                                 static_cast<std::uint64_t>(epoch) * n + i));
        const Transform t = sample_augmentation(config.augmentations, rng);
        const Matrix frames = prepare(augment_encode(t, i));
        items[b] = loss_and_grads(model, frames, targets[i], true);
      });
      std::fill(grad.begin(), grad.end(), 0.0);
      std::size_t ok = 0;
      for (const auto& it : items) {  // fixed reduction order
        if (!it.feasible) continue;
        ++ok;
        loss_sum += it.loss;
        for (std::size_t p = 0; p < P; ++p) grad[p] += it.grads[p];
      }
      rec.infeasible_train += bs - ok;
      if (ok == 0) {
        ++rec.skipped_batches;
        log_warning("train_robust: skipped batch with no CTC-feasible items (epoch " +
                    std::to_string(epoch) + ")");
        continue;
      }
      feasible_total += ok;
      for (double& g : grad) g /= static_cast<double>(ok);
      clip_global_norm(grad, config.grad_clip_norm);
      adam_step(model.params(), grad, adam, config.learning_rate);
    }
    rec.train_items = epoch_order.size();
    if (static_cast<double>(rec.infeasible_train) >
        config.max_infeasible_fraction * static_cast<double>(epoch_order.size())) {
      std::ostringstream os;
      os << "train_robust: " << rec.infeasible_train << " of " << epoch_order.size()
         << " items were CTC-infeasible in epoch " << epoch
         << "; augmented inputs are too short for the teacher targets";
      throw InfeasibleError(os.str());
    }
    rec.train_loss = feasible_total ? loss_sum / static_cast<double>(feasible_total)
                                    : std::numeric_limits<double>::infinity();
    rec.val_loss = n_val ? evaluate_val(model, rec.infeasible_val) : rec.train_loss;
    if (!std::isfinite(rec.train_loss)) throw NumericError("train_robust: training loss diverged");

    if (encoder.encode(dataset[probe].signal).frames != probe_frames)
      throw Error("train_robust: encoder output changed during training");

    if (rec.val_loss < best_val) {
      best_val = rec.val_loss;
      bad_epochs = 0;
      rec.best = true;
      result.model = norm ? fold_standardizer(model, *norm) : model;
      result.model.round_to_f32();
      result.best_epoch = epoch;
    } else {
      ++bad_epochs;
    }
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (bad_epochs >= config.patience) break;
  }
  return result;
}

IterativeResult train_iterative(const Quantizer& teacher, const FrameEncoder& encoder,
                                std::span<const Utterance> dataset, const TrainConfig& config,
                                int rounds, const EpochCallback& on_epoch) {
  if (rounds < 1) throw ValidationError("train_iterative: rounds must be >= 1");
  IterativeResult out;
  Quantizer current = teacher;
  std::string current_name = teacher_kind(teacher);
  for (int r = 1; r <= rounds; ++r) {
    TrainConfig cfg = config;
    if (r > 1) cfg.seed = Rng::derive_seed(config.seed, "round", static_cast<std::uint64_t>(r));
    auto res = train_robust(current, encoder, dataset, cfg, on_epoch, r, current_name);
    out.log.epochs.insert(out.log.epochs.end(), res.log.epochs.begin(), res.log.epochs.end());
    out.rounds.push_back(res.model);
    current = res.model;
    current_name = "round-" + std::to_string(r);
  }
  return out;
}

}  // namespace robunits
