// tests/test_training.cpp
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
#include "robunits/ctc.hpp"
#include "robunits/error.hpp"
#include "robunits/training.hpp"

using namespace robunits;

namespace {

Matrix random_matrix(oracle::Gen& gen, std::size_t rows, std::size_t cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = scale * gen.normal();
  return m;
}

Utterance tones(const std::string& id, const std::vector<double>& freqs, double seg_s) {
  Utterance u;
  u.id = id;
  const auto n = static_cast<std::size_t>(seg_s * kCanonicalSampleRate);
  for (double f : freqs) {
    const auto s = oracle::sine(f, n, kCanonicalSampleRate, 0.4);
    u.signal.samples.insert(u.signal.samples.end(), s.begin(), s.end());
  }
  return u;
}

// Alternating low/high tone utterances and a 2-unit k-means teacher that
// separates them.
struct ToyTask {
  LogMelEncoder encoder;
  std::vector<Utterance> data;
  Quantizer teacher;

  explicit ToyTask(std::size_t n_utts) {
    oracle::Gen gen(3);
    Matrix all;
    for (std::size_t u = 0; u < n_utts; ++u) {
      std::vector<double> f;
      const int segs = gen.integer(2, 4);
      for (int s = 0; s < segs; ++s) f.push_back(s % 2 == 0 ? 400.0 : 2500.0);
      data.push_back(tones("u" + std::to_string(u), f, 0.3));
      const auto seq = encoder.encode(data.back().signal);
      for (std::size_t r = 0; r < seq.num_frames(); ++r) all.append_row(seq.frames.row(r));
    }
    Rng rng(1);
    teacher = kmeans_fit(all, 2, {}, rng).model;
  }

  TrainConfig config() const {
    TrainConfig c;
    c.augmentations = AugmentationSet::of({AugKind::kIdentity});
    c.learning_rate = 1e-2;
    c.batch_size = 4;
    c.max_epochs = 40;
    c.patience = 40;
    c.validation_fraction = 0.2;
    c.seed = 9;
    return c;
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// Optimizer

TEST_CASE("first Adam step moves each parameter by about the learning rate") {
  std::vector<double> p{1.0, -2.0, 0.5};
  const std::vector<double> g{3.0, -0.01, 1e-3};
  AdamState st(3);
  adam_step(p, g, st, 0.1);
  // m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps).
  CHECK(p[0] == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(-1.9).epsilon(1e-6));
  CHECK(p[2] == doctest::Approx(0.4).epsilon(1e-4));
  CHECK(st.step == 1);
}

TEST_CASE("two Adam steps follow the bias-corrected recurrences") {
  const double lr = 0.05, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  const double g1 = 0.7, g2 = -0.2;
  double m = (1 - b1) * g1, v = (1 - b2) * g1 * g1;
  double x = 2.0 - lr * (m / (1 - b1)) / (std::sqrt(v / (1 - b2)) + eps);
  m = b1 * m + (1 - b1) * g2;
  v = b2 * v + (1 - b2) * g2 * g2;
  x -= lr * (m / (1 - b1 * b1)) / (std::sqrt(v / (1 - b2 * b2)) + eps);

  std::vector<double> p{2.0};
  AdamState st(1);
  adam_step(p, std::vector<double>{g1}, st, lr);
  adam_step(p, std::vector<double>{g2}, st, lr);
  CHECK(std::abs(p[0] - x) < 1e-12);
}

TEST_CASE("Adam leaves parameters alone for zero gradients and rejects NaN") {
  std::vector<double> p{1.0, 2.0};
  AdamState st(2);
  adam_step(p, std::vector<double>{0.0, 0.0}, st, 0.1);
  CHECK(p == std::vector<double>{1.0, 2.0});

  const std::vector<double> bad{0.5, std::nan("")};
  CHECK_THROWS_AS(adam_step(p, bad, st, 0.1), NumericError);
  CHECK(p == std::vector<double>{1.0, 2.0});
  CHECK(st.step == 1);
  CHECK_THROWS_AS(adam_step(p, std::vector<double>{1.0}, st, 0.1), ValidationError);
}

TEST_CASE("global norm clipping") {
  std::vector<double> g{3.0, 4.0};
  CHECK(clip_global_norm(g, 10.0) == doctest::Approx(5.0));
  CHECK(g == std::vector<double>{3.0, 4.0});
  CHECK(clip_global_norm(g, 1.0) == doctest::Approx(5.0));
  CHECK(g[0] == doctest::Approx(0.6));
  CHECK(g[1] == doctest::Approx(0.8));
  std::vector<double> z{0.0, 0.0};
  CHECK(clip_global_norm(z, 1.0) == 0.0);
}

// ---------------------------------------------------------------------------
// Backprop

TEST_CASE("MLP backward matches finite differences of a linear readout") {
  oracle::Gen gen(5);
  for (int trial = 0; trial < 5; ++trial) {
    const MlpShape shape{static_cast<std::size_t>(gen.integer(2, 5)),
                         static_cast<std::size_t>(gen.integer(2, 4)),
                         static_cast<std::size_t>(gen.integer(3, 6)),
                         static_cast<std::size_t>(gen.integer(3, 6))};
    Rng rng(100 + trial);
    MlpQuantizer model = MlpQuantizer::initialize(shape, rng);
    const Matrix x = random_matrix(gen, 4, shape.input_dim);
    const Matrix upstream = random_matrix(gen, 4, shape.outputs());

    auto loss = [&](const std::vector<double>& params) {
      MlpQuantizer m = model;
      std::copy(params.begin(), params.end(), m.params().begin());
      const Matrix y = m.forward(x);
      double s = 0.0;
      for (std::size_t i = 0; i < y.data().size(); ++i) s += y.data()[i] * upstream.data()[i];
      return s;
    };
    const auto grads = mlp_backward(model, x, upstream);
    std::vector<double> p(model.params().begin(), model.params().end());
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double fd = oracle::central_difference(loss, p, i, 1e-6);
      CHECK(std::abs(grads[i] - fd) <= 1e-4 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("MLP backward through CTC matches finite differences") {
  oracle::Gen gen(6);
  const MlpShape shape{3, 3, 5, 4};
  Rng rng(8);
  MlpQuantizer model = MlpQuantizer::initialize(shape, rng);
  const Matrix x = random_matrix(gen, 6, 3);
  const UnitSequence target{0, 2, 1};
  auto loss = [&](const std::vector<double>& params) {
    MlpQuantizer m = model;
    std::copy(params.begin(), params.end(), m.params().begin());
    return ctc_loss_and_grad(m.forward(x), target).loss;
  };
  const auto ctc = ctc_loss_and_grad(model.forward(x), target);
  const auto grads = mlp_backward(model, x, ctc.grad);
  std::vector<double> p(model.params().begin(), model.params().end());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double fd = oracle::central_difference(loss, p, i, 1e-6);
    CHECK(std::abs(grads[i] - fd) <= 1e-4 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("zero upstream gradient gives zero parameter gradient") {
  Rng rng(2);
  const MlpQuantizer model = MlpQuantizer::initialize(MlpShape{4, 2, 3, 3}, rng);
  oracle::Gen gen(2);
  const auto g = mlp_backward(model, random_matrix(gen, 5, 4), Matrix(5, 3));
  for (double v : g) CHECK(v == 0.0);
  CHECK_THROWS_AS(mlp_backward(model, random_matrix(gen, 5, 4), Matrix(4, 3)), ValidationError);
}

// ---------------------------------------------------------------------------
// Input standardization

TEST_CASE("standardizer produces zero mean, unit variance columns") {
  oracle::Gen gen(14);
  std::vector<Matrix> parts{random_matrix(gen, 30, 3, 4.0), random_matrix(gen, 20, 3, 4.0)};
  for (auto& m : parts)
    for (std::size_t r = 0; r < m.rows(); ++r) m(r, 1) = 7.0;  // constant column
  const auto s = Standardizer::fit(parts);
  CHECK(s.inv_std[1] == doctest::Approx(1e3));
  const Matrix z = s.apply(parts[0]);
  for (std::size_t r = 0; r < z.rows(); ++r) CHECK(z(r, 1) == doctest::Approx(0.0));
  // pooled statistics
  for (std::size_t c : {0u, 2u}) {
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (const auto& m : parts) {
      const Matrix zz = s.apply(m);
      for (std::size_t r = 0; r < zz.rows(); ++r, ++n) {
        sum += zz(r, c);
        sq += zz(r, c) * zz(r, c);
      }
    }
    CHECK(sum / n == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(sq / n == doctest::Approx(1.0).epsilon(0.05));
  }
}

TEST_CASE("folding the standardizer into the first layer preserves the function") {
  oracle::Gen gen(15);
  Rng rng(15);
  const MlpQuantizer model = MlpQuantizer::initialize(MlpShape{5, 3, 6, 4}, rng);
  Standardizer s;
  for (int i = 0; i < 5; ++i) {
    s.mean.push_back(gen.real(-3.0, 3.0));
    s.inv_std.push_back(gen.real(0.2, 5.0));
  }
  const Matrix x = random_matrix(gen, 7, 5, 3.0);
  const Matrix a = model.forward(s.apply(x));
  const Matrix b = fold_standardizer(model, s).forward(x);
  for (std::size_t i = 0; i < a.data().size(); ++i)
    CHECK(b.data()[i] == doctest::Approx(a.data()[i]).epsilon(1e-10));
  s.mean.pop_back();
  CHECK_THROWS_AS(fold_standardizer(model, s), ValidationError);
}

// ---------------------------------------------------------------------------
// Training loop

TEST_CASE("config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = TrainConfig{};
  c.validation_fraction = 1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = TrainConfig{};
  c.augmentations = AugmentationSet{};
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = TrainConfig{};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("training logs are JSON lines without timing by default") {
  TrainLog log;
  EpochRecord e;
  e.epoch = 3;
  e.teacher = "kmeans";
  e.wall_seconds = 1.5;
  log.epochs = {e, e};
  const auto text = to_jsonl(log);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  CHECK(text.find("wall_seconds") == std::string::npos);
  CHECK(to_jsonl(log, true).find("wall_seconds") != std::string::npos);
  const auto first = nlohmann::json::parse(text.substr(0, text.find('\n')));
  CHECK(first["epoch"] == 3);
  CHECK(first["teacher"] == "kmeans");
}

TEST_CASE("student reproduces its teacher without augmentation") {
  ToyTask task(20);
  const auto res = train_robust(task.teacher, task.encoder, task.data, task.config());
  REQUIRE(!res.log.epochs.empty());
  CHECK(res.log.epochs.back().train_loss < res.log.epochs.front().train_loss);
  std::size_t agree = 0, total = 0;
  for (const auto& u : task.data) {
    const Matrix f = task.encoder.encode(u.signal).frames;
    const auto t = dedup(quantize(task.teacher, f));
    const auto s = dedup(res.model.quantize(f));
    total += t.size();
    agree += t.size() - std::min(t.size(), levenshtein(t, s));
  }
  CHECK(static_cast<double>(agree) / static_cast<double>(total) >= 0.95);
}

TEST_CASE("training is deterministic for a seed and records its teacher") {
  ToyTask task(8);
  auto cfg = task.config();
  cfg.max_epochs = 3;
  cfg.augmentations = AugmentationSet::of({AugKind::kTime, AugKind::kNoise});
  const auto a = train_robust(task.teacher, task.encoder, task.data, cfg);
  cfg.exec = Exec::kSerial;
  const auto b = train_robust(task.teacher, task.encoder, task.data, cfg);
  CHECK(encode_quantizer(a.model) == encode_quantizer(b.model));
  CHECK(to_jsonl(a.log) == to_jsonl(b.log));
  for (const auto& e : a.log.epochs) {
    CHECK(e.teacher == "kmeans");
    CHECK(e.teacher_fingerprint == quantizer_fingerprint(task.teacher));
    CHECK(e.seed == cfg.seed);
  }

  cfg.seed = 10;
  const auto c = train_robust(task.teacher, task.encoder, task.data, cfg);
  CHECK(encode_quantizer(a.model) != encode_quantizer(c.model));
}

TEST_CASE("one iterative round equals a single training run") {
  ToyTask task(6);
  auto cfg = task.config();
  cfg.max_epochs = 2;
  const auto single = train_robust(task.teacher, task.encoder, task.data, cfg);
  const auto iter = train_iterative(task.teacher, task.encoder, task.data, cfg, 1);
  REQUIRE(iter.rounds.size() == 1);
  CHECK(encode_quantizer(iter.rounds[0]) == encode_quantizer(single.model));
  CHECK(to_jsonl(iter.log) == to_jsonl(single.log));

  const auto two = train_iterative(task.teacher, task.encoder, task.data, cfg, 2);
  REQUIRE(two.rounds.size() == 2);
  const auto& last = two.log.epochs.back();
  CHECK(last.round == 2);
  CHECK(last.teacher == "round-1");
  CHECK(last.teacher_fingerprint == quantizer_fingerprint(two.rounds[0]));
  CHECK(last.seed == Rng::derive_seed(cfg.seed, "round", 2));
  CHECK_THROWS_AS(train_iterative(task.teacher, task.encoder, task.data, cfg, 0), ValidationError);
}

TEST_CASE("train_robust rejects unusable inputs") {
  ToyTask task(3);
  const std::vector<Utterance> none;
  CHECK_THROWS_AS(train_robust(task.teacher, task.encoder, none, task.config()), ValidationError);
  const Quantizer one_unit = KMeansQuantizer(Matrix(1, task.encoder.dim()));
  CHECK_THROWS_AS(train_robust(one_unit, task.encoder, task.data, task.config()),
                  ValidationError);
  const Quantizer wrong_dim = KMeansQuantizer(Matrix(2, 3));
  CHECK_THROWS_AS(train_robust(wrong_dim, task.encoder, task.data, task.config()),
                  ValidationError);
}
