// include/robunits/quantizer.hpp
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
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "robunits/exec.hpp"
#include "robunits/matrix.hpp"
#include "robunits/signal.hpp"

namespace robunits {

// Unit ids are 0-based internally and in unit files.
using UnitSequence = std::vector<int>;

// Collapses runs of equal adjacent units: 10 11 11 21 -> 10 11 21.
UnitSequence dedup(std::span<const int> units);

// ---------------------------------------------------------------------------
// k-means

class KMeansQuantizer {
 public:
  KMeansQuantizer() = default;
  explicit KMeansQuantizer(Matrix centroids);

  std::size_t num_units() const { return centroids_.rows(); }
  std::size_t dim() const { return centroids_.cols(); }
  const Matrix& centroids() const { return centroids_; }

  // Nearest centroid by squared Euclidean distance; ties go to the lower id.
  UnitSequence quantize(const Matrix& frames, Exec exec = Exec::kParallel) const;

 private:
  Matrix centroids_;
};

// Assignment kernel shared by fitting and quantization. Fills `labels` and,
// when non-empty, the squared distance to the chosen centroid.
void assign_nearest(const Matrix& centroids, const Matrix& frames, std::span<int> labels,
                    std::span<double> distances, Exec exec = Exec::kParallel);

struct KMeansOptions {
  int max_iters = 300;
  double tol = 1e-4;  // on the largest centroid shift
  // Round the final centroids to the f32 precision of the quantizer file so
  // a saved model reloads bit-identically.
  bool round_to_f32 = true;
};

struct KMeansFit {
  KMeansQuantizer model;
  std::vector<double> inertia;  // after each assignment step
  int iterations = 0;
  bool converged = false;
};

// k-means++ seeding then Lloyd iterations. Empty clusters are re-seeded at
// the point farthest from its centroid.
KMeansFit kmeans_fit(const Matrix& data, std::size_t k, const KMeansOptions& options, Rng& rng,
                     Exec exec = Exec::kParallel);

std::size_t count_distinct_rows(const Matrix& data);

// ---------------------------------------------------------------------------
// MLP quantizer: three affine layers with LeakyReLU between them, K + 1
// outputs (the last one is the CTC blank).

inline constexpr double kLeakySlope = 0.01;

struct MlpShape {
  std::size_t input_dim = 0;
  std::size_t units = 0;
  std::size_t hidden1 = 0;
  std::size_t hidden2 = 0;

  std::size_t outputs() const { return units + 1; }
  std::size_t blank() const { return units; }
  std::size_t num_params() const;

  // Hidden sizes step linearly from D toward K by floor((D - K) / 3),
  // never below K + 1.
  static MlpShape for_dims(std::size_t input_dim, std::size_t units);

  friend bool operator==(const MlpShape&, const MlpShape&) = default;
};

// Mutable view of one affine layer inside the flat parameter vector.
struct LayerView {
  std::span<double> weight;  // out x in, row-major
  std::span<double> bias;    // out
  std::size_t in = 0;
  std::size_t out = 0;
};

struct ConstLayerView {
  std::span<const double> weight;
  std::span<const double> bias;
  std::size_t in = 0;
  std::size_t out = 0;
};

// Intermediate values of a forward pass, kept for backpropagation.
struct MlpActivations {
  Matrix pre1, post1, pre2, post2, logits;
};

class MlpQuantizer {
 public:
  MlpQuantizer() = default;
  explicit MlpQuantizer(MlpShape shape);  // all-zero parameters

  // Weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), rounded to f32.
  static MlpQuantizer initialize(MlpShape shape, Rng& rng);

  const MlpShape& shape() const { return shape_; }
  std::size_t num_units() const { return shape_.units; }
  std::size_t dim() const { return shape_.input_dim; }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  LayerView layer(int index);
  ConstLayerView layer(int index) const;

  // T' x (K + 1) logits.
  Matrix forward(const Matrix& frames) const;
  MlpActivations forward_cached(const Matrix& frames) const;

  // Per-frame argmax over the K non-blank logits; ties go to the lower id.
  UnitSequence quantize(const Matrix& frames) const;

  void round_to_f32();

 private:
  void check_input(const Matrix& frames) const;

  MlpShape shape_;
  std::vector<double> params_;
};

// Argmax over the first `units` columns of each row.
UnitSequence argmax_units(const Matrix& logits, std::size_t units);

// ---------------------------------------------------------------------------
// Any quantizer

using Quantizer = std::variant<KMeansQuantizer, MlpQuantizer>;

UnitSequence quantize(const Quantizer& q, const Matrix& frames);
std::size_t num_units(const Quantizer& q);
std::size_t input_dim(const Quantizer& q);

// Quantizer file, little-endian:
//   bytes 0-3  magic "RUQZ"
//   u32        version (1)
//   u32        kind: 0 = k-means, 1 = MLP
//   u32        K
//   u32        D
//   k-means:   f32[K*D] centroids, row-major
//   MLP:       u32 hidden1, u32 hidden2, then f32 W1, b1, W2, b2, W3, b3
//              (weights out x in, row-major)
void save_quantizer(const Quantizer& q, const std::filesystem::path& path);
Quantizer load_quantizer(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_quantizer(const Quantizer& q);
Quantizer decode_quantizer(std::span<const std::uint8_t> bytes);

// Unit files: one utterance per line, whitespace-separated 0-based ids.
void write_units(std::ostream& out, std::span<const UnitSequence> utterances);
std::vector<UnitSequence> read_units(std::istream& in);
void write_unit_file(const std::filesystem::path& path,
                     std::span<const UnitSequence> utterances);
std::vector<UnitSequence> read_unit_file(const std::filesystem::path& path);

}  // namespace robunits
