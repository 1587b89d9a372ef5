// src/quantizer.cpp
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

#include "robunits/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <sstream>

#include "robunits/error.hpp"

namespace robunits {

UnitSequence dedup(std::span<const int> units) {
  UnitSequence out;
  out.reserve(units.size());
  for (int u : units)
    if (out.empty() || out.back() != u) out.push_back(u);
  return out;
}

// ---------------------------------------------------------------------------
// k-means

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    d += diff * diff;
  }
  return d;
}

void nearest_for_row(const Matrix& centroids, std::span<const double> x, int& label,
                     double& dist) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = squared_distance(x, centroids.row(c));
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  label = best;
  dist = best_d;
}

}  // namespace

void assign_nearest(const Matrix& centroids, const Matrix& frames, std::span<int> labels,
                    std::span<double> distances, Exec exec) {
  if (centroids.rows() == 0) throw ValidationError("assign_nearest: no centroids");
  if (frames.rows() > 0 && frames.cols() != centroids.cols())
    throw ValidationError("assign_nearest: frame dimension does not match centroids");
  if (labels.size() != frames.rows() ||
      (!distances.empty() && distances.size() != frames.rows()))
    throw ValidationError("assign_nearest: output size mismatch");
  const bool keep = !distances.empty();
  parallel_for(frames.rows(), exec, [&](std::size_t i) {
    double d;
    nearest_for_row(centroids, frames.row(i), labels[i], d);
    if (keep) distances[i] = d;
  });
}

KMeansQuantizer::KMeansQuantizer(Matrix centroids) : centroids_(std::move(centroids)) {
  if (centroids_.rows() == 0) throw ValidationError("KMeansQuantizer: K must be >= 1");
  for (double v : centroids_.data())
    if (!std::isfinite(v)) throw ValidationError("KMeansQuantizer: non-finite centroid");
}

UnitSequence KMeansQuantizer::quantize(const Matrix& frames, Exec exec) const {
  UnitSequence labels(frames.rows());
  assign_nearest(centroids_, frames, labels, {}, exec);
  return labels;
}

std::size_t count_distinct_rows(const Matrix& data) {
  if (data.rows() == 0) return 0;
  std::vector<std::size_t> idx(data.rows());
  std::iota(idx.begin(), idx.end(), 0);
  auto less = [&](std::size_t a, std::size_t b) {
    const auto ra = data.row(a), rb = data.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  };
  std::sort(idx.begin(), idx.end(), less);
  std::size_t distinct = 1;
  for (std::size_t i = 1; i < idx.size(); ++i)
    if (less(idx[i - 1], idx[i])) ++distinct;
  return distinct;
}

KMeansFit kmeans_fit(const Matrix& data, std::size_t k, const KMeansOptions& options, Rng& rng,
                     Exec exec) {
  if (k == 0) throw ValidationError("kmeans_fit: K must be >= 1");
  if (options.max_iters < 1 || !(options.tol >= 0.0))
    throw ValidationError("kmeans_fit: bad options");
  const std::size_t distinct = count_distinct_rows(data);
  if (distinct < k) {
    std::ostringstream os;
    os << "kmeans_fit: need at least K=" << k << " distinct frames, got " << distinct;
    throw ValidationError(os.str());
  }
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();

  // k-means++ seeding.
  Matrix centroids(k, d);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  auto first = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
  std::copy_n(data.row(first).begin(), d, centroids.row(0).begin());
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      best[i] = std::min(best[i], squared_distance(data.row(i), centroids.row(c - 1)));
      total += best[i];
    }
    const double r = rng.uniform() * total;
    double acc = 0.0;
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      acc += best[i];
      if (best[i] > 0.0 && acc > r) {
        pick = i;
        break;
      }
    }
    if (pick == n) {  // rounding at the tail: take the last point with mass
      for (std::size_t i = n; i-- > 0;)
        if (best[i] > 0.0) {
          pick = i;
          break;
        }
    }
    std::copy_n(data.row(pick).begin(), d, centroids.row(c).begin());
  }

  KMeansFit fit;
  std::vector<int> labels(n);
  std::vector<double> dist(n);
  std::vector<std::size_t> counts(k);
  Matrix sums(k, d);
  for (int iter = 0; iter < options.max_iters; ++iter) {
    assign_nearest(centroids, data, labels, dist, exec);
    fit.inertia.push_back(std::accumulate(dist.begin(), dist.end(), 0.0));

    std::fill(counts.begin(), counts.end(), 0);
    std::fill(sums.data().begin(), sums.data().end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(labels[i]);
      ++counts[c];
      auto s = sums.row(c);
      const auto x = data.row(i);
      for (std::size_t j = 0; j < d; ++j) s[j] += x[j];
    }
    Matrix updated(k, d);
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t j = 0; j < d; ++j)
        updated(c, j) = sums(c, j) / static_cast<double>(counts[c]);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      const auto far = static_cast<std::size_t>(
          std::distance(dist.begin(), std::max_element(dist.begin(), dist.end())));
      std::copy_n(data.row(far).begin(), d, updated.row(c).begin());
      dist[far] = 0.0;
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c)
      shift = std::max(shift, std::sqrt(squared_distance(updated.row(c), centroids.row(c))));
    centroids = std::move(updated);
    fit.iterations = iter + 1;
    if (shift < options.tol) {
      fit.converged = true;
      break;
    }
  }
  if (options.round_to_f32)
    for (double& v : centroids.data()) v = static_cast<float>(v);
  fit.model = KMeansQuantizer(std::move(centroids));
  return fit;
}

// ---------------------------------------------------------------------------
// MLP

std::size_t MlpShape::num_params() const {
  return hidden1 * (input_dim + 1) + hidden2 * (hidden1 + 1) + outputs() * (hidden2 + 1);
}

MlpShape MlpShape::for_dims(std::size_t input_dim, std::size_t units) {
  if (input_dim == 0 || units == 0) throw ValidationError("MlpShape: D and K must be >= 1");
  const auto d = static_cast<std::int64_t>(input_dim);
  const auto k = static_cast<std::int64_t>(units);
  const auto diff = d - k;
  // Floor division (rounds toward -inf for negative differences).
  const std::int64_t step = diff >= 0 ? diff / 3 : -((-diff + 2) / 3);
  const std::int64_t floor_dim = k + 1;
  MlpShape s;
  s.input_dim = input_dim;
  s.units = units;
  s.hidden1 = static_cast<std::size_t>(std::max(floor_dim, d - step));
  s.hidden2 = static_cast<std::size_t>(std::max(floor_dim, d - 2 * step));
  return s;
}

MlpQuantizer::MlpQuantizer(MlpShape shape) : shape_(shape), params_(shape.num_params(), 0.0) {
  if (shape.input_dim == 0 || shape.units == 0 || shape.hidden1 == 0 || shape.hidden2 == 0)
    throw ValidationError("MlpQuantizer: all layer sizes must be positive");
}

MlpQuantizer MlpQuantizer::initialize(MlpShape shape, Rng& rng) {
  MlpQuantizer q(shape);
  for (int l = 0; l < 3; ++l) {
    auto view = q.layer(l);
    const double bound = 1.0 / std::sqrt(static_cast<double>(view.in));
    for (double& w : view.weight) w = rng.uniform(-bound, bound);
    for (double& b : view.bias) b = rng.uniform(-bound, bound);
  }
  q.round_to_f32();
  return q;
}

namespace {

struct LayerDims {
  std::size_t in, out, offset;
};

LayerDims layer_dims(const MlpShape& s, int index) {
  const std::size_t l0 = s.hidden1 * (s.input_dim + 1);
  const std::size_t l1 = s.hidden2 * (s.hidden1 + 1);
  switch (index) {
    case 0: return {s.input_dim, s.hidden1, 0};
    case 1: return {s.hidden1, s.hidden2, l0};
    case 2: return {s.hidden2, s.outputs(), l0 + l1};
    default: throw ValidationError("MlpQuantizer: layer index out of range");
  }
}

void affine(ConstLayerView layer, const Matrix& in, Matrix& out) {
  out = Matrix(in.rows(), layer.out);
  for (std::size_t t = 0; t < in.rows(); ++t) {
    const auto x = in.row(t);
    auto y = out.row(t);
    for (std::size_t j = 0; j < layer.out; ++j) {
      const double* w = layer.weight.data() + j * layer.in;
      double acc = layer.bias[j];
      for (std::size_t i = 0; i < layer.in; ++i) acc += w[i] * x[i];
      y[j] = acc;
    }
  }
}

Matrix leaky_relu(const Matrix& m) {
  Matrix out = m;
  for (double& v : out.data())
    if (v < 0.0) v *= kLeakySlope;
  return out;
}

}  // namespace

LayerView MlpQuantizer::layer(int index) {
  const auto dims = layer_dims(shape_, index);
  const std::span<double> all(params_);
  return {all.subspan(dims.offset, dims.in * dims.out),
          all.subspan(dims.offset + dims.in * dims.out, dims.out), dims.in, dims.out};
}

ConstLayerView MlpQuantizer::layer(int index) const {
  const auto dims = layer_dims(shape_, index);
  const std::span<const double> all(params_);
  return {all.subspan(dims.offset, dims.in * dims.out),
          all.subspan(dims.offset + dims.in * dims.out, dims.out), dims.in, dims.out};
}

void MlpQuantizer::check_input(const Matrix& frames) const {
  if (frames.rows() > 0 && frames.cols() != shape_.input_dim)
    throw ValidationError("MlpQuantizer: frame dimension does not match input_dim");
}

MlpActivations MlpQuantizer::forward_cached(const Matrix& frames) const {
  check_input(frames);
  MlpActivations a;
  if (frames.rows() == 0) {
    a.logits = Matrix(0, shape_.outputs());
    return a;
  }
  affine(layer(0), frames, a.pre1);
  a.post1 = leaky_relu(a.pre1);
  affine(layer(1), a.post1, a.pre2);
  a.post2 = leaky_relu(a.pre2);
  affine(layer(2), a.post2, a.logits);
  return a;
}

Matrix MlpQuantizer::forward(const Matrix& frames) const {
  return forward_cached(frames).logits;
}

UnitSequence argmax_units(const Matrix& logits, std::size_t units) {
  if (logits.rows() > 0 && logits.cols() < units)
    throw ValidationError("argmax_units: too few logit columns");
  UnitSequence out(logits.rows());
  for (std::size_t t = 0; t < logits.rows(); ++t) {
    const auto row = logits.row(t);
    std::size_t best = 0;
    for (std::size_t u = 1; u < units; ++u)
      if (row[u] > row[best]) best = u;
    out[t] = static_cast<int>(best);
  }
  return out;
}

UnitSequence MlpQuantizer::quantize(const Matrix& frames) const {
  return argmax_units(forward(frames), shape_.units);
}

void MlpQuantizer::round_to_f32() {
  for (double& v : params_) v = static_cast<float>(v);
}

// ---------------------------------------------------------------------------
// Variant helpers

UnitSequence quantize(const Quantizer& q, const Matrix& frames) {
  return std::visit([&](const auto& m) { return m.quantize(frames); }, q);
}

std::size_t num_units(const Quantizer& q) {
  return std::visit([](const auto& m) { return m.num_units(); }, q);
}

std::size_t input_dim(const Quantizer& q) {
  return std::visit([](const auto& m) { return m.dim(); }, q);
}

// ---------------------------------------------------------------------------
// Quantizer files

namespace {

constexpr char kQuantizerMagic[4] = {'R', 'U', 'Q', 'Z'};
constexpr std::uint32_t kQuantizerVersion = 1;
constexpr std::uint32_t kKindKMeans = 0;
constexpr std::uint32_t kKindMlp = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}

void put_f32(std::vector<std::uint8_t>& out, double v) {
  const auto f = static_cast<float>(v);
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  put_u32(out, u);
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}
  std::uint32_t u32() {
    if (b_.size() - pos_ < 4) throw FormatError("quantizer file: truncated");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b_[pos_ + i];
    pos_ += 4;
    return v;
  }
  double f32() {
    const std::uint32_t u = u32();
    float f;
    std::memcpy(&f, &u, 4);
    if (!std::isfinite(f)) throw FormatError("quantizer file: non-finite parameter");
    return f;
  }
  bool at_end() const { return pos_ == b_.size(); }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_quantizer(const Quantizer& q) {
  std::vector<std::uint8_t> out(kQuantizerMagic, kQuantizerMagic + 4);
  put_u32(out, kQuantizerVersion);
  if (const auto* km = std::get_if<KMeansQuantizer>(&q)) {
    put_u32(out, kKindKMeans);
    put_u32(out, static_cast<std::uint32_t>(km->num_units()));
    put_u32(out, static_cast<std::uint32_t>(km->dim()));
    for (double v : km->centroids().data()) put_f32(out, v);
  } else {
    const auto& mlp = std::get<MlpQuantizer>(q);
    const auto& s = mlp.shape();
    put_u32(out, kKindMlp);
    put_u32(out, static_cast<std::uint32_t>(s.units));
    put_u32(out, static_cast<std::uint32_t>(s.input_dim));
    put_u32(out, static_cast<std::uint32_t>(s.hidden1));
    put_u32(out, static_cast<std::uint32_t>(s.hidden2));
    for (double v : mlp.params()) put_f32(out, v);
  }
  return out;
}

Quantizer decode_quantizer(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kQuantizerMagic, 4) != 0)
    throw FormatError("quantizer file: bad magic");
  Reader r(bytes.subspan(4));
  if (r.u32() != kQuantizerVersion) throw FormatError("quantizer file: unsupported version");
  const std::uint32_t kind = r.u32();
  const std::uint32_t k = r.u32();
  const std::uint32_t d = r.u32();
  if (k == 0 || d == 0) throw FormatError("quantizer file: zero K or D");
  Quantizer result;
  if (kind == kKindKMeans) {
    Matrix c(k, d);
    for (double& v : c.data()) v = r.f32();
    result = KMeansQuantizer(std::move(c));
  } else if (kind == kKindMlp) {
    MlpShape s;
    s.units = k;
    s.input_dim = d;
    s.hidden1 = r.u32();
    s.hidden2 = r.u32();
    if (s.hidden1 == 0 || s.hidden2 == 0) throw FormatError("quantizer file: zero hidden size");
    MlpQuantizer m(s);
    for (double& v : m.params()) v = r.f32();
    result = std::move(m);
  } else {
    throw FormatError("quantizer file: unknown kind");
  }
  if (!r.at_end()) throw FormatError("quantizer file: trailing bytes");
  return result;
}

void save_quantizer(const Quantizer& q, const std::filesystem::path& path) {
  const auto bytes = encode_quantizer(q);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Quantizer load_quantizer(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_quantizer(bytes);
}

// ---------------------------------------------------------------------------
// Unit files

void write_units(std::ostream& out, std::span<const UnitSequence> utterances) {
  for (const auto& u : utterances) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (i) out << ' ';
      out << u[i];
    }
    out << '\n';
  }
}

std::vector<UnitSequence> read_units(std::istream& in) {
  std::vector<UnitSequence> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    UnitSequence seq;
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      int v = 0;
      try {
        v = std::stoi(tok, &used);
      } catch (const std::exception&) {
        throw FormatError("unit file: bad token '" + tok + "'");
      }
      if (used != tok.size() || v < 0) throw FormatError("unit file: bad token '" + tok + "'");
      seq.push_back(v);
    }
    out.push_back(std::move(seq));
  }
  return out;
}

void write_unit_file(const std::filesystem::path& path,
                     std::span<const UnitSequence> utterances) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_units(out, utterances);
}

std::vector<UnitSequence> read_unit_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_units(in);
}

}  // namespace robunits
