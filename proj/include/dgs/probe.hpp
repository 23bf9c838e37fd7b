#pragma once

// Linear softmax probe over hand-crafted snippet features, trained by
// full-batch gradient descent on the cross-entropy loss
//   L = -sum_i t_i ln(p_i),  p = softmax(W x + b).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "dgs/error.hpp"
#include "dgs/image.hpp"
#include "dgs/motion.hpp"
#include "dgs/parallel.hpp"
#include "dgs/pretext.hpp"
#include "dgs/raster_io.hpp"

namespace dgs::probe {

inline constexpr std::size_t kNumFeatures = 6;
inline constexpr double kProbEpsilon = 1e-12;

// [mean chroma deviation, motion fraction (threshold 8),
//  mean |R-B| over motion pixels, mean |G-(R+B)/2| over motion pixels,
//  motion bounding-box diagonal / image diagonal, ln(1 + motion pixel count)]
using FeatureVector = std::array<double, kNumFeatures>;

inline FeatureVector extract_features(const PlanarRgb& img) {
  if (!img.consistent() || img.pixel_count() == 0) fail(Errc::geometry_mismatch, "invalid snippet raster");
  const std::uint32_t w = img.width(), h = img.height();
  double dev_sum = 0, rb_sum = 0, g_sum = 0;
  std::size_t count = 0;
  std::uint32_t x0 = w, y0 = h, x1 = 0, y1 = 0;
  for (std::uint32_t y = 0; y < h; ++y)
    for (std::uint32_t x = 0; x < w; ++x) {
      const std::size_t i = std::size_t{y} * w + x;
      const int r = img.r.pixels[i], g = img.g.pixels[i], b = img.b.pixels[i];
      const int dev = std::max({r, g, b}) - std::min({r, g, b});
      dev_sum += dev;
      if (dev < motion::kDefaultThreshold) continue;
      ++count;
      rb_sum += std::abs(r - b);
      g_sum += std::abs(g - 0.5 * (r + b));
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  const double n = static_cast<double>(img.pixel_count());
  FeatureVector f{};
  f[0] = dev_sum / n;
  f[1] = static_cast<double>(count) / n;
  if (count > 0) {
    f[2] = rb_sum / static_cast<double>(count);
    f[3] = g_sum / static_cast<double>(count);
    f[4] = std::hypot(double(x1 - x0 + 1), double(y1 - y0 + 1)) / std::hypot(double(w), double(h));
  }
  f[5] = std::log1p(static_cast<double>(count));
  return f;
}

// ---------------------------------------------------------------------------

// Log-sum-exp stabilised softmax.
inline std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) fail(Errc::dimension_mismatch, "softmax of an empty vector");
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0;
  for (std::size_t i = 0; i < p.size(); ++i) z += (p[i] = std::exp(logits[i] - m));
  for (auto& v : p) v /= z;
  return p;
}

// -sum t_i ln(max(p_i, 1e-12)), natural log.
inline double cross_entropy(std::span<const double> target, std::span<const double> prob) {
  if (target.size() != prob.size() || target.empty())
    fail(Errc::dimension_mismatch, "label and probability vectors differ in length");
  double sum = 0;
  for (auto v : prob) {
    if (!(v >= 0.0 && v <= 1.0)) fail(Errc::invalid_argument, "probabilities must lie in [0,1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) fail(Errc::invalid_argument, "probabilities must sum to 1");
  double loss = 0;
  for (std::size_t i = 0; i < prob.size(); ++i)
    if (target[i] != 0) loss -= target[i] * std::log(std::max(prob[i], kProbEpsilon));
  return loss;
}

inline std::vector<double> one_hot(std::size_t index, std::size_t n) {
  if (index >= n) fail(Errc::dimension_mismatch, "label index out of range");
  std::vector<double> t(n, 0.0);
  t[index] = 1.0;
  return t;
}

// dL/dz for L = cross_entropy(t, softmax(z)) is p - t.
inline std::vector<double> logit_gradient(std::span<const double> target, std::span<const double> logits) {
  if (target.size() != logits.size()) fail(Errc::dimension_mismatch, "label and logit vectors differ in length");
  auto p = softmax(logits);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] -= target[i];
  return p;
}

// ---------------------------------------------------------------------------

struct SoftmaxModel {
  std::size_t n_classes = 0;
  std::size_t n_features = 0;
  std::vector<double> weights;  // n_classes x n_features, row-major
  std::vector<double> bias;     // n_classes
  std::vector<double> mean, stddev;

  std::vector<double> normalize(std::span<const double> x) const {
    if (x.size() != n_features) fail(Errc::dimension_mismatch, "feature vector has the wrong length");
    std::vector<double> z(n_features);
    for (std::size_t j = 0; j < n_features; ++j) z[j] = (x[j] - mean[j]) / stddev[j];
    return z;
  }

  std::vector<double> logits_normalized(std::span<const double> z) const {
    std::vector<double> out(bias);
    for (std::size_t c = 0; c < n_classes; ++c)
      for (std::size_t j = 0; j < n_features; ++j) out[c] += weights[c * n_features + j] * z[j];
    return out;
  }

  std::vector<double> predict_proba(std::span<const double> x) const { return softmax(logits_normalized(normalize(x))); }

  std::size_t predict(std::span<const double> x) const {
    const auto p = predict_proba(x);
    return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  }

  void save(std::ostream& out) const;
  static SoftmaxModel load(std::istream& in);
};

inline void SoftmaxModel::save(std::ostream& out) const {
  std::ostringstream s;
  s.precision(17);
  auto row = [&](const char* name, std::span<const double> v) {
    s << name;
    for (auto x : v) s << ' ' << x;
    s << '\n';
  };
  s << "dgs-probe-model 1\n"
    << "classes " << n_classes << '\n'
    << "features " << n_features << '\n';
  row("mean", mean);
  row("std", stddev);
  row("bias", bias);
  for (std::size_t c = 0; c < n_classes; ++c)
    row("weights", std::span<const double>(weights).subspan(c * n_features, n_features));
  out << s.str();
}

inline SoftmaxModel SoftmaxModel::load(std::istream& in) {
  SoftmaxModel m;
  std::string magic, key;
  int version = 0;
  if (!(in >> magic >> version) || magic != "dgs-probe-model" || version != 1)
    fail(Errc::unsupported_format, "not a dgs probe model file");
  if (!(in >> key >> m.n_classes) || key != "classes") fail(Errc::decode_error, "model: expected classes");
  if (!(in >> key >> m.n_features) || key != "features") fail(Errc::decode_error, "model: expected features");
  auto row = [&](const char* name, std::size_t n) {
    std::vector<double> v(n);
    if (!(in >> key) || key != name) fail(Errc::decode_error, std::string("model: expected ") + name);
    for (auto& x : v)
      if (!(in >> x)) fail(Errc::decode_error, std::string("model: short row ") + name);
    return v;
  };
  m.mean = row("mean", m.n_features);
  m.stddev = row("std", m.n_features);
  m.bias = row("bias", m.n_classes);
  for (std::size_t c = 0; c < m.n_classes; ++c) {
    const auto w = row("weights", m.n_features);
    m.weights.insert(m.weights.end(), w.begin(), w.end());
  }
  return m;
}

// ---------------------------------------------------------------------------

struct Sample {
  FeatureVector x{};
  std::uint32_t label = 0;
};

struct TrainConfig {
  std::uint32_t epochs = 500;
  double lr = 0.1;
  std::uint64_t seed = 0;
};

struct EpochLoss {
  std::uint32_t epoch = 0;
  double train = 0;
  double val = 0;  // NaN when no validation samples
};

struct TrainResult {
  SoftmaxModel model;
  std::vector<EpochLoss> curve;
};

namespace detail {

inline double mean_loss(const SoftmaxModel& m, const std::vector<std::vector<double>>& z,
                        std::span<const Sample> s) {
  if (s.empty()) return std::nan("");
  double sum = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto p = softmax(m.logits_normalized(z[i]));
    sum -= std::log(std::max(p[s[i].label], kProbEpsilon));
  }
  return sum / static_cast<double>(s.size());
}

}  // namespace detail

// Full-batch gradient descent from zero weights. Features are standardised
// with train-split statistics (a constant feature keeps unit scale). Training
// is deterministic; the seed is recorded for reproducibility of callers that
// derive label permutations from it.
inline TrainResult train_softmax(std::span<const Sample> train, std::span<const Sample> val, std::size_t n_classes,
                                 const TrainConfig& cfg) {
  if (n_classes < 2) fail(Errc::degenerate_data, "need at least two classes");
  if (train.empty()) fail(Errc::empty_input, "training split is empty");
  std::vector<std::size_t> counts(n_classes, 0);
  for (const auto& s : train) {
    if (s.label >= n_classes) fail(Errc::dimension_mismatch, "label exceeds class count");
    ++counts[s.label];
  }
  for (std::size_t c = 0; c < n_classes; ++c)
    if (counts[c] == 0) fail(Errc::degenerate_data, "class " + std::to_string(c) + " is absent from the training split");
  if (!(cfg.lr > 0)) fail(Errc::invalid_argument, "learning rate must be > 0");

  constexpr std::size_t d = kNumFeatures;
  SoftmaxModel m;
  m.n_classes = n_classes;
  m.n_features = d;
  m.weights.assign(n_classes * d, 0.0);
  m.bias.assign(n_classes, 0.0);
  m.mean.assign(d, 0.0);
  m.stddev.assign(d, 0.0);
  const double n = static_cast<double>(train.size());
  for (const auto& s : train)
    for (std::size_t j = 0; j < d; ++j) m.mean[j] += s.x[j] / n;
  for (const auto& s : train)
    for (std::size_t j = 0; j < d; ++j) m.stddev[j] += (s.x[j] - m.mean[j]) * (s.x[j] - m.mean[j]) / n;
  for (auto& v : m.stddev) v = v > 1e-24 ? std::sqrt(v) : 1.0;

  std::vector<std::vector<double>> zt, zv;
  for (const auto& s : train) zt.push_back(m.normalize(s.x));
  for (const auto& s : val) zv.push_back(m.normalize(s.x));

  TrainResult res;
  std::vector<double> gw(n_classes * d), gb(n_classes);
  for (std::uint32_t e = 0; e < cfg.epochs; ++e) {
    std::fill(gw.begin(), gw.end(), 0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
    for (std::size_t i = 0; i < train.size(); ++i) {
      auto p = softmax(m.logits_normalized(zt[i]));
      p[train[i].label] -= 1.0;
      for (std::size_t c = 0; c < n_classes; ++c) {
        gb[c] += p[c];
        for (std::size_t j = 0; j < d; ++j) gw[c * d + j] += p[c] * zt[i][j];
      }
    }
    for (std::size_t k = 0; k < gw.size(); ++k) m.weights[k] -= cfg.lr * gw[k] / n;
    for (std::size_t c = 0; c < n_classes; ++c) m.bias[c] -= cfg.lr * gb[c] / n;
    res.curve.push_back({e + 1, detail::mean_loss(m, zt, train), detail::mean_loss(m, zv, val)});
  }
  res.model = std::move(m);
  return res;
}

struct Evaluation {
  double accuracy = 0;
  double mean_loss = 0;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::size_t count = 0;
};

inline Evaluation evaluate(const SoftmaxModel& m, std::span<const Sample> samples) {
  if (samples.empty()) fail(Errc::empty_input, "cannot evaluate an empty split");
  Evaluation ev;
  ev.confusion.assign(m.n_classes, std::vector<std::size_t>(m.n_classes, 0));
  std::size_t correct = 0;
  double loss = 0;
  for (const auto& s : samples) {
    if (s.label >= m.n_classes) fail(Errc::dimension_mismatch, "label exceeds model classes");
    const auto p = m.predict_proba(s.x);
    const auto pred = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    ++ev.confusion[s.label][pred];
    correct += pred == s.label ? 1 : 0;
    loss -= std::log(std::max(p[s.label], kProbEpsilon));
  }
  ev.count = samples.size();
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());
  ev.mean_loss = loss / static_cast<double>(samples.size());
  return ev;
}

// ---------------------------------------------------------------------------
// Manifest-level entry points.

struct ManifestSamples {
  std::vector<Sample> train, val;
};

inline PlanarRgb load_snippet(const std::filesystem::path& path) { return to_planar(raster::read_image(path)); }

// Extracts features of every record (in parallel). With permute_labels the
// class indices are permuted across records by a seeded shuffle, which keeps
// class counts but destroys any image-label relation.
inline ManifestSamples load_samples(const dataset::DatasetManifest& m, const std::filesystem::path& manifest_dir,
                                    unsigned threads = 1, bool permute_labels = false, std::uint64_t seed = 0) {
  std::vector<Sample> all(m.records.size());
  parallel_for(all.size(), threads, [&](std::size_t i) {
    all[i].x = extract_features(load_snippet(manifest_dir / m.records[i].path));
    all[i].label = m.records[i].class_index;
  });
  if (permute_labels) {
    std::vector<std::uint32_t> labels;
    for (const auto& s : all) labels.push_back(s.label);
    std::mt19937_64 rng(seed);
    dataset::seeded_shuffle(labels, rng);
    for (std::size_t i = 0; i < all.size(); ++i) all[i].label = labels[i];
  }
  ManifestSamples out;
  for (std::size_t i = 0; i < all.size(); ++i)
    (m.records[i].split == dataset::Split::train ? out.train : out.val).push_back(all[i]);
  return out;
}

inline TrainResult train_probe(const dataset::DatasetManifest& m, const std::filesystem::path& manifest_dir,
                               const TrainConfig& cfg, unsigned threads = 1, bool permute_labels = false) {
  const auto s = load_samples(m, manifest_dir, threads, permute_labels, cfg.seed);
  return train_softmax(s.train, s.val, m.n_classes(), cfg);
}

inline void write_curve_csv(std::ostream& out, std::span<const EpochLoss> curve) {
  std::ostringstream s;
  s.precision(10);
  s << "epoch,train_loss,val_loss\n";
  for (const auto& e : curve) {
    s << e.epoch << ',' << e.train << ',';
    if (!std::isnan(e.val)) s << e.val;
    s << '\n';
  }
  out << s.str();
}

}  // namespace dgs::probe
