#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "circot/circular_ot.hpp"
#include "circot/ground_metric.hpp"
#include "circot/histogram.hpp"
#include "circot/labels.hpp"

namespace circot {

inline constexpr std::size_t kToyFeatureDim = 6;  // 3 harmonics x (cos, sin)

// Benchmark feature-noise level: high enough that the bin posterior is genuinely
// ambiguous, which is the regime the circular losses are built for.
inline constexpr double kToyFeatureNoise = 0.8;

// Label corruption: with probability outlier_rate the label is resampled
// uniformly; otherwise it is shifted by a centered Binomial(k, p) offset.
// feature_sigma controls the additive Gaussian noise on the angle embedding.
struct NoiseSpec {
  unsigned k = 0;
  double p = 0.5;
  double outlier_rate = 0.0;
  double feature_sigma = kToyFeatureNoise;
};

struct Sample {
  std::vector<double> features;
  std::size_t true_bin = 0;
  std::size_t noisy_bin = 0;
};

struct SyntheticDataset {
  std::size_t n_bins = 0;
  std::vector<Sample> samples;
};

// Samples true bins uniformly, embeds the bin angle as three (cos, sin)
// harmonics with additive Gaussian feature noise, then corrupts the label.
SyntheticDataset gen_synthetic(std::size_t n_bins, std::size_t n_samples, const NoiseSpec& noise,
                               std::uint64_t seed);

// One hidden tanh layer, no biases, softmax head. The hidden activations are
// the features used for adaptive ground-metric learning.
struct ToyModel {
  std::size_t n_features = 0;
  std::size_t n_hidden = 0;
  std::size_t n_bins = 0;
  std::vector<double> w1;  // n_features x n_hidden, row-major
  std::vector<double> w2;  // n_hidden x n_bins, row-major

  std::vector<double> hidden(std::span<const double> x) const;
  std::vector<double> logits(std::span<const double> x) const;
  std::vector<double> softmax(std::span<const double> x) const;
  std::size_t predict_bin(std::span<const double> x) const;
};

enum class LossKind { cross_entropy, wasserstein };

// Training objective: plain cross-entropy against the (noisy) one-hot label,
// or a Wasserstein loss under the given ground metric, optionally against a
// smoothed conservative target instead of the one-hot.
struct LossDescriptor {
  LossKind kind = LossKind::cross_entropy;
  GroundMetricSpec metric;
  std::optional<SmoothingSpec> smoothing;
  std::uint64_t precision = 1'000'000;  // cut-search grid for smoothed targets

  // "ce", or "wass-<metric>[-<family>]" with metric one of linear, power<r>,
  // huber<t>, chord, step and family one of binomial, poisson, gaussian.
  static LossDescriptor parse(const std::string& text);
  std::string name() const;
};

struct TrainOptions {
  std::size_t epochs = 100;
  double lr = 0.5;
  std::size_t batch_size = 0;  // 0 = full batch; otherwise shuffled mini-batches
  double weight_decay = 0.0;   // keeps logits bounded so the softmax never saturates
  bool adaptive = false;
  std::uint64_t seed = 1;
  std::size_t hidden = 32;
  std::size_t adapt_rounds = 10;  // blend weight anneals 10 -> 0 over this many epochs
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;    // mean batch loss before this epoch's update
  double eval_maad = 0.0;     // degrees, argmax vs true bins, after the update
  double expected_arc = 0.0;  // degrees, mean of sum_n s_n * arc(n, true)
  double blend_weight = 0.0;  // adaptive schedule value used this epoch
};

struct TrainResult {
  ToyModel model;
  std::vector<EpochStats> history;
};

// Gradient descent (full batch or shuffled mini-batches), deterministic given
// the seed. Loss gradients w.r.t. the softmax output are chained through the
// softmax Jacobian by hand.
TrainResult train_toy(const SyntheticDataset& data, const LossDescriptor& loss,
                      const TrainOptions& opt);

// Mean absolute angular deviation in degrees: mean arc_length * 360 / N.
double maad(std::span<const std::size_t> pred_bins, std::span<const std::size_t> true_bins,
            std::size_t n_bins);

// Fraction of samples with angular error (radians) strictly below the threshold.
double acc_at(std::span<const std::size_t> pred_bins, std::span<const std::size_t> true_bins,
              std::size_t n_bins, double threshold_radians);

// Median angular error in degrees; even counts average the two central values.
double median_ae(std::span<const std::size_t> pred_bins, std::span<const std::size_t> true_bins,
                 std::size_t n_bins);

}  // namespace circot
