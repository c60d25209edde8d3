#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "implcons/loss.hpp"
#include "implcons/metric.hpp"
#include "implcons/synth.hpp"

namespace implcons::trainer {

struct FeatureConfig {
  /// Fraction of feature entries zeroed. The mask is a fixed function of
  /// (dropout_seed, world id, query id, feature index).
  double dropout_rate = 0.3;
  std::uint64_t dropout_seed = 0x5eed;
};

/// n_attr attribute bits, then for each attribute a (used, signed value)
/// pair, then a 3-way connective one-hot. The signed value is +1 when the
/// literal on that attribute holds in the world, -1 when it does not, and 0
/// when the attribute is not used.
std::size_t feature_dim(std::size_t n_attr) noexcept;

std::vector<double> featurize(const synth::World& world, const synth::Query& query,
                              const FeatureConfig& config);

struct ToyModel {
  std::vector<double> weights;
  double bias = 0.0;

  explicit ToyModel(std::size_t dim = 0) : weights(dim, 0.0) {}
  std::size_t dim() const noexcept { return weights.size(); }
};

/// Probability that the question's answer is "yes". Throws
/// DimensionMismatchError when the feature length differs from the model.
double predict_prob(const ToyModel& model, std::span<const double> features);

/// Probability of the proposition (q, answer): p(yes) or 1 - p(yes).
inline double proposition_prob(double p_yes, bool answer_yes) noexcept {
  return answer_yes ? p_yes : 1.0 - p_yes;
}

/// One implication arrow of the training set, as dataset indices.
struct PairedSample {
  std::size_t world = 0;
  std::size_t sufficient = 0;  // query index within the world
  std::size_t necessary = 0;

  bool operator==(const PairedSample&) const = default;
};

/// Arrows of the listed worlds, in graph order.
std::vector<PairedSample> paired_samples(const synth::SyntheticDataset& dataset,
                                         std::span<const std::size_t> world_indices);

using Batch = std::vector<PairedSample>;

/// One epoch of batches: every sample exactly once, in an order shuffled by
/// `seed`; the final short batch is kept. Throws EmptyGraphError.
std::vector<Batch> sample_batches(std::span<const PairedSample> samples, std::size_t batch_pairs,
                                  std::uint64_t seed);

/// Shuffle seed of one training epoch.
std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch) noexcept;

struct TrainConfig {
  double lambda = 0.0;
  double learning_rate = 0.1;
  std::size_t epochs = 50;
  std::size_t batch_pairs = 16;
  std::uint64_t seed = 0;
  double epsilon = 1e-7;
  FeatureConfig features;
  /// Fraction of worlds used for training; the rest is held out.
  double train_fraction = 0.8;

  void validate() const;
};

/// Cached feature vectors per (world, query).
class FeatureTable {
 public:
  FeatureTable(const synth::SyntheticDataset& dataset, const FeatureConfig& config);

  std::span<const double> at(std::size_t world, std::size_t query) const;
  std::size_t dim() const noexcept { return dim_; }

 private:
  std::size_t dim_ = 0;
  std::vector<std::size_t> offsets_;  // first row of each world
  std::vector<double> data_;
};

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> weight_grad;
  double bias_grad = 0.0;
};

/// Loss of one batch: mean binary cross-entropy over both propositions of
/// every arrow plus lambda times the mean consistency loss over arrows,
/// with its exact gradient with respect to (weights, bias).
LossAndGradient batch_loss(const ToyModel& model, const synth::SyntheticDataset& dataset,
                           const FeatureTable& features, std::span<const PairedSample> batch,
                           const LossConfig& loss);

struct EpochMetrics {
  double train_loss = 0.0;
  double accuracy = 0.0;
  double consistency = 0.0;

  bool operator==(const EpochMetrics&) const = default;
};

struct MetricsHistory {
  std::vector<EpochMetrics> epochs;
  ConsistencyReport final_report;  // held-out split
};

/// Worlds for training and held-out evaluation, split by `seed`.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> heldout;
};

Split split_worlds(std::size_t n_worlds, double train_fraction, std::uint64_t seed);

/// Committed answers (argmax of yes/no) for every proposition of the worlds.
PredictionSet predict(const ToyModel& model, const synth::SyntheticDataset& dataset,
                      const FeatureTable& features, std::span<const std::size_t> worlds);

struct TrainResult {
  ToyModel model;
  MetricsHistory history;
  Split split;
  PredictionSet heldout_predictions;
};

/// Plain gradient descent from zero weights. Deterministic given the
/// dataset and config. Throws EmptyGraphError when either split has no
/// arrows.
TrainResult train(const synth::SyntheticDataset& dataset, const TrainConfig& config);

struct SweepRun {
  double lambda = 0.0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double consistency = 0.0;

  bool operator==(const SweepRun&) const = default;
};

struct SweepSummary {
  double lambda = 0.0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  double mean_consistency = 0.0;
  double std_consistency = 0.0;
};

struct SweepResult {
  std::vector<SweepRun> runs;  // lambda-major, then seed, in input order
  std::vector<SweepSummary> summary;
};

/// Trains one model per (lambda, seed) with `base` otherwise unchanged.
/// Runs are independent and execute in parallel. Requires >= 2 lambdas
/// and >= 3 seeds (ValidationError).
SweepResult lambda_sweep(const synth::SyntheticDataset& dataset, std::span<const double> lambdas,
                         std::span<const std::uint64_t> seeds, const TrainConfig& base);

/// Mean and sample standard deviation per lambda.
std::vector<SweepSummary> summarize(std::span<const SweepRun> runs);

}  // namespace implcons::trainer
