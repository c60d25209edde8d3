#include "implcons/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include "implcons/errors.hpp"
#include "stable_hash.hpp"

namespace implcons::trainer {

namespace {

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// ln(1 + e^z)
double softplus(double z) noexcept {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double score(const ToyModel& model, std::span<const double> x) noexcept {
  double s = model.bias;
  for (std::size_t k = 0; k < x.size(); ++k) s += model.weights[k] * x[k];
  return s;
}

// d pi / d score for the proposition (q, answer), zero where pi is clamped.
double prob_slope(double p_yes, bool answer_yes, double epsilon) noexcept {
  double pi = proposition_prob(p_yes, answer_yes);
  if (pi <= epsilon || pi >= 1.0 - epsilon) return 0.0;
  double d = p_yes * (1.0 - p_yes);
  return answer_yes ? d : -d;
}

struct HeldOut {
  std::vector<Proposition> propositions;
  PropositionIndex index;
  ImplicationGraph graph;
};

HeldOut make_heldout(const synth::SyntheticDataset& ds, std::span<const std::size_t> worlds) {
  HeldOut h;
  h.propositions = ds.propositions(worlds);
  h.index = PropositionIndex(h.propositions);
  std::vector<RelationRecord> records;
  for (const auto& r : ds.relations) {
    if (h.index.contains(r.image_id, r.prop_i)) records.push_back(r);
  }
  h.graph = build_graph(records, h.index);
  return h;
}

}  // namespace

std::size_t feature_dim(std::size_t n_attr) noexcept { return n_attr + 2 * n_attr + 3; }

std::vector<double> featurize(const synth::World& world, const synth::Query& query,
                              const FeatureConfig& config) {
  const std::size_t n = world.attributes.size();
  const auto& f = query.formula;
  if (f.max_index() >= n) {
    throw ValidationError("query '" + query.id + "' references an attribute outside the world");
  }
  std::vector<double> x(feature_dim(n), 0.0);
  for (std::size_t i = 0; i < n; ++i) x[i] = world.attributes[i] != 0 ? 1.0 : 0.0;

  const auto packed = world.packed();
  auto put_literal = [&](synth::Literal l) {
    bool holds = synth::eval_bits(synth::Formula::literal(l.index, l.negated), packed);
    x[n + 2 * l.index] = 1.0;
    x[n + 2 * l.index + 1] = holds ? 1.0 : -1.0;
  };
  put_literal(f.lhs);
  if (f.op != synth::Connective::Literal) put_literal(f.rhs);
  x[3 * n + static_cast<std::size_t>(f.op)] = 1.0;

  if (config.dropout_rate > 0.0) {
    for (std::size_t k = 0; k < x.size(); ++k) {
      auto h = detail::keyed_hash(config.dropout_seed, world.id, query.id, std::to_string(k));
      if (detail::unit_interval(h) < config.dropout_rate) x[k] = 0.0;
    }
  }
  return x;
}

double predict_prob(const ToyModel& model, std::span<const double> features) {
  if (features.size() != model.dim()) {
    throw DimensionMismatchError("feature length " + std::to_string(features.size()) +
                                 " does not match model dimension " +
                                 std::to_string(model.dim()));
  }
  return sigmoid(score(model, features));
}

std::vector<PairedSample> paired_samples(const synth::SyntheticDataset& dataset,
                                         std::span<const std::size_t> world_indices) {
  std::map<std::string, std::size_t> selected;
  for (auto w : world_indices) selected.emplace(dataset.worlds.at(w).id, w);
  std::vector<RelationRecord> records;
  for (const auto& r : dataset.relations) {
    if (selected.count(r.image_id) != 0) records.push_back(r);
  }
  auto graph = build_graph(records);
  std::vector<PairedSample> out;
  out.reserve(graph.size());
  for (const auto& a : graph.arrows()) {
    auto w = selected.at(a.image_id);
    out.push_back({w, dataset.query_index(w, a.sufficient), dataset.query_index(w, a.necessary)});
  }
  return out;
}

std::vector<Batch> sample_batches(std::span<const PairedSample> samples, std::size_t batch_pairs,
                                  std::uint64_t seed) {
  if (samples.empty()) throw EmptyGraphError("no implication arrows to sample from");
  if (batch_pairs == 0) throw ValidationError("batch_pairs must be positive");
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_pairs) {
    Batch b;
    auto end = std::min(order.size(), start + batch_pairs);
    for (auto i = start; i < end; ++i) b.push_back(samples[order[i]]);
    batches.push_back(std::move(b));
  }
  return batches;
}

std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch) noexcept {
  return detail::mix64(seed) + static_cast<std::uint64_t>(epoch);
}

void TrainConfig::validate() const {
  LossConfig{lambda, epsilon}.validate();
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (epochs == 0) throw ValidationError("epochs must be positive");
  if (batch_pairs == 0) throw ValidationError("batch_pairs must be positive");
  if (!(features.dropout_rate >= 0.0 && features.dropout_rate < 1.0)) {
    throw ValidationError("dropout_rate must lie in [0, 1)");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("train_fraction must lie in (0, 1)");
  }
}

FeatureTable::FeatureTable(const synth::SyntheticDataset& dataset, const FeatureConfig& config)
    : dim_(feature_dim(dataset.n_attr)) {
  std::size_t rows = 0;
  for (const auto& qs : dataset.queries) {
    offsets_.push_back(rows);
    rows += qs.size();
  }
  data_.reserve(rows * dim_);
  for (std::size_t w = 0; w < dataset.worlds.size(); ++w) {
    for (const auto& item : dataset.queries[w]) {
      auto x = featurize(dataset.worlds[w], item.query, config);
      data_.insert(data_.end(), x.begin(), x.end());
    }
  }
}

std::span<const double> FeatureTable::at(std::size_t world, std::size_t query) const {
  return std::span<const double>(data_).subspan((offsets_.at(world) + query) * dim_, dim_);
}

LossAndGradient batch_loss(const ToyModel& model, const synth::SyntheticDataset& dataset,
                           const FeatureTable& features, std::span<const PairedSample> batch,
                           const LossConfig& loss) {
  LossAndGradient out;
  out.weight_grad.assign(model.dim(), 0.0);
  if (batch.empty()) return out;

  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const bool with_consistency = loss.lambda != 0.0;
  double ce_sum = 0.0;
  double cons_sum = 0.0;

  auto accumulate = [&](std::span<const double> x, double d_score) {
    for (std::size_t k = 0; k < x.size(); ++k) out.weight_grad[k] += d_score * x[k];
    out.bias_grad += d_score;
  };

  for (const auto& s : batch) {
    const auto& qs = dataset.queries[s.world];
    const bool y1 = qs[s.sufficient].gold_yes;
    const bool y2 = qs[s.necessary].gold_yes;
    auto x1 = features.at(s.world, s.sufficient);
    auto x2 = features.at(s.world, s.necessary);
    if (x1.size() != model.dim()) throw DimensionMismatchError("feature/model dimension mismatch");

    const double s1 = score(model, x1);
    const double s2 = score(model, x2);
    const double p1 = sigmoid(s1);
    const double p2 = sigmoid(s2);

    // Cross-entropy from logits: softplus(s) - y s, derivative p - y.
    ce_sum += softplus(s1) - (y1 ? s1 : 0.0);
    ce_sum += softplus(s2) - (y2 ? s2 : 0.0);
    double d1 = 0.5 * inv_b * (p1 - (y1 ? 1.0 : 0.0));
    double d2 = 0.5 * inv_b * (p2 - (y2 ? 1.0 : 0.0));

    if (with_consistency) {
      // Propositions carry the gold answer, so pi is the gold answer's probability.
      PropPair pair{proposition_prob(p1, y1), proposition_prob(p2, y2)};
      cons_sum += cons_loss(pair, loss);
      auto g = cons_loss_grad(pair, loss);
      d1 += loss.lambda * inv_b * g.d_pi1 * prob_slope(p1, y1, loss.epsilon);
      d2 += loss.lambda * inv_b * g.d_pi2 * prob_slope(p2, y2, loss.epsilon);
    }
    accumulate(x1, d1);
    accumulate(x2, d2);
  }

  out.loss = 0.5 * inv_b * ce_sum;
  if (with_consistency) out.loss += loss.lambda * inv_b * cons_sum;
  return out;
}

Split split_worlds(std::size_t n_worlds, double train_fraction, std::uint64_t seed) {
  std::vector<std::size_t> order(n_worlds);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(detail::mix64(seed ^ 0x73706c6974ULL));
  std::shuffle(order.begin(), order.end(), rng);
  auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n_worlds)));
  if (n_worlds >= 2) n_train = std::clamp<std::size_t>(n_train, 1, n_worlds - 1);
  Split s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.heldout.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.heldout.begin(), s.heldout.end());
  return s;
}

PredictionSet predict(const ToyModel& model, const synth::SyntheticDataset& dataset,
                      const FeatureTable& features, std::span<const std::size_t> worlds) {
  PredictionSet out;
  for (auto w : worlds) {
    const auto& qs = dataset.queries.at(w);
    for (std::size_t q = 0; q < qs.size(); ++q) {
      double p = predict_prob(model, features.at(w, q));
      bool yes = p >= 0.5;
      out.set(dataset.worlds[w].id, qs[q].query.id, {yes ? "yes" : "no", yes ? p : 1.0 - p});
    }
  }
  return out;
}

TrainResult train(const synth::SyntheticDataset& dataset, const TrainConfig& config) {
  config.validate();
  const FeatureTable features(dataset, config.features);
  const LossConfig loss{config.lambda, config.epsilon};

  TrainResult result;
  result.split = split_worlds(dataset.worlds.size(), config.train_fraction, config.seed);
  const auto samples = paired_samples(dataset, result.split.train);
  if (samples.empty()) throw EmptyGraphError("training split has no implication arrows");
  const auto heldout = make_heldout(dataset, result.split.heldout);
  if (heldout.graph.empty()) throw EmptyGraphError("held-out split has no implication arrows");

  ToyModel model(features.dim());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    auto batches = sample_batches(samples, config.batch_pairs, epoch_seed(config.seed, epoch));
    double loss_sum = 0.0;
    for (const auto& batch : batches) {
      auto lg = batch_loss(model, dataset, features, batch, loss);
      loss_sum += lg.loss;
      for (std::size_t k = 0; k < model.dim(); ++k) {
        model.weights[k] -= config.learning_rate * lg.weight_grad[k];
      }
      model.bias -= config.learning_rate * lg.bias_grad;
    }
    auto preds = predict(model, dataset, features, result.split.heldout);
    result.history.epochs.push_back(
        {loss_sum / static_cast<double>(batches.size()), accuracy(preds, heldout.index),
         consistency_ratio(heldout.graph, heldout.index, preds)});
  }

  result.heldout_predictions = predict(model, dataset, features, result.split.heldout);
  result.history.final_report = make_report(heldout.graph, heldout.index, result.heldout_predictions);
  result.model = std::move(model);
  return result;
}

std::vector<SweepSummary> summarize(std::span<const SweepRun> runs) {
  std::vector<double> order;
  std::map<double, std::vector<const SweepRun*>> by_lambda;
  for (const auto& r : runs) {
    if (by_lambda.count(r.lambda) == 0) order.push_back(r.lambda);
    by_lambda[r.lambda].push_back(&r);
  }
  auto mean_std = [](const std::vector<double>& v) {
    double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    return std::pair{m, sd};
  };
  std::vector<SweepSummary> out;
  for (double lambda : order) {
    std::vector<double> acc, cons;
    for (const auto* r : by_lambda[lambda]) {
      acc.push_back(r->accuracy);
      cons.push_back(r->consistency);
    }
    auto [ma, sa] = mean_std(acc);
    auto [mc, sc] = mean_std(cons);
    out.push_back({lambda, ma, sa, mc, sc});
  }
  return out;
}

SweepResult lambda_sweep(const synth::SyntheticDataset& dataset, std::span<const double> lambdas,
                         std::span<const std::uint64_t> seeds, const TrainConfig& base) {
  if (lambdas.size() < 2) throw ValidationError("a sweep needs at least two lambda values");
  if (seeds.size() < 3) throw ValidationError("a sweep needs at least three seeds per lambda");

  const std::size_t n_jobs = lambdas.size() * seeds.size();
  SweepResult result;
  result.runs.resize(n_jobs);
  std::vector<std::exception_ptr> errors(n_jobs);

#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(n_jobs); ++j) {
    const auto job = static_cast<std::size_t>(j);
    TrainConfig cfg = base;
    cfg.lambda = lambdas[job / seeds.size()];
    cfg.seed = seeds[job % seeds.size()];
    try {
      auto r = train(dataset, cfg);
      result.runs[job] = {cfg.lambda, cfg.seed, r.history.final_report.accuracy,
                          r.history.final_report.consistency};
    } catch (...) {
      errors[job] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  result.summary = summarize(result.runs);
  return result;
}

}  // namespace implcons::trainer
