#include "implcons/metric.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "implcons/errors.hpp"
#include "stable_hash.hpp"

namespace implcons {

namespace {

std::string describe(const std::string& image_id, const std::string& prop_id) {
  return "(image '" + image_id + "', proposition '" + prop_id + "')";
}

const Proposition& proposition_at(const PropositionIndex& props, const std::string& image_id,
                                  const std::string& id) {
  const auto* p = props.find(image_id, id);
  if (p == nullptr) throw DanglingReferenceError("unknown proposition " + describe(image_id, id));
  return *p;
}

constexpr std::uint8_t kMissingSufficient = 2;
constexpr std::uint8_t kMissingNecessary = 3;

std::uint8_t arrow_status(const ImplicationArrow& a, const PropositionIndex& props,
                          const PredictionSet& predictions) {
  const auto* ps = predictions.find(a.image_id, a.sufficient);
  if (ps == nullptr) return kMissingSufficient;
  const auto* pn = predictions.find(a.image_id, a.necessary);
  if (pn == nullptr) return kMissingNecessary;
  bool suff = evaluate_truth(*ps, proposition_at(props, a.image_id, a.sufficient));
  bool nec = evaluate_truth(*pn, proposition_at(props, a.image_id, a.necessary));
  return (suff && !nec) ? 1 : 0;
}

}  // namespace

void PredictionSet::set(const std::string& image_id, const std::string& prop_id,
                        Prediction prediction) {
  if (!(prediction.probability >= 0.0 && prediction.probability <= 1.0)) {
    throw ValidationError("probability outside [0,1] for " + describe(image_id, prop_id));
  }
  if (prediction.predicted_answer.empty()) {
    throw ValidationError("empty predicted answer for " + describe(image_id, prop_id));
  }
  entries_.insert_or_assign(PropKey{image_id, prop_id}, std::move(prediction));
}

const Prediction* PredictionSet::find(const std::string& image_id,
                                      const std::string& prop_id) const {
  auto it = entries_.find(PropKey{image_id, prop_id});
  return it == entries_.end() ? nullptr : &it->second;
}

const Prediction& PredictionSet::at(const std::string& image_id, const std::string& prop_id) const {
  const auto* p = find(image_id, prop_id);
  if (p == nullptr) throw MissingPredictionError("no prediction for " + describe(image_id, prop_id));
  return *p;
}

void PredictionSet::check_references(const PropositionIndex& index) const {
  for (const auto& [key, pred] : entries_) {
    if (!index.contains(key.first, key.second)) {
      throw DanglingReferenceError("prediction for unknown proposition " +
                                   describe(key.first, key.second));
    }
  }
}

std::string normalize_answer(std::string_view answer) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  auto b = std::find_if_not(answer.begin(), answer.end(), is_space);
  auto e = std::find_if_not(answer.rbegin(), answer.rend(), is_space).base();
  std::string out;
  if (b < e) out.assign(b, e);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool evaluate_truth(const Prediction& prediction, const Proposition& proposition) {
  return normalize_answer(prediction.predicted_answer) == normalize_answer(proposition.answer);
}

bool evaluate_truth(const PredictionSet& predictions, const Proposition& proposition) {
  return evaluate_truth(predictions.at(proposition.image_id, proposition.id), proposition);
}

std::vector<std::uint8_t> inconsistency_flags(const ImplicationGraph& graph,
                                              const PropositionIndex& props,
                                              const PredictionSet& predictions) {
  const auto& arrows = graph.arrows();
  const auto n = static_cast<std::ptrdiff_t>(arrows.size());
  std::vector<std::uint8_t> status(arrows.size(), 0);

  // Lookups are read-only; unknown propositions are caught below.
  bool dangling = false;
#pragma omp parallel for schedule(static) reduction(|| : dangling)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& a = arrows[static_cast<std::size_t>(i)];
    if (!props.contains(a.image_id, a.sufficient) || !props.contains(a.image_id, a.necessary)) {
      dangling = true;
      continue;
    }
    status[static_cast<std::size_t>(i)] = arrow_status(a, props, predictions);
  }

  for (std::size_t i = 0; i < arrows.size(); ++i) {
    const auto& a = arrows[i];
    if (dangling) {
      proposition_at(props, a.image_id, a.sufficient);
      proposition_at(props, a.image_id, a.necessary);
    }
    if (status[i] == kMissingSufficient) {
      throw MissingPredictionError("no prediction for " + describe(a.image_id, a.sufficient));
    }
    if (status[i] == kMissingNecessary) {
      throw MissingPredictionError("no prediction for " + describe(a.image_id, a.necessary));
    }
  }
  return status;
}

std::size_t count_inconsistencies(const ImplicationGraph& graph, const PropositionIndex& props,
                                  const PredictionSet& predictions) {
  auto flags = inconsistency_flags(graph, props, predictions);
  std::size_t total = 0;
  for (auto f : flags) total += f;
  return total;
}

double consistency_ratio(const ImplicationGraph& graph, const PropositionIndex& props,
                         const PredictionSet& predictions) {
  if (graph.empty()) throw EmptyGraphError("consistency is undefined on an empty graph");
  auto bad = count_inconsistencies(graph, props, predictions);
  return 1.0 - static_cast<double>(bad) / static_cast<double>(graph.size());
}

double accuracy(const PredictionSet& predictions, const PropositionIndex& props) {
  if (props.size() == 0) throw ValidationError("accuracy over an empty proposition set");
  std::size_t correct = 0;
  for (const auto& p : props.propositions()) correct += evaluate_truth(predictions, p) ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(props.size());
}

ConsistencyReport make_report(const ImplicationGraph& graph, const PropositionIndex& props,
                              const PredictionSet& predictions) {
  if (graph.empty()) throw EmptyGraphError("consistency is undefined on an empty graph");
  auto flags = inconsistency_flags(graph, props, predictions);
  ConsistencyReport r;
  r.total_arrows = graph.size();
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i] == 0) continue;
    const auto& a = graph.arrows()[i];
    r.inconsistent_pairs.push_back({a.sufficient, a.necessary, a.image_id});
  }
  r.inconsistencies = r.inconsistent_pairs.size();
  r.consistency = 1.0 - static_cast<double>(r.inconsistencies) / static_cast<double>(r.total_arrows);
  r.accuracy = accuracy(predictions, props);
  return r;
}

std::string_view to_string(FlipStrategy strategy) noexcept {
  switch (strategy) {
    case FlipStrategy::Random:
      return "random";
    case FlipStrategy::First:
      return "first";
    case FlipStrategy::Second:
      return "second";
  }
  return "random";
}

FlipStrategy parse_flip_strategy(std::string_view text) {
  if (text == "random") return FlipStrategy::Random;
  if (text == "first") return FlipStrategy::First;
  if (text == "second") return FlipStrategy::Second;
  throw ValidationError("unknown flip strategy '" + std::string(text) + "'");
}

PredictionSet flip_correction(const ImplicationGraph& graph, const PropositionIndex& props,
                              const PredictionSet& predictions, FlipStrategy strategy,
                              std::uint64_t seed) {
  auto flags = inconsistency_flags(graph, props, predictions);

  std::set<PropKey> targets;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i] == 0) continue;
    const auto& a = graph.arrows()[i];
    bool first = strategy == FlipStrategy::First;
    if (strategy == FlipStrategy::Random) {
      first = (detail::keyed_hash(seed, a.image_id, a.sufficient, a.necessary) & 1U) == 0;
    }
    targets.insert({a.image_id, first ? a.sufficient : a.necessary});
  }

  PredictionSet out = predictions;
  for (const auto& [image_id, prop_id] : targets) {
    const auto& old = predictions.at(image_id, prop_id);
    auto answer = normalize_answer(old.predicted_answer);
    if (answer != "yes" && answer != "no") {
      throw NonBinaryAnswerError("cannot flip non-binary answer '" + old.predicted_answer +
                                 "' of " + describe(image_id, prop_id));
    }
    out.set(image_id, prop_id, {answer == "yes" ? "no" : "yes", 1.0 - old.probability});
  }
  return out;
}

}  // namespace implcons
