#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "implcons/relations.hpp"

namespace implcons {

/// A committed model answer for one proposition's question, with the
/// probability the model assigned to that answer.
struct Prediction {
  std::string predicted_answer;
  double probability = 1.0;

  bool operator==(const Prediction&) const = default;
};

/// Model answers keyed by (image_id, proposition id).
class PredictionSet {
 public:
  using Map = std::map<PropKey, Prediction>;

  /// Throws ValidationError when probability is outside [0, 1] or the
  /// answer is empty. Replaces an existing entry for the same key.
  void set(const std::string& image_id, const std::string& prop_id, Prediction prediction);

  const Prediction* find(const std::string& image_id, const std::string& prop_id) const;
  /// Throws MissingPredictionError naming the key.
  const Prediction& at(const std::string& image_id, const std::string& prop_id) const;

  std::size_t size() const noexcept { return entries_.size(); }
  const Map& entries() const noexcept { return entries_; }

  /// Throws DanglingReferenceError for a key with no proposition in `index`.
  void check_references(const PropositionIndex& index) const;

  bool operator==(const PredictionSet&) const = default;

 private:
  Map entries_;
};

/// Case-fold and trim surrounding whitespace.
std::string normalize_answer(std::string_view answer);

/// e_p: true iff the predicted answer equals the proposition's answer after
/// normalization.
bool evaluate_truth(const Prediction& prediction, const Proposition& proposition);
/// Looks the prediction up; throws MissingPredictionError when absent.
bool evaluate_truth(const PredictionSet& predictions, const Proposition& proposition);

/// I_p: arrows whose sufficient end is evaluated true and whose necessary
/// end is evaluated false. Parallel over arrows.
std::size_t count_inconsistencies(const ImplicationGraph& graph, const PropositionIndex& props,
                                  const PredictionSet& predictions);

/// Per-arrow inconsistency flags, in graph().arrows() order.
std::vector<std::uint8_t> inconsistency_flags(const ImplicationGraph& graph,
                                              const PropositionIndex& props,
                                              const PredictionSet& predictions);

/// c_p = 1 - I_p / |G(T)|. Throws EmptyGraphError on an empty graph.
double consistency_ratio(const ImplicationGraph& graph, const PropositionIndex& props,
                         const PredictionSet& predictions);

/// Fraction of `props` evaluated true. Throws ValidationError on an empty
/// proposition set and MissingPredictionError for an unanswered one.
double accuracy(const PredictionSet& predictions, const PropositionIndex& props);

struct InconsistentPair {
  std::string sufficient;
  std::string necessary;
  std::string image_id;

  bool operator==(const InconsistentPair&) const = default;
};

struct ConsistencyReport {
  std::size_t total_arrows = 0;
  std::size_t inconsistencies = 0;
  double consistency = 1.0;
  double accuracy = 0.0;
  std::vector<InconsistentPair> inconsistent_pairs;
};

ConsistencyReport make_report(const ImplicationGraph& graph, const PropositionIndex& props,
                              const PredictionSet& predictions);

enum class FlipStrategy { Random, First, Second };

std::string_view to_string(FlipStrategy strategy) noexcept;
/// "random", "first" or "second"; throws ValidationError otherwise.
FlipStrategy parse_flip_strategy(std::string_view text);

/// Post-hoc correction of inconsistent pairs.
///
/// The flip set is computed once against the input predictions: for every
/// inconsistent arrow, "first" targets the sufficient proposition, "second"
/// the necessary one, and "random" picks one of the two with a draw keyed by
/// (seed, arrow). Each target is then negated once (yes <-> no), even if it
/// takes part in several inconsistent arrows. The flipped probability is
/// 1 - p.
PredictionSet flip_correction(const ImplicationGraph& graph, const PropositionIndex& props,
                              const PredictionSet& predictions, FlipStrategy strategy,
                              std::uint64_t seed);

}  // namespace implcons
