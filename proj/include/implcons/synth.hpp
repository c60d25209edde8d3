#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "implcons/relations.hpp"

namespace implcons::synth {

inline constexpr std::size_t kMaxAttributes = 20;

struct Literal {
  std::uint8_t index = 0;
  bool negated = false;

  bool operator==(const Literal&) const = default;
};

enum class Connective : std::uint8_t { Literal, And, Or };

/// Restricted grammar: a single (possibly negated) literal, or a
/// conjunction/disjunction of two literals over distinct attributes.
struct Formula {
  Connective op = Connective::Literal;
  Literal lhs;
  Literal rhs;  // ignored for Connective::Literal

  static Formula literal(std::uint8_t index, bool negated = false) {
    return {Connective::Literal, {index, negated}, {}};
  }
  static Formula conj(Literal a, Literal b) { return {Connective::And, a, b}; }
  static Formula disj(Literal a, Literal b) { return {Connective::Or, a, b}; }

  std::size_t arity() const noexcept { return op == Connective::Literal ? 1 : 2; }
  std::uint8_t max_index() const noexcept;

  bool operator==(const Formula&) const = default;
};

/// Evaluates on a packed assignment: bit i holds attribute i.
bool eval_bits(const Formula& f, std::uint32_t assignment) noexcept;

/// "Is a3 on?", "Is a3 on and a5 off?", "Is a3 off or a5 on?"
std::string render_question(const Formula& f);
/// Inverse of render_question (case-insensitive). Throws ParseError.
Formula parse_question(std::string_view text);

struct World {
  std::string id;
  std::vector<std::uint8_t> attributes;  // 0/1

  std::uint32_t packed() const noexcept;
  bool operator==(const World&) const = default;
};

/// Standard boolean evaluation of `f` on the world's attributes.
bool truth_eval(const Formula& f, const World& world);

struct Query {
  std::string id;
  Formula formula;
  std::string surface_text;

  bool operator==(const Query&) const = default;
};

/// A (formula, answer) proposition: with answer "yes" it states the formula,
/// with "no" its negation.
struct FormulaProposition {
  Formula formula;
  bool answer_yes = true;
};

/// Decides the relation between two propositions by enumerating all
/// 2^n_attr assignments. Throws ValidationError if n_attr > 20 or a formula
/// references an index >= n_attr.
RelationKind oracle_relation(const FormulaProposition& a, const FormulaProposition& b,
                             std::size_t n_attr);

struct OraclePair {
  FormulaProposition a;
  FormulaProposition b;
};

/// oracle_relation over many pairs; pairs are evaluated in parallel.
std::vector<RelationKind> oracle_relations(std::span<const OraclePair> pairs, std::size_t n_attr);

struct QueryItem {
  Query query;
  bool gold_yes = false;

  bool operator==(const QueryItem&) const = default;
};

/// Relation kind frequencies, indexed by RelationKind.
struct KindCounts {
  std::array<std::size_t, 4> counts{};

  std::size_t total() const noexcept;
  std::size_t operator[](RelationKind k) const noexcept {
    return counts[static_cast<std::size_t>(k)];
  }
  double fraction(RelationKind k) const noexcept;
};

struct SyntheticDataset {
  std::size_t n_attr = 0;
  std::vector<World> worlds;
  std::vector<std::vector<QueryItem>> queries;  // parallel to worlds
  std::vector<RelationRecord> relations;

  std::vector<Proposition> propositions() const;
  /// Propositions of the listed worlds only.
  std::vector<Proposition> propositions(std::span<const std::size_t> world_indices) const;
  KindCounts kind_counts() const;
  std::size_t world_index(const std::string& world_id) const;
  std::size_t query_index(std::size_t world, const std::string& query_id) const;

  /// Checks every invariant: shared n_attr, index range, gold answers match
  /// the formulas, relations match the oracle. Throws ValidationError.
  void validate() const;

  bool operator==(const SyntheticDataset&) const = default;
};

/// Target relation mix used when distribution matching is on:
/// NecessaryFor 60%, Equivalent 17%, Unrelated 12%, SufficientFor 11%.
inline constexpr std::array<double, 4> kAnnotatedKindMix = {0.11, 0.60, 0.17, 0.12};

struct GenerateOptions {
  std::uint64_t seed = 1;
  std::size_t n_worlds = 50;
  std::size_t n_attr = 12;
  std::size_t queries_per_world = 8;
  /// Steer relation kinds toward kAnnotatedKindMix.
  bool match_distribution = false;
  /// Rejection-sampling rounds per pair slot.
  std::size_t max_rounds = 1000;
};

/// Builds a dataset deterministically from `options.seed`.
///
/// Queries are drawn in pairs (slots); the second query of a slot reuses
/// attributes of the first so that related pairs arise naturally. One
/// relation record is stored per slot, labelled by the oracle. The first
/// slot of each world is always related. Throws ValidationError on bad
/// sizes and InfeasibleError when a slot exhausts its rounds.
SyntheticDataset generate(const GenerateOptions& options);

/// Rebuilds a dataset from its file representation (formulas are recovered
/// from the question text) and validates it.
SyntheticDataset assemble(std::vector<World> worlds, std::span<const Proposition> propositions,
                          std::vector<RelationRecord> relations);

}  // namespace implcons::synth
