#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace implcons {

/// A question-answer pair about one image, treated as a statement that is
/// either true or false for that image.
struct Proposition {
  std::string id;
  std::string image_id;
  std::string question;
  std::string answer;

  bool operator==(const Proposition&) const = default;
};

/// Key of a proposition inside a dataset: (image_id, id).
using PropKey = std::pair<std::string, std::string>;

inline PropKey key_of(const Proposition& p) { return {p.image_id, p.id}; }

/// How prop_i relates to prop_j.
///   SufficientFor: i -> j
///   NecessaryFor:  i <- j
///   Equivalent:    i <-> j
///   Unrelated:     i - j
enum class RelationKind { SufficientFor, NecessaryFor, Equivalent, Unrelated };

/// Swaps SufficientFor and NecessaryFor; the other kinds are fixed points.
RelationKind invert(RelationKind kind) noexcept;

/// File spelling: "forward", "backward", "equivalent", "unrelated".
std::string_view to_string(RelationKind kind) noexcept;
/// Throws ParseError on an unknown spelling.
RelationKind parse_relation_kind(std::string_view text);

struct RelationRecord {
  std::string image_id;
  std::string prop_i;
  std::string prop_j;
  RelationKind kind = RelationKind::Unrelated;

  bool operator==(const RelationRecord&) const = default;
};

/// Throws ValidationError for a self-relation or empty identifiers.
void validate(const RelationRecord& record);

/// Directed edge sufficient -> necessary within one image.
struct ImplicationArrow {
  std::string image_id;
  std::string sufficient;
  std::string necessary;

  auto operator<=>(const ImplicationArrow&) const = default;
};

/// Expands a relation record into its directed arrows. An equivalence
/// becomes two independent arrows.
std::vector<ImplicationArrow> normalize(const RelationRecord& record);

/// Propositions indexed by (image_id, id). Rejects duplicate keys and
/// empty question/answer text.
class PropositionIndex {
 public:
  PropositionIndex() = default;
  explicit PropositionIndex(std::span<const Proposition> propositions);

  const Proposition* find(const std::string& image_id, const std::string& id) const;
  bool contains(const std::string& image_id, const std::string& id) const {
    return find(image_id, id) != nullptr;
  }
  std::size_t size() const noexcept { return by_key_.size(); }
  const std::vector<Proposition>& propositions() const noexcept { return items_; }

 private:
  std::vector<Proposition> items_;
  std::map<PropKey, std::size_t> by_key_;
};

/// The set G(T): deduplicated implication arrows grouped per image.
/// Immutable once built.
class ImplicationGraph {
 public:
  ImplicationGraph() = default;

  /// Sorts and deduplicates `arrows`. No validation.
  static ImplicationGraph from_arrows(std::vector<ImplicationArrow> arrows);

  /// Arrows of all images, ordered by (image_id, sufficient, necessary).
  const std::vector<ImplicationArrow>& arrows() const noexcept { return arrows_; }
  std::size_t size() const noexcept { return arrows_.size(); }
  bool empty() const noexcept { return arrows_.empty(); }

  std::vector<std::string> image_ids() const;
  /// Arrows of one image; empty when the image has none.
  std::span<const ImplicationArrow> arrows_for(const std::string& image_id) const;

  bool contains(const ImplicationArrow& arrow) const;

 private:
  std::vector<ImplicationArrow> arrows_;
  // image_id -> [begin, end) into arrows_
  std::map<std::string, std::pair<std::size_t, std::size_t>> ranges_;
};

/// Builds the graph from annotated relations.
///
/// Arrows asserted by several records are merged, so (A,B,SufficientFor)
/// and (B,A,NecessaryFor) yield the single arrow A->B. ConflictError is
/// raised when one ordered pair is annotated with two different kinds, or
/// when a pair is annotated Unrelated in one record and related in another.
/// Every endpoint must exist in `propositions` (DanglingReferenceError) and
/// belong to the record's image (ValidationError).
ImplicationGraph build_graph(std::span<const RelationRecord> records,
                             const PropositionIndex& propositions);

/// Same as above without the reference check.
ImplicationGraph build_graph(std::span<const RelationRecord> records);

/// Records that re-create `graph` when fed back to build_graph: one
/// SufficientFor record per arrow.
std::vector<RelationRecord> to_records(const ImplicationGraph& graph);

}  // namespace implcons
