#include "implcons/relations.hpp"

#include <algorithm>
#include <set>

#include "implcons/errors.hpp"

namespace implcons {

RelationKind invert(RelationKind kind) noexcept {
  switch (kind) {
    case RelationKind::SufficientFor:
      return RelationKind::NecessaryFor;
    case RelationKind::NecessaryFor:
      return RelationKind::SufficientFor;
    default:
      return kind;
  }
}

std::string_view to_string(RelationKind kind) noexcept {
  switch (kind) {
    case RelationKind::SufficientFor:
      return "forward";
    case RelationKind::NecessaryFor:
      return "backward";
    case RelationKind::Equivalent:
      return "equivalent";
    case RelationKind::Unrelated:
      return "unrelated";
  }
  return "unrelated";
}

RelationKind parse_relation_kind(std::string_view text) {
  if (text == "forward") return RelationKind::SufficientFor;
  if (text == "backward") return RelationKind::NecessaryFor;
  if (text == "equivalent") return RelationKind::Equivalent;
  if (text == "unrelated") return RelationKind::Unrelated;
  throw ParseError("unknown relation kind '" + std::string(text) + "'");
}

void validate(const RelationRecord& record) {
  if (record.image_id.empty() || record.prop_i.empty() || record.prop_j.empty()) {
    throw ValidationError("relation record has an empty identifier");
  }
  if (record.prop_i == record.prop_j) {
    throw ValidationError("self-relation on proposition '" + record.prop_i + "' in image '" +
                          record.image_id + "'");
  }
}

std::vector<ImplicationArrow> normalize(const RelationRecord& r) {
  switch (r.kind) {
    case RelationKind::SufficientFor:
      return {{r.image_id, r.prop_i, r.prop_j}};
    case RelationKind::NecessaryFor:
      return {{r.image_id, r.prop_j, r.prop_i}};
    case RelationKind::Equivalent:
      return {{r.image_id, r.prop_i, r.prop_j}, {r.image_id, r.prop_j, r.prop_i}};
    case RelationKind::Unrelated:
      break;
  }
  return {};
}

PropositionIndex::PropositionIndex(std::span<const Proposition> propositions)
    : items_(propositions.begin(), propositions.end()) {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const auto& p = items_[i];
    if (p.id.empty() || p.image_id.empty()) {
      throw ValidationError("proposition with empty id or image_id");
    }
    if (p.question.empty() || p.answer.empty()) {
      throw ValidationError("proposition '" + p.id + "' has empty question or answer");
    }
    if (!by_key_.emplace(key_of(p), i).second) {
      throw ValidationError("duplicate proposition '" + p.id + "' in image '" + p.image_id + "'");
    }
  }
}

const Proposition* PropositionIndex::find(const std::string& image_id,
                                          const std::string& id) const {
  auto it = by_key_.find(PropKey{image_id, id});
  return it == by_key_.end() ? nullptr : &items_[it->second];
}

ImplicationGraph ImplicationGraph::from_arrows(std::vector<ImplicationArrow> arrows) {
  std::sort(arrows.begin(), arrows.end());
  arrows.erase(std::unique(arrows.begin(), arrows.end()), arrows.end());
  ImplicationGraph g;
  g.arrows_ = std::move(arrows);
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= g.arrows_.size(); ++i) {
    if (i == g.arrows_.size() || g.arrows_[i].image_id != g.arrows_[begin].image_id) {
      g.ranges_.emplace(g.arrows_[begin].image_id, std::pair{begin, i});
      begin = i;
    }
  }
  return g;
}

std::vector<std::string> ImplicationGraph::image_ids() const {
  std::vector<std::string> ids;
  ids.reserve(ranges_.size());
  for (const auto& [id, range] : ranges_) ids.push_back(id);
  return ids;
}

std::span<const ImplicationArrow> ImplicationGraph::arrows_for(const std::string& image_id) const {
  auto it = ranges_.find(image_id);
  if (it == ranges_.end()) return {};
  auto [b, e] = it->second;
  return std::span<const ImplicationArrow>(arrows_).subspan(b, e - b);
}

bool ImplicationGraph::contains(const ImplicationArrow& arrow) const {
  return std::binary_search(arrows_.begin(), arrows_.end(), arrow);
}

namespace {

struct PairKey {
  std::string image_id, a, b;
  auto operator<=>(const PairKey&) const = default;
};

ImplicationGraph build_impl(std::span<const RelationRecord> records,
                            const PropositionIndex* index) {
  std::map<PairKey, RelationKind> ordered;  // as written
  std::map<PairKey, std::pair<bool, bool>> unordered;  // (has unrelated, has arrow)
  std::vector<ImplicationArrow> arrows;

  for (const auto& r : records) {
    validate(r);
    if (index != nullptr) {
      for (const auto* id : {&r.prop_i, &r.prop_j}) {
        if (index->contains(r.image_id, *id)) continue;
        // Distinguish an unknown id from one that lives in another image.
        bool elsewhere = std::any_of(index->propositions().begin(), index->propositions().end(),
                                     [&](const Proposition& p) { return p.id == *id; });
        if (elsewhere) {
          throw ValidationError("relation in image '" + r.image_id + "' cites proposition '" + *id +
                                "' of another image");
        }
        throw DanglingReferenceError("relation cites unknown proposition '" + *id +
                                     "' in image '" + r.image_id + "'");
      }
    }

    auto [it, inserted] = ordered.emplace(PairKey{r.image_id, r.prop_i, r.prop_j}, r.kind);
    if (!inserted && it->second != r.kind) {
      throw ConflictError("pair (" + r.prop_i + ", " + r.prop_j + ") in image '" + r.image_id +
                          "' annotated as both " + std::string(to_string(it->second)) + " and " +
                          std::string(to_string(r.kind)));
    }

    PairKey canon = r.prop_i < r.prop_j ? PairKey{r.image_id, r.prop_i, r.prop_j}
                                        : PairKey{r.image_id, r.prop_j, r.prop_i};
    auto& flags = unordered[canon];
    (r.kind == RelationKind::Unrelated ? flags.first : flags.second) = true;
    if (flags.first && flags.second) {
      throw ConflictError("pair (" + canon.a + ", " + canon.b + ") in image '" + r.image_id +
                          "' annotated both as related and as unrelated");
    }

    for (auto& a : normalize(r)) arrows.push_back(std::move(a));
  }
  return ImplicationGraph::from_arrows(std::move(arrows));
}

}  // namespace

ImplicationGraph build_graph(std::span<const RelationRecord> records,
                             const PropositionIndex& propositions) {
  return build_impl(records, &propositions);
}

ImplicationGraph build_graph(std::span<const RelationRecord> records) {
  return build_impl(records, nullptr);
}

std::vector<RelationRecord> to_records(const ImplicationGraph& graph) {
  std::vector<RelationRecord> out;
  out.reserve(graph.size());
  for (const auto& a : graph.arrows()) {
    out.push_back({a.image_id, a.sufficient, a.necessary, RelationKind::SufficientFor});
  }
  return out;
}

}  // namespace implcons
