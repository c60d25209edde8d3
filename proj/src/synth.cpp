#include "implcons/synth.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <regex>
#include <set>

#include "implcons/errors.hpp"

namespace implcons::synth {

namespace {

bool eval_literal(Literal l, std::uint32_t assignment) noexcept {
  bool bit = ((assignment >> l.index) & 1U) != 0;
  return bit != l.negated;
}

std::string render_literal(Literal l) {
  return "a" + std::to_string(l.index) + (l.negated ? " off" : " on");
}

void check_formula(const Formula& f, std::size_t n_attr) {
  if (f.max_index() >= n_attr) {
    throw ValidationError("formula references attribute " + std::to_string(f.max_index()) +
                          " but n_attr is " + std::to_string(n_attr));
  }
  if (f.op != Connective::Literal && f.lhs.index == f.rhs.index) {
    throw ValidationError("binary formula over a single attribute");
  }
}

}  // namespace

std::uint8_t Formula::max_index() const noexcept {
  return op == Connective::Literal ? lhs.index : std::max(lhs.index, rhs.index);
}

bool eval_bits(const Formula& f, std::uint32_t assignment) noexcept {
  switch (f.op) {
    case Connective::Literal:
      return eval_literal(f.lhs, assignment);
    case Connective::And:
      return eval_literal(f.lhs, assignment) && eval_literal(f.rhs, assignment);
    case Connective::Or:
      return eval_literal(f.lhs, assignment) || eval_literal(f.rhs, assignment);
  }
  return false;
}

std::string render_question(const Formula& f) {
  switch (f.op) {
    case Connective::Literal:
      return "Is " + render_literal(f.lhs) + "?";
    case Connective::And:
      return "Is " + render_literal(f.lhs) + " and " + render_literal(f.rhs) + "?";
    case Connective::Or:
      return "Is " + render_literal(f.lhs) + " or " + render_literal(f.rhs) + "?";
  }
  return {};
}

Formula parse_question(std::string_view text) {
  static const std::regex pattern(
      R"(^\s*is\s+a(\d+)\s+(on|off)(?:\s+(and|or)\s+a(\d+)\s+(on|off))?\s*\?\s*$)",
      std::regex::icase | std::regex::ECMAScript);
  std::cmatch m;
  if (!std::regex_match(text.data(), text.data() + text.size(), m, pattern)) {
    throw ParseError("not a synthetic question: '" + std::string(text) + "'");
  }
  auto literal = [&](int idx_group, int sign_group) {
    auto index = std::stoul(m[idx_group].str());
    if (index >= kMaxAttributes) throw ParseError("attribute index out of range in question");
    auto sign = m[sign_group].str();
    std::transform(sign.begin(), sign.end(), sign.begin(), ::tolower);
    return Literal{static_cast<std::uint8_t>(index), sign == "off"};
  };
  Formula f = Formula::literal(0);
  f.lhs = literal(1, 2);
  if (m[3].matched) {
    auto conn = m[3].str();
    std::transform(conn.begin(), conn.end(), conn.begin(), ::tolower);
    f.op = conn == "and" ? Connective::And : Connective::Or;
    f.rhs = literal(4, 5);
  }
  return f;
}

std::uint32_t World::packed() const noexcept {
  std::uint32_t bits = 0;
  for (std::size_t i = 0; i < attributes.size() && i < 32; ++i) {
    if (attributes[i] != 0) bits |= (1U << i);
  }
  return bits;
}

bool truth_eval(const Formula& f, const World& world) {
  check_formula(f, world.attributes.size());
  return eval_bits(f, world.packed());
}

RelationKind oracle_relation(const FormulaProposition& a, const FormulaProposition& b,
                             std::size_t n_attr) {
  if (n_attr > kMaxAttributes) throw ValidationError("oracle requires n_attr <= 20");
  check_formula(a.formula, n_attr);
  check_formula(b.formula, n_attr);
  bool a_implies_b = true;
  bool b_implies_a = true;
  const std::uint32_t count = 1U << n_attr;
  for (std::uint32_t x = 0; x < count && (a_implies_b || b_implies_a); ++x) {
    bool ta = eval_bits(a.formula, x) == a.answer_yes;
    bool tb = eval_bits(b.formula, x) == b.answer_yes;
    if (ta && !tb) a_implies_b = false;
    if (tb && !ta) b_implies_a = false;
  }
  if (a_implies_b && b_implies_a) return RelationKind::Equivalent;
  if (a_implies_b) return RelationKind::SufficientFor;
  if (b_implies_a) return RelationKind::NecessaryFor;
  return RelationKind::Unrelated;
}

std::vector<RelationKind> oracle_relations(std::span<const OraclePair> pairs, std::size_t n_attr) {
  std::vector<RelationKind> out(pairs.size(), RelationKind::Unrelated);
  const auto n = static_cast<std::ptrdiff_t>(pairs.size());
  // Validate serially so the first bad pair is the one reported.
  for (const auto& p : pairs) {
    if (n_attr > kMaxAttributes) throw ValidationError("oracle requires n_attr <= 20");
    check_formula(p.a.formula, n_attr);
    check_formula(p.b.formula, n_attr);
  }
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& p = pairs[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = oracle_relation(p.a, p.b, n_attr);
  }
  return out;
}

std::size_t KindCounts::total() const noexcept {
  std::size_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

double KindCounts::fraction(RelationKind k) const noexcept {
  auto t = total();
  return t == 0 ? 0.0 : static_cast<double>((*this)[k]) / static_cast<double>(t);
}

std::vector<Proposition> SyntheticDataset::propositions() const {
  std::vector<std::size_t> all(worlds.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return propositions(all);
}

std::vector<Proposition> SyntheticDataset::propositions(
    std::span<const std::size_t> world_indices) const {
  std::vector<Proposition> out;
  for (auto w : world_indices) {
    for (const auto& item : queries.at(w)) {
      out.push_back({item.query.id, worlds[w].id, item.query.surface_text,
                     item.gold_yes ? "yes" : "no"});
    }
  }
  return out;
}

KindCounts SyntheticDataset::kind_counts() const {
  KindCounts k;
  for (const auto& r : relations) ++k.counts[static_cast<std::size_t>(r.kind)];
  return k;
}

std::size_t SyntheticDataset::world_index(const std::string& world_id) const {
  for (std::size_t i = 0; i < worlds.size(); ++i) {
    if (worlds[i].id == world_id) return i;
  }
  throw DanglingReferenceError("unknown world '" + world_id + "'");
}

std::size_t SyntheticDataset::query_index(std::size_t world, const std::string& query_id) const {
  const auto& qs = queries.at(world);
  for (std::size_t i = 0; i < qs.size(); ++i) {
    if (qs[i].query.id == query_id) return i;
  }
  throw DanglingReferenceError("unknown query '" + query_id + "' in world '" + worlds[world].id +
                               "'");
}

void SyntheticDataset::validate() const {
  if (n_attr == 0 || n_attr > kMaxAttributes) throw ValidationError("n_attr must be in [1, 20]");
  if (queries.size() != worlds.size()) throw ValidationError("queries and worlds differ in size");
  std::set<std::string> world_ids;
  for (std::size_t w = 0; w < worlds.size(); ++w) {
    if (worlds[w].attributes.size() != n_attr) {
      throw ValidationError("world '" + worlds[w].id + "' has the wrong attribute count");
    }
    if (!world_ids.insert(worlds[w].id).second) {
      throw ValidationError("duplicate world '" + worlds[w].id + "'");
    }
    for (const auto& item : queries[w]) {
      if (truth_eval(item.query.formula, worlds[w]) != item.gold_yes) {
        throw ValidationError("gold answer of '" + item.query.id + "' in world '" +
                              worlds[w].id + "' disagrees with its formula");
      }
    }
  }
  // Reference and duplicate checks.
  auto props = propositions();
  PropositionIndex index(props);
  build_graph(relations, index);
  for (const auto& r : relations) {
    auto w = world_index(r.image_id);
    const auto& qi = queries[w][query_index(w, r.prop_i)];
    const auto& qj = queries[w][query_index(w, r.prop_j)];
    auto kind = oracle_relation({qi.query.formula, qi.gold_yes}, {qj.query.formula, qj.gold_yes},
                                n_attr);
    if (kind != r.kind) {
      throw ValidationError("relation (" + r.prop_i + ", " + r.prop_j + ") in world '" +
                            r.image_id + "' is labelled " + std::string(to_string(r.kind)) +
                            " but the oracle says " + std::string(to_string(kind)));
    }
  }
}

namespace {

class Sampler {
 public:
  Sampler(std::uint64_t seed, std::size_t n_attr) : rng_(seed), n_attr_(n_attr) {}

  std::size_t uniform(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

  Formula random_formula() {
    auto op = static_cast<Connective>(uniform(3));
    auto i = static_cast<std::uint8_t>(uniform(n_attr_));
    if (op == Connective::Literal) return Formula::literal(i, coin());
    auto j = static_cast<std::uint8_t>(uniform(n_attr_ - 1));
    if (j >= i) ++j;
    return {op, {i, coin()}, {j, coin()}};
  }

  /// A formula that mostly reuses the attributes of `anchor`.
  Formula nearby_formula(const Formula& anchor) {
    std::vector<std::uint8_t> pool{anchor.lhs.index};
    if (anchor.op != Connective::Literal) pool.push_back(anchor.rhs.index);
    auto pick = [&](int avoid) {
      for (;;) {
        auto idx = coin(0.75) ? pool[uniform(pool.size())] : static_cast<std::uint8_t>(uniform(n_attr_));
        if (static_cast<int>(idx) != avoid) return idx;
      }
    };
    auto op = static_cast<Connective>(uniform(3));
    auto i = pick(-1);
    if (op == Connective::Literal) return Formula::literal(i, coin());
    auto j = pick(i);
    return {op, {i, coin()}, {j, coin()}};
  }

  RelationKind draw_kind() {
    std::discrete_distribution<std::size_t> d(kAnnotatedKindMix.begin(), kAnnotatedKindMix.end());
    return static_cast<RelationKind>(d(rng_));
  }

 private:
  std::mt19937_64 rng_;
  std::size_t n_attr_;
};

}  // namespace

SyntheticDataset generate(const GenerateOptions& opt) {
  if (opt.n_attr < 2 || opt.n_attr > kMaxAttributes) {
    throw ValidationError("n_attr must be in [2, 20]");
  }
  if (opt.queries_per_world < 2) throw ValidationError("queries_per_world must be >= 2");
  if (opt.n_worlds == 0) throw ValidationError("n_worlds must be positive");

  Sampler s(opt.seed, opt.n_attr);
  SyntheticDataset ds;
  ds.n_attr = opt.n_attr;

  for (std::size_t w = 0; w < opt.n_worlds; ++w) {
    World world{"w" + std::to_string(w), std::vector<std::uint8_t>(opt.n_attr)};
    for (auto& bit : world.attributes) bit = s.coin() ? 1 : 0;
    const auto packed = world.packed();

    std::vector<QueryItem> items;
    std::set<std::string> seen;
    auto make_item = [&](const Formula& f) {
      auto id = "q" + std::to_string(items.size());
      return QueryItem{{id, f, render_question(f)}, eval_bits(f, packed)};
    };

    const std::size_t slots = opt.queries_per_world / 2;
    for (std::size_t slot = 0; slot < slots; ++slot) {
      const bool want_target = opt.match_distribution;
      const RelationKind target = want_target ? s.draw_kind() : RelationKind::Unrelated;
      bool placed = false;
      for (std::size_t round = 0; round < opt.max_rounds && !placed; ++round) {
        Formula fa = s.random_formula();
        Formula fb = s.nearby_formula(fa);
        auto ta = render_question(fa);
        auto tb = render_question(fb);
        if (ta == tb || seen.count(ta) != 0 || seen.count(tb) != 0) continue;
        bool ya = eval_bits(fa, packed);
        bool yb = eval_bits(fb, packed);
        auto kind = oracle_relation({fa, ya}, {fb, yb}, opt.n_attr);
        if (want_target ? kind != target : (slot == 0 && kind == RelationKind::Unrelated)) continue;

        items.push_back(make_item(fa));
        items.push_back(make_item(fb));
        seen.insert(ta);
        seen.insert(tb);
        const auto& a = items[items.size() - 2].query.id;
        const auto& b = items.back().query.id;
        ds.relations.push_back({world.id, a, b, kind});
        placed = true;
      }
      if (!placed) {
        throw InfeasibleError("world '" + world.id + "' slot " + std::to_string(slot) +
                              ": no admissible pair within " + std::to_string(opt.max_rounds) +
                              " rounds");
      }
    }
    // Odd query count: one unpaired query.
    if (opt.queries_per_world % 2 == 1) {
      bool placed = false;
      for (std::size_t round = 0; round < opt.max_rounds && !placed; ++round) {
        Formula f = s.random_formula();
        auto text = render_question(f);
        if (seen.count(text) != 0) continue;
        seen.insert(text);
        items.push_back(make_item(f));
        placed = true;
      }
      if (!placed) throw InfeasibleError("world '" + world.id + "': no unused query left");
    }

    ds.worlds.push_back(std::move(world));
    ds.queries.push_back(std::move(items));
  }
  return ds;
}

SyntheticDataset assemble(std::vector<World> worlds, std::span<const Proposition> propositions,
                          std::vector<RelationRecord> relations) {
  SyntheticDataset ds;
  ds.n_attr = worlds.empty() ? 0 : worlds.front().attributes.size();
  ds.worlds = std::move(worlds);
  ds.queries.resize(ds.worlds.size());
  std::map<std::string, std::size_t> world_of;
  for (std::size_t i = 0; i < ds.worlds.size(); ++i) world_of.emplace(ds.worlds[i].id, i);

  for (const auto& p : propositions) {
    auto it = world_of.find(p.image_id);
    if (it == world_of.end()) {
      throw DanglingReferenceError("proposition '" + p.id + "' cites unknown world '" +
                                   p.image_id + "'");
    }
    auto answer = p.answer;
    std::transform(answer.begin(), answer.end(), answer.begin(), ::tolower);
    if (answer != "yes" && answer != "no") {
      throw ValidationError("proposition '" + p.id + "' has a non-binary answer");
    }
    Formula f = parse_question(p.question);
    ds.queries[it->second].push_back({{p.id, f, p.question}, answer == "yes"});
  }
  ds.relations = std::move(relations);
  ds.validate();
  return ds;
}

}  // namespace implcons::synth
