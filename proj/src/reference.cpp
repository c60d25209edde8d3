#include "implcons/reference.hpp"

#include "implcons/errors.hpp"

namespace implcons::reference {

std::size_t count_inconsistencies(const ImplicationGraph& graph, const PropositionIndex& props,
                                  const PredictionSet& predictions) {
  std::size_t total = 0;
  for (const auto& a : graph.arrows()) {
    const auto* suff = props.find(a.image_id, a.sufficient);
    const auto* nec = props.find(a.image_id, a.necessary);
    if (suff == nullptr || nec == nullptr) {
      throw DanglingReferenceError("arrow cites an unknown proposition in image '" + a.image_id +
                                   "'");
    }
    bool s = evaluate_truth(predictions, *suff);
    bool n = evaluate_truth(predictions, *nec);
    if (s && !n) ++total;
  }
  return total;
}

std::vector<RelationKind> oracle_relations(std::span<const synth::OraclePair> pairs,
                                           std::size_t n_attr) {
  std::vector<RelationKind> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(synth::oracle_relation(p.a, p.b, n_attr));
  return out;
}

trainer::SweepResult lambda_sweep(const synth::SyntheticDataset& dataset,
                                  std::span<const double> lambdas,
                                  std::span<const std::uint64_t> seeds,
                                  const trainer::TrainConfig& base) {
  if (lambdas.size() < 2) throw ValidationError("a sweep needs at least two lambda values");
  if (seeds.size() < 3) throw ValidationError("a sweep needs at least three seeds per lambda");
  trainer::SweepResult result;
  for (double lambda : lambdas) {
    for (auto seed : seeds) {
      auto cfg = base;
      cfg.lambda = lambda;
      cfg.seed = seed;
      auto r = trainer::train(dataset, cfg);
      result.runs.push_back({lambda, seed, r.history.final_report.accuracy,
                             r.history.final_report.consistency});
    }
  }
  result.summary = trainer::summarize(result.runs);
  return result;
}

}  // namespace implcons::reference
