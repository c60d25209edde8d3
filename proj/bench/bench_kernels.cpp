// Serial reference vs OpenMP kernels.
#include <benchmark/benchmark.h>

#include <random>

#include "implcons/reference.hpp"

using namespace implcons;

namespace {

struct Scored {
  PropositionIndex index;
  ImplicationGraph graph;
  PredictionSet preds;
};

const Scored& scored() {
  static const Scored s = [] {
    std::mt19937_64 rng(3);
    std::vector<Proposition> props;
    std::vector<RelationRecord> records;
    PredictionSet preds;
    for (int im = 0; im < 2000; ++im) {
      auto img = "img" + std::to_string(im);
      for (int k = 0; k < 40; ++k) {
        auto id = "p" + std::to_string(k);
        props.push_back({id, img, "Is it?", "yes"});
        preds.set(img, id, {rng() % 2 ? "yes" : "no", 0.6});
      }
      for (int k = 0; k < 20; ++k) {
        auto a = rng() % 40, b = rng() % 40;
        if (a != b) {
          records.push_back({img, "p" + std::to_string(a), "p" + std::to_string(b),
                             RelationKind::SufficientFor});
        }
      }
    }
    PropositionIndex index(props);
    auto graph = build_graph(records, index);
    return Scored{std::move(index), std::move(graph), std::move(preds)};
  }();
  return s;
}

const synth::SyntheticDataset& dataset() {
  static const auto ds = synth::generate(synth::GenerateOptions{});
  return ds;
}

const std::vector<synth::OraclePair>& oracle_pairs() {
  static const auto pairs = [] {
    synth::GenerateOptions opt;
    opt.n_worlds = 200;
    auto ds = synth::generate(opt);
    std::vector<synth::OraclePair> out;
    for (const auto& qs : ds.queries) {
      for (std::size_t i = 0; i + 1 < qs.size(); ++i) {
        out.push_back({{qs[i].query.formula, qs[i].gold_yes}, {qs[i + 1].query.formula, qs[i + 1].gold_yes}});
      }
    }
    return out;
  }();
  return pairs;
}

void BM_CountInconsistencies_Serial(benchmark::State& st) {
  const auto& s = scored();
  for (auto _ : st) benchmark::DoNotOptimize(reference::count_inconsistencies(s.graph, s.index, s.preds));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(s.graph.size()));
}

void BM_CountInconsistencies_Parallel(benchmark::State& st) {
  const auto& s = scored();
  for (auto _ : st) benchmark::DoNotOptimize(count_inconsistencies(s.graph, s.index, s.preds));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(s.graph.size()));
}

void BM_OracleRelations_Serial(benchmark::State& st) {
  const auto& p = oracle_pairs();
  for (auto _ : st) benchmark::DoNotOptimize(reference::oracle_relations(p, 12));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(p.size()));
}

void BM_OracleRelations_Parallel(benchmark::State& st) {
  const auto& p = oracle_pairs();
  for (auto _ : st) benchmark::DoNotOptimize(synth::oracle_relations(p, 12));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(p.size()));
}

const std::vector<double> kLambdas{0.0, 0.1, 0.5, 1.0};
const std::vector<std::uint64_t> kSeeds{1, 2, 3};

void BM_LambdaSweep_Serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(reference::lambda_sweep(dataset(), kLambdas, kSeeds, {}));
}

void BM_LambdaSweep_Parallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(trainer::lambda_sweep(dataset(), kLambdas, kSeeds, {}));
}

}  // namespace

BENCHMARK(BM_CountInconsistencies_Serial);
BENCHMARK(BM_CountInconsistencies_Parallel);
BENCHMARK(BM_OracleRelations_Serial);
BENCHMARK(BM_OracleRelations_Parallel);
BENCHMARK(BM_LambdaSweep_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LambdaSweep_Parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
