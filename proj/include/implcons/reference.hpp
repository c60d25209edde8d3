#pragma once

// Serial counterparts of the OpenMP kernels. They define the expected
// results: the parallel versions must agree with them exactly.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "implcons/metric.hpp"
#include "implcons/synth.hpp"
#include "implcons/trainer.hpp"

namespace implcons::reference {

std::size_t count_inconsistencies(const ImplicationGraph& graph, const PropositionIndex& props,
                                  const PredictionSet& predictions);

std::vector<RelationKind> oracle_relations(std::span<const synth::OraclePair> pairs,
                                           std::size_t n_attr);

trainer::SweepResult lambda_sweep(const synth::SyntheticDataset& dataset,
                                  std::span<const double> lambdas,
                                  std::span<const std::uint64_t> seeds,
                                  const trainer::TrainConfig& base);

}  // namespace implcons::reference
