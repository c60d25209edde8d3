#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "implcons/metric.hpp"
#include "implcons/relations.hpp"
#include "implcons/synth.hpp"
#include "implcons/trainer.hpp"

// JSON Lines readers and writers for the file formats the tools exchange:
//   propositions  {id, image_id, question, answer}
//   relations     {image_id, prop_i, prop_j, kind}
//   predictions   {image_id, prop_id, predicted_answer, probability}
//   worlds        {id, attributes}
// Readers skip blank lines and throw ParseError with the line number.

namespace implcons::io {

std::vector<Proposition> read_propositions(std::istream& in);
void write_propositions(std::ostream& out, std::span<const Proposition> props);

std::vector<RelationRecord> read_relations(std::istream& in);
void write_relations(std::ostream& out, std::span<const RelationRecord> records);

PredictionSet read_predictions(std::istream& in);
void write_predictions(std::ostream& out, const PredictionSet& predictions);

std::vector<synth::World> read_worlds(std::istream& in);
void write_worlds(std::ostream& out, std::span<const synth::World> worlds);

std::string report_json(const ConsistencyReport& report);
/// Human-readable summary table.
void print_report(std::ostream& out, const ConsistencyReport& report);

std::string metrics_json(const trainer::TrainConfig& config,
                         const trainer::MetricsHistory& history);

/// CSV with header `lambda,seed,accuracy,consistency`.
void write_sweep_csv(std::ostream& out, std::span<const trainer::SweepRun> runs);

// Dataset directories hold worlds.jsonl, propositions.jsonl and
// relations.jsonl (plus relation_stats.json when written by save_dataset).
void save_dataset(const std::filesystem::path& dir, const synth::SyntheticDataset& dataset);
synth::SyntheticDataset load_dataset(const std::filesystem::path& dir);

std::string relation_stats_json(const synth::KindCounts& counts);

/// Opens a file or throws Error naming the path.
std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace implcons::io
