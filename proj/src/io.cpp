#include "implcons/io.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "implcons/errors.hpp"

namespace implcons::io {

using json = nlohmann::ordered_json;

namespace {

template <typename Fn>
void for_each_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

// Identifiers may be strings or integers in files produced elsewhere.
std::string id_field(const json& j, const char* name) {
  const auto& v = j.at(name);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw ParseError(std::string("field '") + name + "' must be a string or integer");
}

}  // namespace

std::vector<Proposition> read_propositions(std::istream& in) {
  std::vector<Proposition> out;
  for_each_line(in, [&](const json& j) {
    out.push_back({id_field(j, "id"), id_field(j, "image_id"), j.at("question").get<std::string>(),
                   j.at("answer").get<std::string>()});
  });
  return out;
}

void write_propositions(std::ostream& out, std::span<const Proposition> props) {
  for (const auto& p : props) {
    json j;
    j["id"] = p.id;
    j["image_id"] = p.image_id;
    j["question"] = p.question;
    j["answer"] = p.answer;
    out << j.dump() << '\n';
  }
}

std::vector<RelationRecord> read_relations(std::istream& in) {
  std::vector<RelationRecord> out;
  for_each_line(in, [&](const json& j) {
    RelationRecord r{id_field(j, "image_id"), id_field(j, "prop_i"), id_field(j, "prop_j"),
                     parse_relation_kind(j.at("kind").get<std::string>())};
    try {
      validate(r);
    } catch (const ValidationError& e) {
      throw ParseError(e.what());
    }
    out.push_back(std::move(r));
  });
  return out;
}

void write_relations(std::ostream& out, std::span<const RelationRecord> records) {
  for (const auto& r : records) {
    json j;
    j["image_id"] = r.image_id;
    j["prop_i"] = r.prop_i;
    j["prop_j"] = r.prop_j;
    j["kind"] = std::string(to_string(r.kind));
    out << j.dump() << '\n';
  }
}

PredictionSet read_predictions(std::istream& in) {
  PredictionSet out;
  for_each_line(in, [&](const json& j) {
    try {
      out.set(id_field(j, "image_id"), id_field(j, "prop_id"),
              {j.at("predicted_answer").get<std::string>(), j.at("probability").get<double>()});
    } catch (const ValidationError& e) {
      throw ParseError(e.what());
    }
  });
  return out;
}

void write_predictions(std::ostream& out, const PredictionSet& predictions) {
  for (const auto& [key, p] : predictions.entries()) {
    json j;
    j["image_id"] = key.first;
    j["prop_id"] = key.second;
    j["predicted_answer"] = p.predicted_answer;
    j["probability"] = p.probability;
    out << j.dump() << '\n';
  }
}

std::vector<synth::World> read_worlds(std::istream& in) {
  std::vector<synth::World> out;
  for_each_line(in, [&](const json& j) {
    synth::World w{id_field(j, "id"), {}};
    for (const auto& bit : j.at("attributes")) {
      auto v = bit.is_boolean() ? (bit.get<bool>() ? 1 : 0) : bit.get<int>();
      if (v != 0 && v != 1) throw ParseError("world attributes must be 0 or 1");
      w.attributes.push_back(static_cast<std::uint8_t>(v));
    }
    out.push_back(std::move(w));
  });
  return out;
}

void write_worlds(std::ostream& out, std::span<const synth::World> worlds) {
  for (const auto& w : worlds) {
    json j;
    j["id"] = w.id;
    j["attributes"] = json::array();
    for (auto bit : w.attributes) j["attributes"].push_back(static_cast<int>(bit));
    out << j.dump() << '\n';
  }
}

std::string report_json(const ConsistencyReport& r) {
  json j;
  j["total_arrows"] = r.total_arrows;
  j["inconsistencies"] = r.inconsistencies;
  j["consistency"] = r.consistency;
  j["accuracy"] = r.accuracy;
  j["inconsistent_pairs"] = json::array();
  for (const auto& p : r.inconsistent_pairs) {
    json pj;
    pj["sufficient"] = p.sufficient;
    pj["necessary"] = p.necessary;
    pj["image_id"] = p.image_id;
    j["inconsistent_pairs"].push_back(pj);
  }
  return j.dump(2);
}

void print_report(std::ostream& out, const ConsistencyReport& r) {
  auto flags = out.flags();
  out << std::left << std::setw(18) << "arrows |G(T)|" << r.total_arrows << '\n'
      << std::setw(18) << "inconsistencies" << r.inconsistencies << '\n'
      << std::setw(18) << "consistency" << std::fixed << std::setprecision(2)
      << 100.0 * r.consistency << " %\n"
      << std::setw(18) << "accuracy" << 100.0 * r.accuracy << " %\n";
  out.flags(flags);
  if (!r.inconsistent_pairs.empty()) {
    out << "\ninconsistent pairs (image: sufficient -> necessary)\n";
    for (const auto& p : r.inconsistent_pairs) {
      out << "  " << p.image_id << ": " << p.sufficient << " -> " << p.necessary << '\n';
    }
  }
}

std::string metrics_json(const trainer::TrainConfig& c, const trainer::MetricsHistory& h) {
  json j;
  j["config"] = {{"lambda", c.lambda},
                 {"learning_rate", c.learning_rate},
                 {"epochs", c.epochs},
                 {"batch_pairs", c.batch_pairs},
                 {"seed", c.seed},
                 {"epsilon", c.epsilon},
                 {"dropout_rate", c.features.dropout_rate}};
  j["epochs"] = json::array();
  for (std::size_t e = 0; e < h.epochs.size(); ++e) {
    j["epochs"].push_back({{"epoch", e},
                           {"train_loss", h.epochs[e].train_loss},
                           {"accuracy", h.epochs[e].accuracy},
                           {"consistency", h.epochs[e].consistency}});
  }
  j["final"] = json::parse(report_json(h.final_report));
  return j.dump(2);
}

void write_sweep_csv(std::ostream& out, std::span<const trainer::SweepRun> runs) {
  out << "lambda,seed,accuracy,consistency\n";
  auto flags = out.flags();
  auto precision = out.precision();
  out << std::setprecision(17);
  for (const auto& r : runs) {
    out << r.lambda << ',' << r.seed << ',' << r.accuracy << ',' << r.consistency << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

std::string relation_stats_json(const synth::KindCounts& counts) {
  json j;
  j["total"] = counts.total();
  for (auto k : {RelationKind::NecessaryFor, RelationKind::Equivalent, RelationKind::Unrelated,
                 RelationKind::SufficientFor}) {
    j[std::string(to_string(k))] = {{"count", counts[k]}, {"fraction", counts.fraction(k)}};
  }
  return j.dump(2);
}

void save_dataset(const std::filesystem::path& dir, const synth::SyntheticDataset& ds) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_output(dir / "worlds.jsonl");
    write_worlds(out, ds.worlds);
  }
  {
    auto out = open_output(dir / "propositions.jsonl");
    write_propositions(out, ds.propositions());
  }
  {
    auto out = open_output(dir / "relations.jsonl");
    write_relations(out, ds.relations);
  }
  auto out = open_output(dir / "relation_stats.json");
  out << relation_stats_json(ds.kind_counts()) << '\n';
}

synth::SyntheticDataset load_dataset(const std::filesystem::path& dir) {
  auto wi = open_input(dir / "worlds.jsonl");
  auto pi = open_input(dir / "propositions.jsonl");
  auto ri = open_input(dir / "relations.jsonl");
  auto worlds = read_worlds(wi);
  auto props = read_propositions(pi);
  auto relations = read_relations(ri);
  return synth::assemble(std::move(worlds), props, std::move(relations));
}

}  // namespace implcons::io
