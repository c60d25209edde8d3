// implcons: consistency metrics, flip baselines, synthetic benchmark and toy
// trainer for implication-annotated question answering data.

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "implcons/converter.hpp"
#include "implcons/errors.hpp"
#include "implcons/io.hpp"
#include "implcons/loss.hpp"
#include "implcons/metric.hpp"
#include "implcons/relations.hpp"
#include "implcons/synth.hpp"
#include "implcons/trainer.hpp"

namespace fs = std::filesystem;
using namespace implcons;

namespace {

template <typename T>
std::vector<T> parse_list(const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    std::istringstream is(item);
    T v{};
    if (!(is >> v) || !is.eof()) throw ValidationError("cannot parse list item '" + item + "'");
    out.push_back(v);
  }
  return out;
}

struct ScoredInputs {
  std::vector<Proposition> propositions;
  PropositionIndex index;
  ImplicationGraph graph;
  PredictionSet predictions;
};

ScoredInputs load_scored(const std::string& props_path, const std::string& rel_path,
                         const std::string& pred_path) {
  ScoredInputs s;
  auto pi = io::open_input(props_path);
  s.propositions = io::read_propositions(pi);
  s.index = PropositionIndex(s.propositions);
  auto ri = io::open_input(rel_path);
  auto records = io::read_relations(ri);
  s.graph = build_graph(records, s.index);
  auto qi = io::open_input(pred_path);
  s.predictions = io::read_predictions(qi);
  s.predictions.check_references(s.index);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Logical-implication consistency toolkit"};
  app.require_subcommand(1);

  // generate
  synth::GenerateOptions gen;
  std::string gen_out;
  auto* generate = app.add_subcommand("generate", "Write a synthetic benchmark dataset");
  generate->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  generate->add_option("--worlds", gen.n_worlds, "Number of worlds")->capture_default_str();
  generate->add_option("--attrs", gen.n_attr, "Attributes per world (<= 20)")->capture_default_str();
  generate->add_option("--queries", gen.queries_per_world, "Queries per world (>= 2)")
      ->capture_default_str();
  generate->add_flag("--match-distribution", gen.match_distribution,
                     "Steer relation kinds toward the annotated label mix");
  generate->add_option("--out", gen_out, "Output directory")->required();

  // score
  std::string props_path, rel_path, pred_path, report_path;
  auto* score = app.add_subcommand("score", "Consistency and accuracy of a prediction file");
  score->add_option("--propositions", props_path)->required();
  score->add_option("--relations", rel_path)->required();
  score->add_option("--predictions", pred_path)->required();
  score->add_option("--out", report_path, "Report JSON path");

  // flip
  std::string flip_strategy = "second", flip_out;
  std::uint64_t flip_seed = 0;
  auto* flip = app.add_subcommand("flip", "Flip-correction baseline on inconsistent pairs");
  flip->add_option("--propositions", props_path)->required();
  flip->add_option("--relations", rel_path)->required();
  flip->add_option("--predictions", pred_path)->required();
  flip->add_option("--strategy", flip_strategy, "random | first | second")
      ->check(CLI::IsMember({"random", "first", "second"}))
      ->capture_default_str();
  flip->add_option("--seed", flip_seed)->capture_default_str();
  flip->add_option("--out", flip_out, "Corrected predictions (JSON Lines)")->required();

  // train-toy
  trainer::TrainConfig tc;
  std::string data_dir, train_out;
  auto* train = app.add_subcommand("train-toy", "Train the toy logistic model");
  train->add_option("--data", data_dir, "Dataset directory")->required();
  train->add_option("--lambda", tc.lambda)->capture_default_str();
  train->add_option("--epochs", tc.epochs)->capture_default_str();
  train->add_option("--lr", tc.learning_rate)->capture_default_str();
  train->add_option("--batch-pairs", tc.batch_pairs)->capture_default_str();
  train->add_option("--seed", tc.seed)->capture_default_str();
  train->add_option("--out", train_out,
                    "Output directory (metrics.json, predictions.jsonl, held-out data)")
      ->required();

  // sweep
  std::string lambdas_text = "0,0.01,0.05,0.1,0.25,0.5,1", seeds_text = "1,2,3,4,5", csv_path;
  auto* sweep = app.add_subcommand("sweep", "Accuracy and consistency as a function of lambda");
  sweep->add_option("--data", data_dir, "Dataset directory")->required();
  sweep->add_option("--lambdas", lambdas_text, "Comma-separated lambda values")
      ->capture_default_str();
  sweep->add_option("--seeds", seeds_text, "Comma-separated seeds")->capture_default_str();
  sweep->add_option("--epochs", tc.epochs)->capture_default_str();
  sweep->add_option("--lr", tc.learning_rate)->capture_default_str();
  sweep->add_option("--batch-pairs", tc.batch_pairs)->capture_default_str();
  sweep->add_option("--out-csv", csv_path)->required();

  // loss-eval
  double pi1 = 0.5, pi2 = 0.5, vqa_loss = 0.0;
  LossConfig lc;
  auto* loss_eval = app.add_subcommand("loss-eval", "Evaluate the consistency loss and gradient");
  loss_eval->add_option("--pi1", pi1, "Probability of the sufficient proposition")
      ->check(CLI::Range(0.0, 1.0))
      ->required();
  loss_eval->add_option("--pi2", pi2, "Probability of the necessary proposition")
      ->check(CLI::Range(0.0, 1.0))
      ->required();
  loss_eval->add_option("--lambda", lc.lambda)->capture_default_str();
  loss_eval->add_option("--vqa-loss", vqa_loss)->capture_default_str();
  loss_eval->add_option("--epsilon", lc.epsilon)->capture_default_str();

  // convert
  std::string conv_in, conv_out, conv_err;
  auto* convert = app.add_subcommand("convert", "Rewrite binary QA pairs as propositions");
  convert->add_option("--input", conv_in, "Proposition JSON Lines")->required();
  convert->add_option("--out", conv_out, "Output JSON Lines {id, proposition_text}")->required();
  convert->add_option("--errors", conv_err, "Rejected rows with reasons (default: <out>.errors)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) {
      auto ds = synth::generate(gen);
      io::save_dataset(gen_out, ds);
      auto counts = ds.kind_counts();
      std::cout << "wrote " << ds.worlds.size() << " worlds, " << ds.propositions().size()
                << " propositions, " << ds.relations.size() << " relations to " << gen_out
                << '\n';
      for (auto k : {RelationKind::NecessaryFor, RelationKind::Equivalent, RelationKind::Unrelated,
                     RelationKind::SufficientFor}) {
        std::cout << "  " << std::left << std::setw(11) << to_string(k) << std::right
                  << std::setw(6) << counts[k] << "  " << std::fixed << std::setprecision(1)
                  << 100.0 * counts.fraction(k) << " %\n";
      }
    } else if (*score) {
      auto s = load_scored(props_path, rel_path, pred_path);
      auto report = make_report(s.graph, s.index, s.predictions);
      io::print_report(std::cout, report);
      if (!report_path.empty()) {
        auto out = io::open_output(report_path);
        out << io::report_json(report) << '\n';
      }
    } else if (*flip) {
      auto s = load_scored(props_path, rel_path, pred_path);
      auto strategy = parse_flip_strategy(flip_strategy);
      auto before = make_report(s.graph, s.index, s.predictions);
      auto corrected = flip_correction(s.graph, s.index, s.predictions, strategy, flip_seed);
      auto after = make_report(s.graph, s.index, corrected);
      auto out = io::open_output(flip_out);
      io::write_predictions(out, corrected);
      std::cout << std::fixed << std::setprecision(2) << "strategy " << flip_strategy
                << ": accuracy " << 100.0 * before.accuracy << " -> " << 100.0 * after.accuracy
                << " %, consistency " << 100.0 * before.consistency << " -> "
                << 100.0 * after.consistency << " %\n";
    } else if (*train) {
      auto ds = io::load_dataset(data_dir);
      auto result = trainer::train(ds, tc);
      fs::create_directories(train_out);
      {
        auto out = io::open_output(fs::path(train_out) / "metrics.json");
        out << io::metrics_json(tc, result.history) << '\n';
      }
      {
        auto out = io::open_output(fs::path(train_out) / "predictions.jsonl");
        io::write_predictions(out, result.heldout_predictions);
      }
      // Held-out slice of the dataset, so that score/flip apply directly.
      auto heldout_props = ds.propositions(result.split.heldout);
      PropositionIndex heldout_index(heldout_props);
      std::vector<RelationRecord> heldout_relations;
      for (const auto& r : ds.relations) {
        if (heldout_index.contains(r.image_id, r.prop_i)) heldout_relations.push_back(r);
      }
      {
        auto out = io::open_output(fs::path(train_out) / "heldout_propositions.jsonl");
        io::write_propositions(out, heldout_props);
      }
      auto out = io::open_output(fs::path(train_out) / "heldout_relations.jsonl");
      io::write_relations(out, heldout_relations);
      const auto& r = result.history.final_report;
      std::cout << std::fixed << std::setprecision(2) << "lambda " << tc.lambda
                << ": held-out accuracy " << 100.0 * r.accuracy << " %, consistency "
                << 100.0 * r.consistency << " % (" << r.inconsistencies << "/" << r.total_arrows
                << " arrows violated)\n";
    } else if (*sweep) {
      auto ds = io::load_dataset(data_dir);
      auto lambdas = parse_list<double>(lambdas_text);
      auto seeds = parse_list<std::uint64_t>(seeds_text);
      auto result = trainer::lambda_sweep(ds, lambdas, seeds, tc);
      {
        auto out = io::open_output(csv_path);
        io::write_sweep_csv(out, result.runs);
      }
      std::cout << std::setw(8) << "lambda" << std::setw(20) << "accuracy %" << std::setw(20)
                << "consistency %" << '\n';
      for (const auto& s : result.summary) {
        std::ostringstream acc, cons;
        acc << std::fixed << std::setprecision(2) << 100.0 * s.mean_accuracy << " +- "
            << 100.0 * s.std_accuracy;
        cons << std::fixed << std::setprecision(2) << 100.0 * s.mean_consistency << " +- "
             << 100.0 * s.std_consistency;
        std::cout << std::setw(8) << s.lambda << std::setw(20) << acc.str() << std::setw(20)
                  << cons.str() << '\n';
      }
    } else if (*loss_eval) {
      lc.validate();
      PropPair pair{pi1, pi2};
      auto g = cons_loss_grad(pair, lc);
      std::cout << std::setprecision(17) << "cons_loss " << cons_loss(pair, lc) << '\n'
                << "grad_pi1 " << g.d_pi1 << '\n'
                << "grad_pi2 " << g.d_pi2 << '\n'
                << "joint_loss " << joint_loss(vqa_loss, std::span(&pair, 1), lc) << '\n';
    } else if (*convert) {
      if (conv_err.empty()) conv_err = conv_out + ".errors";
      auto in = io::open_input(conv_in);
      auto props = io::read_propositions(in);
      auto out = io::open_output(conv_out);
      auto err = io::open_output(conv_err);
      std::size_t ok = 0, rejected = 0;
      for (const auto& p : props) {
        nlohmann::ordered_json j;
        j["id"] = p.id;
        try {
          j["proposition_text"] = qa_to_proposition({p.question, p.answer});
          out << j.dump() << '\n';
          ++ok;
        } catch (const UnsupportedQuestionError& e) {
          j["image_id"] = p.image_id;
          j["reason"] = e.what();
          err << j.dump() << '\n';
          ++rejected;
        }
      }
      std::cout << "converted " << ok << ", rejected " << rejected << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
