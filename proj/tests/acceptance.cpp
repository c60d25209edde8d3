// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "implcons/converter.hpp"
#include "implcons/loss.hpp"
#include "implcons/metric.hpp"
#include "implcons/relations.hpp"
#include "implcons/synth.hpp"
#include "implcons/trainer.hpp"

namespace fs = std::filesystem;
using namespace implcons;

namespace {

constexpr double kEps = 1e-7;
constexpr double kLn2 = 0.6931471805599453094172321214581765680755;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Checker {
 public:
  void require(bool cond, const std::string& what) {
    if (!cond && outcome_.pass) {
      outcome_.pass = false;
      outcome_.detail = what;
    }
  }
  void note(const std::string& s) {
    if (outcome_.pass) outcome_.detail = s;
  }
  Outcome result() const { return outcome_; }

 private:
  Outcome outcome_;
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s << std::setprecision(prec) << v;
  return s.str();
}

// ---- loss ---------------------------------------------------------------

Outcome loss_boundary() {
  Checker c;
  const LossConfig cfg{1.0, kEps};
  const double floor = 2 * kEps * std::abs(std::log(kEps));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    double a = cons_loss({0.0, u(rng)}, cfg);
    double b = cons_loss({u(rng), 1.0}, cfg);
    worst = std::max({worst, a, b});
  }
  c.require(worst <= floor, "boundary loss " + fmt(worst) + " exceeds " + fmt(floor));
  double half = cons_loss({0.5, 0.5}, cfg);
  c.require(std::abs(half - kLn2) <= 1e-12, "L(0.5,0.5) = " + fmt(half, 17));
  c.note("max boundary loss " + fmt(worst) + " <= " + fmt(floor) + ", |L(.5,.5)-ln2| = " +
         fmt(std::abs(half - kLn2)));
  return c.result();
}

synth::SyntheticDataset micro_dataset() {
  synth::SyntheticDataset ds;
  ds.n_attr = 6;
  ds.worlds.push_back({"w0", {1, 0, 1, 1, 0, 1}});
  using synth::Formula;
  std::vector<Formula> fs{Formula::literal(0), Formula::disj({0, false}, {4, false}),
                          Formula::literal(1, true), Formula::literal(1)};
  std::vector<synth::QueryItem> items;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    items.push_back({{"q" + std::to_string(i), fs[i], synth::render_question(fs[i])},
                     synth::truth_eval(fs[i], ds.worlds[0])});
  }
  ds.queries.push_back(items);
  ds.relations.push_back({"w0", "q0", "q1", RelationKind::SufficientFor});
  ds.relations.push_back({"w0", "q2", "q3", RelationKind::Equivalent});
  ds.validate();
  return ds;
}

Outcome gradient_suite() {
  Checker c;
  const LossConfig cfg{1.0, kEps};
  const double h = 1e-6;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    PropPair p{u(rng), u(rng)};
    auto g = cons_loss_grad(p, cfg);
    double n1 = (cons_loss({p.pi1 + h, p.pi2}, cfg) - cons_loss({p.pi1 - h, p.pi2}, cfg)) / (2 * h);
    double n2 = (cons_loss({p.pi1, p.pi2 + h}, cfg) - cons_loss({p.pi1, p.pi2 - h}, cfg)) / (2 * h);
    worst = std::max({worst, std::abs(g.d_pi1 - n1) / std::abs(n1), std::abs(g.d_pi2 - n2) / std::abs(n2)});
  }
  c.require(worst < 1e-5, "closed-form gradient relative error " + fmt(worst));

  // Full training-step gradient on a 3-arrow dataset, at the initial
  // (zero) weights and at a random point.
  auto ds = micro_dataset();
  trainer::FeatureTable ft(ds, trainer::FeatureConfig{0.0, 0});
  std::vector<std::size_t> all{0};
  auto batch = trainer::paired_samples(ds, all);
  c.require(batch.size() == 3, "micro dataset has " + std::to_string(batch.size()) + " arrows");
  const LossConfig train_cfg{0.5, kEps};
  double step_worst = 0.0;
  std::normal_distribution<double> nd(0.0, 0.5);
  for (int point = 0; point < 2; ++point) {
    trainer::ToyModel m(ft.dim());
    if (point == 1) {
      for (auto& w : m.weights) w = nd(rng);
      m.bias = nd(rng);
    }
    auto lg = trainer::batch_loss(m, ds, ft, batch, train_cfg);
    double diff2 = 0.0, norm2 = 0.0;
    for (std::size_t k = 0; k <= m.dim(); ++k) {
      auto up = m, down = m;
      (k < m.dim() ? up.weights[k] : up.bias) += h;
      (k < m.dim() ? down.weights[k] : down.bias) -= h;
      double n = (trainer::batch_loss(up, ds, ft, batch, train_cfg).loss -
                  trainer::batch_loss(down, ds, ft, batch, train_cfg).loss) /
                 (2 * h);
      double a = k < m.dim() ? lg.weight_grad[k] : lg.bias_grad;
      diff2 += (a - n) * (a - n);
      norm2 += n * n;
    }
    step_worst = std::max(step_worst, std::sqrt(diff2 / norm2));
  }
  c.require(step_worst < 1e-4, "training-step gradient relative error " + fmt(step_worst));
  c.note("loss grad max rel err " + fmt(worst) + " (< 1e-5), training step " + fmt(step_worst) +
         " (< 1e-4)");
  return c.result();
}

Outcome monotonicity_suite() {
  Checker c;
  const LossConfig cfg{1.0, kEps};
  const int n = 100;
  auto at = [&](int i) { return kEps + (1.0 - 2 * kEps) * i / (n - 1); };
  int bad = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      auto g = cons_loss_grad({at(i), at(j)}, cfg);
      if (!(g.d_pi1 > 0.0) || !(g.d_pi2 < 0.0)) ++bad;
    }
  }
  c.require(bad == 0, std::to_string(bad) + " grid points with the wrong gradient sign");
  c.note("dL/dpi1 > 0 and dL/dpi2 < 0 at all 10000 grid points");
  return c.result();
}

// ---- metric -------------------------------------------------------------

Outcome metric_fixture() {
  Checker c;
  std::vector<Proposition> props{{"A", "x", "Is a on?", "yes"},
                                 {"B", "x", "Is b on?", "yes"},
                                 {"C", "x", "Is c on?", "yes"},
                                 {"D", "x", "Is d on?", "yes"}};
  PropositionIndex index(props);
  std::vector<RelationRecord> records{{"x", "A", "B", RelationKind::SufficientFor},
                                      {"x", "C", "D", RelationKind::SufficientFor},
                                      {"x", "B", "C", RelationKind::SufficientFor},
                                      {"x", "D", "A", RelationKind::SufficientFor}};
  auto graph = build_graph(records, index);
  PredictionSet preds;
  preds.set("x", "A", {"yes", 0.9});  // A->B: (T,F) the only violation
  preds.set("x", "B", {"no", 0.8});
  preds.set("x", "C", {"no", 0.7});
  preds.set("x", "D", {"no", 0.6});
  auto r = make_report(graph, index, preds);
  c.require(r.total_arrows == 4, "arrows " + std::to_string(r.total_arrows));
  c.require(r.inconsistencies == 1, "I_p = " + std::to_string(r.inconsistencies));
  c.require(r.consistency == 0.75, "c_p = " + fmt(r.consistency));
  c.require(r.inconsistent_pairs.size() == 1 &&
                r.inconsistent_pairs[0] == InconsistentPair{"A", "B", "x"},
            "wrong inconsistent pair list");
  c.note("I_p = 1, c_p = 0.75, pair (A -> B)");
  return c.result();
}

// ---- oracle -------------------------------------------------------------

bool holds(const synth::Formula& f, const std::vector<bool>& x) {
  auto lit = [&](synth::Literal l) { return l.negated ? !x[l.index] : static_cast<bool>(x[l.index]); };
  switch (f.op) {
    case synth::Connective::Literal:
      return lit(f.lhs);
    case synth::Connective::And:
      return lit(f.lhs) && lit(f.rhs);
    case synth::Connective::Or:
      return lit(f.lhs) || lit(f.rhs);
  }
  return false;
}

bool implies(const synth::FormulaProposition& a, const synth::FormulaProposition& b, std::size_t n) {
  std::vector<bool> x(n);
  for (std::size_t m = 0; m < (std::size_t{1} << n); ++m) {
    for (std::size_t i = 0; i < n; ++i) x[i] = ((m >> i) & 1U) != 0;
    if (holds(a.formula, x) == a.answer_yes && holds(b.formula, x) != b.answer_yes) return false;
  }
  return true;
}

Outcome oracle_soundness() {
  Checker c;
  const std::size_t n = 12;
  std::mt19937_64 rng(5);
  auto index = [&](std::size_t pool) { return static_cast<std::uint8_t>(rng() % pool); };
  auto formula = [&](std::size_t pool) {
    auto op = static_cast<synth::Connective>(rng() % 3);
    auto i = index(pool);
    auto j = index(pool);
    while (j == i) j = index(pool);
    return synth::Formula{op, {i, rng() % 2 == 0}, {j, rng() % 2 == 0}};
  };
  std::array<int, 4> kinds{};
  int disagreements = 0, asymmetric = 0;
  for (int t = 0; t < 500; ++t) {
    // Half the pairs draw from 3 attributes so that related pairs are common.
    std::size_t pool = t % 2 == 0 ? 3 : n;
    synth::FormulaProposition a{formula(pool), rng() % 2 == 0};
    synth::FormulaProposition b{formula(pool), rng() % 2 == 0};
    auto kind = synth::oracle_relation(a, b, n);
    ++kinds[static_cast<std::size_t>(kind)];
    auto arrows = normalize({"w", "a", "b", kind});
    bool ab = std::find(arrows.begin(), arrows.end(), ImplicationArrow{"w", "a", "b"}) != arrows.end();
    bool ba = std::find(arrows.begin(), arrows.end(), ImplicationArrow{"w", "b", "a"}) != arrows.end();
    if (ab != implies(a, b, n) || ba != implies(b, a, n)) ++disagreements;
    if (kind != invert(synth::oracle_relation(b, a, n))) ++asymmetric;
  }
  c.require(disagreements == 0, std::to_string(disagreements) + " pairs disagree with enumeration");
  c.require(asymmetric == 0, std::to_string(asymmetric) + " pairs violate symmetry");
  c.note("500 pairs agree; kinds fwd/bwd/eq/unrel = " + std::to_string(kinds[0]) + "/" +
         std::to_string(kinds[1]) + "/" + std::to_string(kinds[2]) + "/" + std::to_string(kinds[3]));
  return c.result();
}

// ---- toy benchmark ------------------------------------------------------

const synth::SyntheticDataset& default_benchmark() {
  static const auto ds = [] {
    synth::GenerateOptions opt;  // seed 1, 50 worlds, 12 attributes
    return synth::generate(opt);
  }();
  return ds;
}

Outcome flip_baselines() {
  Checker c;
  const auto& ds = default_benchmark();
  trainer::TrainConfig cfg;
  cfg.lambda = 0.0;
  cfg.seed = 1;
  auto run = trainer::train(ds, cfg);

  auto props = ds.propositions(run.split.heldout);
  PropositionIndex index(props);
  std::vector<RelationRecord> records;
  for (const auto& r : ds.relations) {
    if (index.contains(r.image_id, r.prop_i)) records.push_back(r);
  }
  auto graph = build_graph(records, index);
  const auto& base = run.heldout_predictions;
  auto none = make_report(graph, index, base);

  std::ostringstream detail;
  detail << std::fixed << std::setprecision(2) << "acc/cons none " << 100 * none.accuracy << "/"
         << 100 * none.consistency;
  bool any_acc_drop = false;
  double second_cons = 0.0;
  for (auto s : {FlipStrategy::Random, FlipStrategy::First, FlipStrategy::Second}) {
    auto r = make_report(graph, index, flip_correction(graph, index, base, s, 7));
    detail << ", " << to_string(s) << " " << 100 * r.accuracy << "/" << 100 * r.consistency;
    if (r.accuracy < none.accuracy) any_acc_drop = true;
    if (s == FlipStrategy::Second) second_cons = r.consistency;
  }
  c.require(none.inconsistencies > 0, "lambda=0 model has no inconsistencies to correct");
  c.require(second_cons > none.consistency, "flip second did not raise consistency; " + detail.str());
  c.require(any_acc_drop, "no flip strategy lowered accuracy; " + detail.str());
  c.note(detail.str());
  return c.result();
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = 0.5 * static_cast<double>(i + j) + 1.0;
    i = j + 1;
  }
  return rank;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  auto rx = average_ranks(x), ry = average_ranks(y);
  double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / rx.size();
  double my = std::accumulate(ry.begin(), ry.end(), 0.0) / ry.size();
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

Outcome lambda_trend() {
  Checker c;
  const auto& ds = default_benchmark();
  std::vector<double> lambdas{0.0, 0.01, 0.05, 0.1, 0.25, 0.5, 1.0};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  auto sweep = trainer::lambda_sweep(ds, lambdas, seeds, trainer::TrainConfig{});

  std::vector<double> lam, acc, cons;
  for (const auto& s : sweep.summary) {
    lam.push_back(s.lambda);
    acc.push_back(s.mean_accuracy);
    cons.push_back(s.mean_consistency);
  }
  double rho = spearman(lam, cons);
  c.require(rho > 0.8, "Spearman(lambda, consistency) = " + fmt(rho));

  std::string improving;
  for (std::size_t i = 1; i < lam.size(); ++i) {
    if (acc[i] >= acc[0] && cons[i] > cons[0]) improving += (improving.empty() ? "" : ",") + fmt(lam[i]);
  }
  c.require(!improving.empty(), "no lambda > 0 improves both accuracy and consistency");

  auto best = static_cast<std::size_t>(std::max_element(acc.begin(), acc.end()) - acc.begin());
  c.require(acc.back() < acc[best], "largest lambda has the best accuracy (no decline tail)");

  std::ostringstream table;
  table << std::fixed << std::setprecision(2);
  for (std::size_t i = 0; i < lam.size(); ++i) {
    table << "\n      lambda " << std::setw(5) << lam[i] << "  acc " << 100 * acc[i] << "  cons "
          << 100 * cons[i];
  }
  c.note("rho " + fmt(rho) + "; both improve at lambda {" + improving + "}; best acc at lambda " +
         fmt(lam[best]) + table.str());
  if (!c.result().pass) std::cout << table.str() << '\n';
  return c.result();
}

// ---- determinism --------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(IMPLCONS_CLI) + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

Outcome determinism() {
  Checker c;
  auto root = fs::temp_directory_path() / "implcons_acceptance_det";
  fs::remove_all(root);
  for (const char* tag : {"a", "b"}) {
    auto dir = root / tag;
    c.require(run_cli("generate --seed 11 --out " + (dir / "data").string()) == 0, "generate failed");
    c.require(run_cli("train-toy --data " + (dir / "data").string() +
                      " --lambda 0.1 --epochs 50 --seed 3 --out " + (dir / "model").string()) == 0,
              "train-toy failed");
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file()) continue;
    auto twin = root / "b" / fs::relative(entry.path(), root / "a");
    c.require(fs::exists(twin) && slurp(entry.path()) == slurp(twin),
              "differs: " + fs::relative(entry.path(), root / "a").string());
    ++compared;
  }
  c.require(compared >= 6, "only " + std::to_string(compared) + " files produced");
  fs::remove_all(root);
  c.note(std::to_string(compared) + " output files byte-identical across two runs");
  return c.result();
}

// ---- converter ----------------------------------------------------------

std::vector<std::string> folded_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string t; in >> t;) {
    while (!t.empty() && (t.back() == '?' || t.back() == '.')) t.pop_back();
    if (t.empty()) continue;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char ch) { return std::tolower(ch); });
    out.push_back(t);
  }
  return out;
}

Outcome converter_suite() {
  Checker c;
  auto worked = qa_to_proposition({"Is it winter?", "Yes"});
  c.require(worked == "It is winter.", "worked example gave '" + worked + "'");

  const std::array<const char*, 10> verbs{"Is", "Are", "Was", "Were", "Does", "Do", "Did", "Can", "Has", "Have"};
  const std::array<const char*, 6> subjects{"it", "the", "this", "he", "they", "there"};
  const std::array<const char*, 8> words{"man", "red", "winter", "wearing", "a", "hat", "open", "dog"};
  std::mt19937_64 rng(9);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    std::string q = std::string(verbs[rng() % verbs.size()]) + " " + subjects[rng() % subjects.size()];
    for (std::size_t k = 0, len = 1 + rng() % 4; k < len; ++k) q += std::string(" ") + words[rng() % words.size()];
    q += "?";
    bool yes = rng() % 2 == 0;
    auto out = qa_to_proposition({q, yes ? "yes" : "no"});
    c.require(out.find('?') == std::string::npos, "'?' in output: " + out);
    c.require(!out.empty() && out.back() == '.', "no terminal '.': " + out);
    if (yes) {
      auto qt = folded_tokens(q), ot = folded_tokens(out);
      auto qs = qt, os = ot;
      std::sort(qs.begin(), qs.end());
      std::sort(os.begin(), os.end());
      c.require(qs == os, "token multiset changed: " + q + " -> " + out);
      c.require(ot.size() >= 2 && std::equal(qt.begin() + 2, qt.end(), ot.begin() + 2),
                "order changed beyond the first two tokens: " + out);
    }
    ++checked;
  }
  c.note("worked example exact; " + std::to_string(checked) + " generated questions satisfy the properties");
  return c.result();
}

struct Criterion {
  const char* name;
  double limit_seconds;
  std::function<Outcome()> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"loss boundary", 1.0, loss_boundary},
      {"gradient", 5.0, gradient_suite},
      {"monotonicity", 1.0, monotonicity_suite},
      {"metric fixture", 1.0, metric_fixture},
      {"oracle soundness", 30.0, oracle_soundness},
      {"flip baselines", 60.0, flip_baselines},
      {"lambda trend", 300.0, lambda_trend},
      {"determinism", 60.0, determinism},
      {"converter", 1.0, converter_suite},
  };

  int failures = 0;
  for (const auto& cr : criteria) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = cr.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.pass && secs >= cr.limit_seconds) {
      o = {false, "took " + fmt(secs) + " s, limit " + fmt(cr.limit_seconds) + " s"};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << std::left << std::setw(18) << cr.name
              << std::right << std::fixed << std::setprecision(3) << std::setw(8) << secs << " s  "
              << o.detail << std::defaultfloat << '\n';
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed\n";
  return failures == 0 ? 0 : 1;
}
