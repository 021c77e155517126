// Acceptance runner: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gradcheck.hpp"
#include "metric_cases.hpp"
#include "neuron/bootstrap.hpp"
#include "neuron/config.hpp"
#include "neuron/decoder.hpp"
#include "neuron/errors.hpp"
#include "neuron/eval.hpp"
#include "neuron/formats.hpp"
#include "neuron/grammar.hpp"
#include "neuron/io.hpp"
#include "neuron/pipeline.hpp"
#include "neuron/relevance.hpp"
#include "neuron/train.hpp"
#include "oracles.hpp"
#include "toy.hpp"

using namespace neuron;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// --- 1 and 2: decoded sequences ----------------------------------------------

struct SoundnessTally {
  std::size_t sequences = 0;
  std::size_t from_random = 0;
  std::size_t from_trained = 0;
  std::size_t malformed = 0;
  std::size_t word_tokens = 0;
  std::size_t foreign_tokens = 0;
  std::size_t no_extraction = 0;
};

void tally(SoundnessTally& t, const Vocabulary& v, const QAPair& p, const std::vector<Candidate>& cands) {
  std::set<TokenId> source(p.q_tokens.begin(), p.q_tokens.end());
  source.insert(p.a_tokens.begin(), p.a_tokens.end());
  for (const auto& c : cands) {
    ++t.sequences;
    try {
      delinearize(c.sequence.tokens, v);
      if (!fsm_accepts(c.sequence.tokens, v)) ++t.malformed;
    } catch (const DataError&) {
      ++t.malformed;
    }
    for (TokenId tok : c.sequence.tokens) {
      if (v.is_tag(tok)) continue;
      ++t.word_tokens;
      if (!source.count(tok)) ++t.foreign_tokens;
    }
  }
}

// A small model trained on a small synthetic corpus, decoded over its pairs.
void trained_decodes(SoundnessTally& t, std::size_t target) {
  SynthConfig sc;
  sc.pairs = 400;
  sc.seed = 3;
  const auto synth = generate_synthetic(sc);
  std::vector<TextPair> corpus;
  std::vector<Tokens> texts;
  for (const auto& p : synth.pairs) {
    corpus.push_back({p.id, tokenize(p.question), tokenize(p.answer)});
    texts.push_back(corpus.back().question);
    texts.push_back(corpus.back().answer);
  }
  const auto vocab = Vocabulary::build(texts, 50000);
  BootstrapConfig bc;
  bc.min_count = 2;
  const auto boot = bootstrap(corpus, SeedExtractor{}, default_stopwords(), bc);
  std::map<std::string, const TextPair*> by_id;
  for (const auto& p : corpus) by_id[p.id] = &p;
  std::vector<TrainingInstance> train_set;
  for (const auto& inst : boot.instances) {
    train_set.push_back(make_training_instance(vocab, *by_id.at(inst.pair_id), inst.target, inst.type));
  }
  ModelConfig mc;
  mc.vocab_size = vocab.size();
  mc.embedding_dim = 12;
  mc.hidden_dim = 12;
  mc.attention_dim = 12;
  TrainConfig tc;
  tc.max_steps = 150;
  tc.batch_size = 16;
  tc.eval_every = 50;
  tc.dropout = 0.0;
  const auto model = train(Model::create(mc, 5), vocab, train_set, {}, tc).best.model;

  DecodeConfig dc;
  dc.max_length = 24;
  for (std::size_t round = 0; t.from_trained < target; ++round) {
    dc.beam_width = 2 + round % 6;
    for (const auto& p : corpus) {
      const auto qa = encode_pair(vocab, p);
      try {
        const auto cands = beam_search(model, vocab, qa, dc);
        const std::size_t before = t.sequences;
        tally(t, vocab, qa, cands);
        t.from_trained += t.sequences - before;
      } catch (const NoExtraction&) {
        ++t.no_extraction;
      }
      if (t.from_trained >= target) break;
    }
  }
}

SoundnessTally soundness_run() {
  SoundnessTally t;
  Rng rng(2024);
  std::uint64_t seed = 1;
  while (t.from_random < 6000) {
    const auto v = toy::vocab(4 + rng.index(9));
    const auto m = toy::model(v, seed++, 0.5 + 2.0 * rng.uniform());
    const auto p = toy::pair(rng, v.size() - kSpecialCount, 5);
    DecodeConfig dc;
    dc.beam_width = 1 + rng.index(6);
    dc.max_length = 10 + rng.index(20);
    try {
      const auto cands = beam_search(m, v, p, dc);
      const std::size_t before = t.sequences;
      tally(t, v, p, cands);
      t.from_random += t.sequences - before;
    } catch (const NoExtraction&) {
      ++t.no_extraction;
    }
  }
  trained_decodes(t, 4000);
  return t;
}

std::string tally_text(const SoundnessTally& t) {
  return std::to_string(t.sequences) + " sequences (" + std::to_string(t.from_random) + " random-model, " +
         std::to_string(t.from_trained) + " trained-model), " + std::to_string(t.no_extraction) + " empty decodes";
}

Outcome criterion_1() {
  const auto t = soundness_run();
  return {t.sequences >= 10000 && t.malformed == 0 && t.no_extraction == 0,
          std::to_string(t.sequences - t.malformed) + "/" + std::to_string(t.sequences) + " delinearize; " + tally_text(t)};
}

Outcome criterion_2() {
  const auto t = soundness_run();
  return {t.sequences >= 10000 && t.foreign_tokens == 0 && t.word_tokens > 0,
          std::to_string(t.word_tokens - t.foreign_tokens) + "/" + std::to_string(t.word_tokens) +
              " word tokens from the source pair; " + tally_text(t)};
}

// --- 3: exhaustive oracle ----------------------------------------------------

Outcome criterion_3() {
  Rng rng(77);
  std::size_t mismatches = 0, models = 0, enumerated = 0, width_drops = 0;
  double worst_gap = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto v = toy::vocab(3 + rng.index(6));
    const auto m = toy::model(v, 1000 + seed, 0.5 + 2.5 * rng.uniform());
    const auto p = toy::pair(rng, v.size() - kSpecialCount, 3);
    DecodeConfig dc;
    dc.beam_width = 1000000;
    dc.pool_size = 1;
    dc.max_length = 12;
    const auto best = oracle::exhaustive_argmax(m, v, p, 12);
    const auto got = beam_search(m, v, p, dc);
    ++models;
    enumerated += best.sequences;
    if (got.front().sequence.tokens != best.tokens) ++mismatches;
    worst_gap = std::max(worst_gap, std::abs(got.front().log_prob - best.log_prob));
    double prev = -INFINITY;
    for (std::size_t k : {1u, 2u, 4u, 8u, 16u, 64u}) {
      dc.beam_width = k;
      const double lp = beam_search(m, v, p, dc).front().log_prob;
      if (lp < prev) ++width_drops;
      prev = lp;
    }
  }
  return {mismatches == 0 && models >= 50,
          std::to_string(mismatches) + " mismatches over " + std::to_string(models) + " models, " +
              std::to_string(enumerated) + " sequences enumerated, max |dlogP| " + fmt("%.2e", worst_gap) +
              "; beam-width drops (k=1..64) " + std::to_string(width_drops)};
}

// --- 4: gradient fidelity ----------------------------------------------------

Outcome criterion_4() {
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed * 7919);
    const auto v = toy::vocab(6);
    ModelConfig mc;
    mc.vocab_size = v.size();
    mc.embedding_dim = 2 + rng.index(5);
    mc.hidden_dim = 2 + rng.index(7);
    mc.attention_dim = 2 + rng.index(5);
    mc.layers = 1 + rng.index(2);
    mc.bidirectional = rng.uniform() < 0.5;
    mc.init_scale = 0.2 + 0.4 * rng.uniform();
    Model m = Model::create(mc, seed);
    std::vector<TrainingInstance> set;
    for (int i = 0; i < 2; ++i) {
      TextPair tp{"p" + std::to_string(i), {}, {}};
      const std::size_t nq = 1 + rng.index(6), na = 1 + rng.index(6);
      for (std::size_t k = 0; k < nq; ++k) tp.question.push_back("w" + std::to_string(rng.index(6)));
      for (std::size_t k = 0; k < na; ++k) tp.answer.push_back("w" + std::to_string(rng.index(6)));
      Tokens pool = tp.question;
      pool.insert(pool.end(), tp.answer.begin(), tp.answer.end());
      auto pick = [&] { return Tokens{pool[rng.index(pool.size())]}; };
      const Triple target{pick(), pick(), pick()};
      set.push_back(make_training_instance(v, tp, target, InstanceType::Joint));
    }
    const auto r = gradcheck::run(m, v, set);
    worst = std::max(worst, r.max_rel_error);
    checked += r.checked;
  }
  return {worst < 1e-4, "max relative error " + fmt("%.3e", worst) + " over " + std::to_string(checked) +
                            " partials, 20 seeds (five-point stencil, denominator floor 1e-6)"};
}

// --- 5 and 9: pipeline runs --------------------------------------------------

struct PipelineRun {
  fs::path dir;
  std::vector<std::string> files;
};

PipelineRun run_pipeline(const fs::path& dir, const RunConfig& cfg, const std::vector<std::string>& gammas) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto at = [&](const std::string& f) { return (dir / f).string(); };
  PipelineRun run{dir, {"corpus.tsv", "gold.tsv", "splits.tsv", "instances.tsv", "model.ckpt", "ke.tsv"}};
  cmd_synth(cfg, CommandPaths{.out = dir.string()});
  cmd_bootstrap(cfg, CommandPaths{.corpus = at("corpus.tsv"), .splits = at("splits.tsv"), .out = at("instances.tsv")});
  cmd_train(cfg, CommandPaths{.corpus = at("corpus.tsv"), .splits = at("splits.tsv"),
                              .instances = at("instances.tsv"), .out = at("model.ckpt")});
  cmd_ke_train(cfg, CommandPaths{.splits = at("splits.tsv"), .gold = at("gold.tsv"), .out = at("ke.tsv")});
  CommandPaths ev{.corpus = at("corpus.tsv"), .splits = at("splits.tsv"), .gold = at("gold.tsv"),
                  .out = at("scores.tsv")};
  for (const auto& g : gammas) {
    auto c = cfg;
    c.set("decode.gamma", g);
    const std::string name = "extract_gamma" + g + ".tsv";
    cmd_extract(c, CommandPaths{.corpus = at("corpus.tsv"), .splits = at("splits.tsv"), .model = at("model.ckpt"),
                                .ke_store = at("ke.tsv"), .out = at(name)});
    run.files.push_back(name);
    ev.predictions.emplace_back("gamma=" + g, at(name));
  }
  ev.baseline = ev.predictions.front().first;
  cmd_eval(cfg, ev);
  run.files.push_back("scores.tsv");
  return run;
}

std::map<std::string, SystemScore> scores_of(const PipelineRun& run) {
  auto at = [&](const std::string& f) { return (run.dir / f).string(); };
  const auto splits = read_splits(io::read_file(at("splits.tsv")));
  GoldSet gold;
  for (auto& [id, ts] : read_tuples(io::read_file(at("gold.tsv")))) {
    if (splits.at(id) == Split::Test) gold[id] = ts;
  }
  std::vector<PredictionSet> systems;
  for (const auto& f : run.files) {
    if (f.rfind("extract_", 0) == 0) systems.push_back(to_prediction_set(f, read_extractions(io::read_file(at(f)))));
  }
  std::map<std::string, SystemScore> out;
  for (auto& s : score_systems(systems, gold)) out[s.system] = s;
  return out;
}

Outcome criterion_5(const fs::path& work) {
  const auto start = std::chrono::steady_clock::now();
  const RunConfig cfg;
  const auto run = run_pipeline(work / "benchmark", cfg, {"0", "0.05", "1"});
  const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 60.0;
  const auto s = scores_of(run);
  const auto& g0 = s.at("extract_gamma0.tsv");
  const auto& g5 = s.at("extract_gamma0.05.tsv");
  const auto& g1 = s.at("extract_gamma1.tsv");
  const double r0 = g0.recall.value_or(0.0), r5 = g5.recall.value_or(0.0);
  const bool pass = g0.precision >= 0.9 && g5.precision >= 0.9 && std::min(r0, r5) >= 0.9 &&
                    g5.precision >= g0.precision && minutes <= 15.0;
  return {pass, "P(gamma=0) " + fmt("%.4f", g0.precision) + ", P(gamma=0.05) " + fmt("%.4f", g5.precision) +
                    ", margin " + fmt("%+.4f", g5.precision - g0.precision) + ", pooled R " + fmt("%.4f", r0) + " / " +
                    fmt("%.4f", r5) + "; diagnostic P(gamma=1) " + fmt("%.4f", g1.precision) + "; " +
                    fmt("%.1f", minutes) + " min"};
}

Outcome criterion_9(const fs::path& work) {
  RunConfig cfg;
  cfg.set("train.max_steps", "300");
  cfg.set("train.eval_every", "100");
  auto threaded = cfg;
  threaded.set("extract.workers", "3");
  const auto a = run_pipeline(work / "determinism_a", cfg, {"0", "0.05"});
  const auto b = run_pipeline(work / "determinism_b", threaded, {"0", "0.05"});
  std::size_t identical = 0;
  std::string differing;
  for (const auto& f : a.files) {
    if (io::read_file((a.dir / f).string()) == io::read_file((b.dir / f).string())) {
      ++identical;
    } else {
      differing += " " + f;
    }
  }
  return {identical == a.files.size() && a.files == b.files,
          std::to_string(identical) + "/" + std::to_string(a.files.size()) +
              " stage outputs byte-identical across two runs (second run with 3 extract workers)" +
              (differing.empty() ? "" : "; differ:" + differing)};
}

// --- 6: re-ranking threshold -------------------------------------------------

struct TableDistance : PlausibilityModel {
  std::map<std::string, double> d;
  double distance(const Triple& t) const override { return d.at(to_string(t)); }
};

Outcome criterion_6() {
  const auto v = toy::vocab(3);
  const Triple t1{{"w0"}, {"w1"}, {"w2"}}, t2{{"w2"}, {"w1"}, {"w0"}};
  Rng rng(606);
  double worst = 0.0;
  std::size_t cases = 0, wrong_side = 0;
  while (cases < 200) {
    const double lp1 = -rng.uniform(0.01, 5.0);
    const double lp2 = lp1 - rng.uniform(1e-3, 3.0);
    const double d1 = rng.uniform(0.5, 20.0), d2 = rng.uniform(0.0, d1 * 0.9);
    const double r1 = -std::log1p(d1), r2 = -std::log1p(d2);
    const double gstar = (lp1 - lp2) / (r2 - r1);
    if (!(gstar > 0.0) || gstar > 1e3) continue;
    ++cases;
    TableDistance td;
    td.d = {{to_string(t1), d1}, {to_string(t2), d2}};
    const std::vector<Candidate> cands{{linearize(t1, v), lp1}, {linearize(t2, v), lp2}};
    auto winner = [&](double g) { return rerank(cands, v, &td, g).front().index; };
    double lo = 0.0, hi = 2.0 * gstar + 1.0;
    if (winner(lo) != 0 || winner(hi) != 1) {
      ++wrong_side;
      continue;
    }
    while (hi - lo > 1e-13 * std::max(1.0, hi)) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (winner(mid) == 0 ? lo : hi) = mid;
    }
    worst = std::max(worst, std::abs(0.5 * (lo + hi) - gstar));
  }
  return {wrong_side == 0 && worst <= 1e-9, "max |gamma_found - gamma*| " + fmt("%.2e", worst) + " over " +
                                                std::to_string(cases) + " constructed pairs"};
}

// --- 7: metric formulas ------------------------------------------------------

Outcome criterion_7() {
  std::size_t ok = 0;
  std::string failed;
  const auto cases = metric_cases::formula_cases();
  for (const auto& [name, pass] : cases) {
    if (pass) {
      ++ok;
    } else {
      failed += "; failed: " + name;
    }
  }
  const auto sweep = metric_cases::rc_pair_sweep(1000, 7);
  return {ok == cases.size() && sweep.pairs == 1000 && sweep.violations == 0 && sweep.equality_mismatches == 0,
          std::to_string(ok) + "/" + std::to_string(cases.size()) + " formula cases; RC(n,b)+RC(b,n) <= 1 on " +
              std::to_string(sweep.pairs - sweep.violations) + "/" + std::to_string(sweep.pairs) +
              " random pairs, equality iff disjoint on " + std::to_string(sweep.pairs - sweep.equality_mismatches) +
              failed};
}

// --- 8: TransE sanity --------------------------------------------------------

Outcome criterion_8() {
  const auto kb = oracle::toy_kb();
  std::size_t good = 0, monotone = 0;
  std::string ranks;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    KEConfig c;
    c.seed = seed;
    const auto res = train_transe(kb, c);
    const auto r = filtered_tail_rank(res.store, kb);
    if (r.mean_rank * 2.0 <= r.random_mean_rank) ++good;
    bool mono = true;
    for (std::size_t e = 1; e < res.loss_history.size(); ++e) mono = mono && res.loss_history[e] <= res.loss_history[e - 1];
    if (mono) ++monotone;
    ranks += (ranks.empty() ? "" : ", ") + fmt("%.2f", r.mean_rank);
    if (seed == 5) ranks += " vs random " + fmt("%.1f", r.random_mean_rank);
  }
  return {good == 5 && monotone == 5, std::to_string(good) + "/5 seeds at least 2x better than random (mean ranks " +
                                          ranks + "); loss non-increasing for " + std::to_string(monotone) + "/5"};
}

const char* kNames[] = {"", "grammar soundness", "vocabulary soundness", "oracle equivalence", "gradient fidelity",
                        "synthetic benchmark", "re-ranking threshold", "metric formulas", "TransE sanity",
                        "determinism"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neuron acceptance runner"};
  int only = 0;
  std::string workdir = "acceptance_work";
  app.add_option("--only", only, "run a single criterion (1-9)")->check(CLI::Range(1, 9));
  app.add_option("--workdir", workdir, "scratch directory for pipeline runs");
  CLI11_PARSE(app, argc, argv);

  const fs::path work(workdir);
  const std::vector<std::function<Outcome()>> criteria{
      criterion_1, criterion_2, criterion_3, criterion_4, [&] { return criterion_5(work); }, criterion_6,
      criterion_7, criterion_8, [&] { return criterion_9(work); }};

  int failures = 0;
  for (int i = 1; i <= 9; ++i) {
    if (only != 0 && i != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[static_cast<std::size_t>(i - 1)]();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d %s %s: %s [%.1fs]\n", i, o.pass ? "PASS" : "FAIL", kNames[i], o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
