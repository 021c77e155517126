#include "neuron/pipeline.hpp"

#include <atomic>
#include <exception>
#include <filesystem>
#include <optional>
#include <thread>

#include "neuron/errors.hpp"
#include "neuron/eval.hpp"
#include "neuron/formats.hpp"
#include "neuron/io.hpp"

namespace neuron {
namespace {

struct Input {
  std::string role;
  std::string text;
};

Input load(const std::string& role, const std::string& path) {
  if (path.empty()) throw ConfigError("missing --" + role + " path");
  return {role, io::read_file(path)};
}

std::string header(const std::string& command, const std::string& echo, const std::vector<const Input*>& inputs) {
  std::string h = "# neuron " + command + "\n# format 1\n" + echo;
  for (const auto* in : inputs) h += "# input " + in->role + " fnv1a " + io::hex64(io::fnv1a(in->text)) + "\n";
  return h;
}

std::optional<Split> split_option(const RunConfig& cfg, const std::string& key) {
  const auto& v = cfg.get(key);
  if (v == "all") return std::nullopt;
  try {
    return parse_split(v);
  } catch (const Error&) {
    throw ConfigError(key + " must be train, dev, test or all");
  }
}

TextPair to_text(const RawPair& p) { return {p.id, tokenize(p.question), tokenize(p.answer)}; }

std::map<std::string, Split> load_splits(const std::string& path, Input& holder) {
  holder = load("splits", path);
  return read_splits(holder.text);
}

Split split_of(const std::map<std::string, Split>& splits, const std::string& id) {
  const auto it = splits.find(id);
  if (it == splits.end()) throw DataError("pair " + id + " is missing from the split manifest");
  return it->second;
}

void ensure_parent(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(parent, ec);
  if (ec) throw DataError("cannot create " + parent.string() + ": " + ec.message());
}

void write_out(const std::string& path, const std::string& text) {
  if (path.empty()) throw ConfigError("missing --out path");
  ensure_parent(path);
  io::write_file(path, text);
}

}  // namespace

std::string cmd_synth(const RunConfig& cfg, const CommandPaths& paths) {
  const SynthConfig sc = cfg.synth();
  if (paths.out.empty()) throw ConfigError("missing --out directory");
  std::error_code ec;
  std::filesystem::create_directories(paths.out, ec);
  if (ec) throw DataError("cannot create " + paths.out + ": " + ec.message());
  const auto corpus = generate_synthetic(sc);
  const std::string h = header("synth", cfg.echo({"synth"}), {});
  const std::filesystem::path dir(paths.out);
  io::write_file((dir / "corpus.tsv").string(), write_corpus(corpus.pairs, h));
  io::write_file((dir / "gold.tsv").string(), write_tuples(corpus.gold, h));
  io::write_file((dir / "splits.tsv").string(), write_splits(corpus.split, h));

  std::size_t counts[3] = {0, 0, 0};
  for (const auto& [id, s] : corpus.split) ++counts[static_cast<int>(s)];
  return "pairs " + std::to_string(corpus.pairs.size()) + " (train " + std::to_string(counts[0]) + ", dev " +
         std::to_string(counts[1]) + ", test " + std::to_string(counts[2]) + ")\nnoise sentences " +
         std::to_string(corpus.noise_sentences) + "\n" + corpus.type_table();
}

std::string cmd_bootstrap(const RunConfig& cfg, const CommandPaths& paths) {
  const BootstrapConfig bc = cfg.bootstrap();
  const Input corpus_in = load("corpus", paths.corpus);
  Input splits_in;
  std::map<std::string, Split> splits;
  if (!paths.splits.empty()) splits = load_splits(paths.splits, splits_in);

  std::vector<TextPair> pairs;
  for (const auto& raw : read_corpus(corpus_in.text)) {
    if (!splits.empty() && split_of(splits, raw.id) == Split::Test) continue;
    pairs.push_back(to_text(raw));
  }
  const SeedExtractor extractor;
  const auto result = bootstrap(pairs, extractor, default_stopwords(), bc);
  const std::string report = result.report.stage_table() + "\n" + result.report.type_table();
  if (result.instances.empty()) throw DataError("bootstrap produced no instances\n" + report);

  std::vector<const Input*> inputs{&corpus_in};
  if (!paths.splits.empty()) inputs.push_back(&splits_in);
  write_out(paths.out, write_instances(result.instances, header("bootstrap", cfg.echo({"bootstrap"}), inputs)));
  return report;
}

std::string cmd_train(const RunConfig& cfg, const CommandPaths& paths, const TrainLogger& log) {
  const TrainConfig tc = cfg.train();
  const Input corpus_in = load("corpus", paths.corpus);
  const Input inst_in = load("instances", paths.instances);
  Input splits_in;
  const auto splits = load_splits(paths.splits, splits_in);

  std::map<std::string, TextPair> by_id;
  std::vector<Tokens> vocab_texts;
  for (const auto& raw : read_corpus(corpus_in.text)) {
    auto tp = to_text(raw);
    if (split_of(splits, tp.id) == Split::Train) {
      vocab_texts.push_back(tp.question);
      vocab_texts.push_back(tp.answer);
    }
    by_id.emplace(tp.id, std::move(tp));
  }
  const Vocabulary vocab = Vocabulary::build(vocab_texts, cfg.count("vocab.max_size"));

  std::vector<TrainingInstance> train_set, dev_set;
  for (const auto& bi : read_instances(inst_in.text)) {
    const auto it = by_id.find(bi.pair_id);
    if (it == by_id.end()) throw DataError("instance refers to unknown pair " + bi.pair_id);
    const Split s = split_of(splits, bi.pair_id);
    if (s == Split::Test) throw DataError("instance file contains test pair " + bi.pair_id);
    (s == Split::Train ? train_set : dev_set).push_back(make_training_instance(vocab, it->second, bi.target, bi.type));
  }
  if (train_set.empty()) throw DataError("no training instances in the train split");

  Model model = Model::create(cfg.model(vocab.size()), cfg.seed());
  auto result = train(std::move(model), vocab, train_set, dev_set, tc, log);
  result.best.config_echo =
      header("train", cfg.echo({"model", "train", "vocab"}), {&corpus_in, &splits_in, &inst_in});
  write_out(paths.out, serialize_checkpoint(result.best));

  std::string rep = "vocabulary " + std::to_string(vocab.size()) + "\ntrain instances " +
                    std::to_string(train_set.size()) + "\ndev instances " + std::to_string(dev_set.size()) +
                    "\nparameters " + std::to_string(result.best.model.params.scalar_count()) + "\n";
  rep += "initial dev loss " + io::format_fixed(result.initial_dev_loss, 6) + "\n";
  rep += "best dev loss " + io::format_fixed(result.best.dev_loss_history.empty()
                                                  ? result.initial_dev_loss
                                                  : *std::min_element(result.best.dev_loss_history.begin(),
                                                                      result.best.dev_loss_history.end()),
                                              6) +
         " at step " + std::to_string(result.best.step) + "\n";
  rep += "lr decays " + std::to_string(result.decays) + ", final lr " + io::format_double(result.final_lr) + "\n";
  rep += "parameter hash " + io::hex64(parameter_hash(result.best.model)) + "\n";
  if (result.status == TrainStatus::Diverged) {
    throw NumericError("training diverged; last good checkpoint written to " + paths.out + "\n" + rep);
  }
  return rep;
}

std::string cmd_ke_train(const RunConfig& cfg, const CommandPaths& paths) {
  const KEConfig kc = cfg.ke();
  const Input gold_in = load("gold", paths.gold);
  Input splits_in;
  std::map<std::string, Split> splits;
  if (!paths.splits.empty()) splits = load_splits(paths.splits, splits_in);
  std::vector<Triple> tuples;
  for (const auto& [id, ts] : read_tuples(gold_in.text)) {
    if (!splits.empty() && split_of(splits, id) != Split::Train) continue;
    tuples.insert(tuples.end(), ts.begin(), ts.end());
  }
  if (tuples.empty()) throw DataError("no tuples to train the knowledge embedding on");
  const auto result = train_transe(tuples, kc);
  write_out(paths.out, result.store.serialize());
  return "tuples " + std::to_string(tuples.size()) + "\narguments " +
         std::to_string(result.store.count(PhraseKind::Argument)) + "\nrelations " +
         std::to_string(result.store.count(PhraseKind::Relation)) + "\nloss " +
         io::format_fixed(result.loss_history.front(), 6) + " -> " + io::format_fixed(result.loss_history.back(), 6) +
         "\nrejected epochs " + std::to_string(result.rejected_epochs) + "\n";
}

std::string cmd_extract(const RunConfig& cfg, const CommandPaths& paths) {
  DecodeConfig dc = cfg.decode();
  const std::size_t workers = std::max<std::size_t>(1, cfg.count("extract.workers"));
  const Input model_in = load("model", paths.model);
  const Input corpus_in = load("corpus", paths.corpus);
  const Checkpoint ckpt = parse_checkpoint(model_in.text);

  std::optional<Split> only = split_option(cfg, "extract.split");
  Input splits_in;
  std::map<std::string, Split> splits;
  if (!paths.splits.empty()) splits = load_splits(paths.splits, splits_in);
  if (splits.empty()) only.reset();
  const std::string split_label = only ? std::string(split_name(*only)) : "all";

  // gamma = 0 and a missing store are the same run.
  std::optional<KEStore> store;
  Input store_in;
  if (paths.ke_store.empty()) dc.gamma = 0.0;
  if (dc.gamma != 0.0) {
    store_in = load("ke_store", paths.ke_store);
    store = KEStore::parse(store_in.text);
  }

  std::vector<QAPair> pairs;
  for (const auto& raw : read_corpus(corpus_in.text)) {
    if (only && split_of(splits, raw.id) != *only) continue;
    pairs.push_back(encode_pair(ckpt.vocab, to_text(raw)));
  }
  std::sort(pairs.begin(), pairs.end(), [](const QAPair& a, const QAPair& b) { return a.id < b.id; });

  std::vector<std::optional<ExtractionRow>> rows(pairs.size());
  std::vector<std::exception_ptr> errors(pairs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < pairs.size(); i = next++) {
      try {
        const auto x = decode(ckpt.model, ckpt.vocab, pairs[i], store ? &*store : nullptr, dc);
        ExtractionRow r{pairs[i].id, x.triple, x.log_prob, std::nullopt};
        if (x.relevance_used) r.relevance = x.relevance;
        rows[i] = std::move(r);
      } catch (const NoExtraction&) {
        // counted as a missing prediction
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < std::min(workers, pairs.size()); ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<ExtractionRow> out;
  for (auto& r : rows) {
    if (r) out.push_back(std::move(*r));
  }
  std::string echo = cfg.echo({"decode"});
  if (dc.gamma == 0.0) {
    // the store plays no part, so the header must not depend on it either
    const auto pos = echo.find("# decode.gamma = ");
    echo.replace(pos, echo.find('\n', pos) - pos, "# decode.gamma = 0");
    echo += "# ke_store = none\n";
  }
  echo += "# extract.split = " + split_label + "\n";
  std::vector<const Input*> inputs{&model_in, &corpus_in};
  if (!splits.empty()) inputs.push_back(&splits_in);
  if (store) inputs.push_back(&store_in);
  std::string h = header("extract", echo, inputs);
  h += "# extracted " + std::to_string(out.size()) + " of " + std::to_string(pairs.size()) + "\n";
  write_out(paths.out, write_extractions(out, h));
  return "pairs " + std::to_string(pairs.size()) + "\nextracted " + std::to_string(out.size()) + "\n";
}

std::string cmd_eval(const RunConfig& cfg, const CommandPaths& paths) {
  if (paths.predictions.empty()) throw ConfigError("eval needs at least one prediction file");
  const Input gold_in = load("gold", paths.gold);
  std::optional<Split> only = split_option(cfg, "eval.split");
  Input splits_in;
  std::map<std::string, Split> splits;
  if (!paths.splits.empty()) splits = load_splits(paths.splits, splits_in);
  if (splits.empty()) only.reset();

  GoldSet gold;
  for (auto& [id, ts] : read_tuples(gold_in.text)) {
    if (only && split_of(splits, id) != *only) continue;
    gold.emplace(id, std::move(ts));
  }
  if (gold.empty()) throw DataError("no gold tuples in the evaluated split");

  std::vector<PredictionSet> systems;
  for (const auto& [name, path] : paths.predictions) {
    systems.push_back(to_prediction_set(name, read_extractions(load("predictions", path).text)));
  }
  const auto scores = score_systems(systems, gold, paths.baseline);
  std::string text = report_text(scores, gold.size(), paths.baseline);

  if (!paths.corpus.empty()) {
    const Input corpus_in = load("corpus", paths.corpus);
    std::map<std::string, std::size_t> lengths;
    for (const auto& raw : read_corpus(corpus_in.text)) {
      lengths[raw.id] = tokenize(raw.question).size() + tokenize(raw.answer).size();
    }
    for (const auto& s : systems) {
      text += "\nlength buckets: " + s.system + "\n" +
              bucket_table(length_buckets(s, gold, lengths, cfg.count("eval.buckets")));
    }
  }
  if (!paths.out.empty()) write_out(paths.out, report_tsv(scores));
  return text;
}

}  // namespace neuron
