#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "neuron/errors.hpp"
#include "neuron/pipeline.hpp"

namespace {

struct Common {
  std::string config_file;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_file, "key = value configuration file");
  cmd->add_option("--set", c.overrides, "override one key, e.g. --set train.max_steps=200")->take_all();
}

neuron::RunConfig resolve(const Common& c) {
  neuron::RunConfig cfg;
  if (!c.config_file.empty()) cfg.load_file(c.config_file);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw neuron::ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tuple extraction from question-answer pairs"};
  app.require_subcommand(1);

  Common common;
  neuron::CommandPaths paths;
  std::string gamma;
  std::string workers;
  std::vector<std::string> predictions;
  bool quiet = false;

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus with gold tuples and splits");
  add_common(synth, common);
  synth->add_option("--out", paths.out, "output directory")->required();

  auto* boot = app.add_subcommand("bootstrap", "seed-extract, filter and retrieve training instances");
  add_common(boot, common);
  boot->add_option("--corpus", paths.corpus, "corpus TSV")->required();
  boot->add_option("--splits", paths.splits, "split manifest; test pairs are skipped");
  boot->add_option("--out", paths.out, "instance TSV to write")->required();

  auto* tr = app.add_subcommand("train", "train the extraction model");
  add_common(tr, common);
  tr->add_option("--corpus", paths.corpus, "corpus TSV")->required();
  tr->add_option("--splits", paths.splits, "split manifest")->required();
  tr->add_option("--instances", paths.instances, "instance TSV from bootstrap")->required();
  tr->add_option("--out", paths.out, "checkpoint to write")->required();
  tr->add_flag("--quiet", quiet, "suppress progress lines");

  auto* ke = app.add_subcommand("ke-train", "train TransE embeddings on gold tuples");
  add_common(ke, common);
  ke->add_option("--tuples", paths.gold, "tuple TSV")->required();
  ke->add_option("--splits", paths.splits, "split manifest; only train tuples are used");
  ke->add_option("--out", paths.out, "store to write")->required();

  auto* ex = app.add_subcommand("extract", "decode one tuple per pair");
  add_common(ex, common);
  ex->add_option("--model", paths.model, "checkpoint")->required();
  ex->add_option("--corpus", paths.corpus, "corpus TSV")->required();
  ex->add_option("--splits", paths.splits, "split manifest; extract.split selects the pairs");
  ex->add_option("--ke-store", paths.ke_store, "knowledge-embedding store for re-ranking");
  ex->add_option("--gamma", gamma, "relevance weight (default 0.05)");
  ex->add_option("--workers", workers, "decoding threads");
  ex->add_option("--out", paths.out, "extraction TSV to write")->required();

  auto* ev = app.add_subcommand("eval", "score extraction files against gold tuples");
  add_common(ev, common);
  ev->add_option("--gold", paths.gold, "gold tuple TSV")->required();
  ev->add_option("--predictions", predictions, "NAME=FILE, repeatable")->required()->take_all();
  ev->add_option("--baseline", paths.baseline, "system used as the relative-coverage baseline");
  ev->add_option("--splits", paths.splits, "split manifest; eval.split selects the pairs");
  ev->add_option("--corpus", paths.corpus, "corpus TSV, enables length buckets");
  ev->add_option("--out", paths.out, "TSV report to write");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    neuron::RunConfig cfg = resolve(common);
    if (!gamma.empty()) cfg.set("decode.gamma", gamma);
    if (!workers.empty()) cfg.set("extract.workers", workers);
    std::string report;
    if (*synth) {
      report = neuron::cmd_synth(cfg, paths);
    } else if (*boot) {
      report = neuron::cmd_bootstrap(cfg, paths);
    } else if (*tr) {
      neuron::TrainLogger log;
      if (!quiet) log = [](const std::string& line) { std::cerr << line << '\n'; };
      report = neuron::cmd_train(cfg, paths, log);
    } else if (*ke) {
      report = neuron::cmd_ke_train(cfg, paths);
    } else if (*ex) {
      report = neuron::cmd_extract(cfg, paths);
    } else if (*ev) {
      for (const auto& p : predictions) {
        const auto eq = p.find('=');
        if (eq == std::string::npos || eq == 0) throw neuron::ConfigError("--predictions expects NAME=FILE");
        paths.predictions.emplace_back(p.substr(0, eq), p.substr(eq + 1));
      }
      report = neuron::cmd_eval(cfg, paths);
    }
    std::cout << report;
    return 0;
  } catch (const neuron::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const neuron::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const neuron::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
