#pragma once

#include <string>
#include <utility>
#include <vector>

#include "neuron/config.hpp"
#include "neuron/train.hpp"

namespace neuron {

// File locations for the pipeline commands. Unused fields stay empty.
struct CommandPaths {
  std::string corpus;
  std::string splits;
  std::string gold;
  std::string instances;
  std::string model;
  std::string ke_store;
  std::string out;
  // (system name, extraction file) for eval.
  std::vector<std::pair<std::string, std::string>> predictions;
  std::string baseline;
};

// Each command reads and writes files and returns a human-readable report.
// Errors surface as ConfigError, DataError or NumericError.

// Writes corpus.tsv, gold.tsv and splits.tsv into paths.out (a directory).
std::string cmd_synth(const RunConfig& cfg, const CommandPaths& paths);

// Bootstraps instances from the train and dev pairs of the corpus.
std::string cmd_bootstrap(const RunConfig& cfg, const CommandPaths& paths);

// Vocabulary from train pairs; trains on train-split instances with the dev
// split for the plateau check; writes the best checkpoint to paths.out.
std::string cmd_train(const RunConfig& cfg, const CommandPaths& paths, const TrainLogger& log = nullptr);

// TransE store from the train-split tuples of paths.gold.
std::string cmd_ke_train(const RunConfig& cfg, const CommandPaths& paths);

// Decodes the pairs of extract.split. The store is consulted only when
// paths.ke_store is set and decode.gamma != 0.
std::string cmd_extract(const RunConfig& cfg, const CommandPaths& paths);

// Scores extraction files against the eval.split gold tuples.
std::string cmd_eval(const RunConfig& cfg, const CommandPaths& paths);

}  // namespace neuron
