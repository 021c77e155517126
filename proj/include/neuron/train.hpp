#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "neuron/bootstrap.hpp"
#include "neuron/model.hpp"
#include "neuron/text.hpp"

namespace neuron {

struct TrainingInstance {
  QAPair pair;
  TaggedSequence target;
  InstanceType type = InstanceType::Joint;
};

// Encodes a bootstrapped instance. Throws DataError if the target does not
// parse or uses a token absent from the pair.
TrainingInstance make_training_instance(const Vocabulary& vocab, const TextPair& pair, const Triple& target,
                                        InstanceType type);

// Teacher-forced -log P(y | q, a) under the vocabulary and grammar masks.
double sequence_nll(const Model& model, const Vocabulary& vocab, const TrainingInstance& instance);

// Same loss recorded on a tape; accumulates d(loss)/d(params) into the
// model's grad buffers and returns the loss. dropout_rng == nullptr turns
// dropout off.
double sequence_nll_backward(Model& model, const Vocabulary& vocab, const TrainingInstance& instance,
                             Rng* dropout_rng = nullptr, double dropout_rate = 0.0);

struct TrainConfig {
  double learning_rate = 1.0;
  double decay = 0.7;
  double dropout = 0.3;
  std::size_t batch_size = 64;
  std::size_t max_steps = 1500;
  std::size_t eval_every = 200;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Checkpoint {
  static constexpr int kFormatVersion = 1;

  Model model;
  Vocabulary vocab;
  std::size_t step = 0;
  std::vector<double> dev_loss_history;
  // Resolved configuration of the run that produced this checkpoint.
  std::string config_echo;
};

enum class TrainStatus { Completed, Diverged };

struct TrainResult {
  // Parameters with the best dev loss seen.
  Checkpoint best;
  TrainStatus status = TrainStatus::Completed;
  double final_lr = 0.0;
  std::size_t decays = 0;
  std::vector<double> train_loss_history;  // mean batch loss per eval window
  double initial_dev_loss = 0.0;
};

using TrainLogger = std::function<void(const std::string&)>;

// Minibatch SGD with teacher forcing. Every eval_every steps the mean dev
// loss is computed; the learning rate is multiplied by `decay` whenever it
// fails to improve on the best so far, and the best parameters are kept.
// A non-finite loss or gradient stops training with status Diverged and the
// last good checkpoint.
TrainResult train(Model init, const Vocabulary& vocab, std::span<const TrainingInstance> train_set,
                  std::span<const TrainingInstance> dev_set, const TrainConfig& cfg,
                  const TrainLogger& log = nullptr);

double mean_loss(const Model& model, const Vocabulary& vocab, std::span<const TrainingInstance> set);

// Text container: a JSON header line, a vocabulary block, one base64 block
// per parameter, and an END line carrying a checksum of everything before it.
std::string serialize_checkpoint(const Checkpoint& c);
Checkpoint parse_checkpoint(std::string_view text);
void save_checkpoint(const Checkpoint& c, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// FNV-1a over every parameter's bytes; equal hashes mean identical weights.
std::uint64_t parameter_hash(const Model& model);

}  // namespace neuron
