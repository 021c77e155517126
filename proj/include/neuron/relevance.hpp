#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "neuron/nn.hpp"
#include "neuron/text.hpp"

namespace neuron {

// Anything that can score how implausible a triple is (smaller is better).
// Re-ranking only needs this, so other knowledge-embedding models can be
// slotted in next to TransE.
class PlausibilityModel {
 public:
  virtual ~PlausibilityModel() = default;
  virtual double distance(const Triple& t) const = 0;
};

enum class PhraseKind { Argument, Relation };

// Lowercased, single-spaced surface string; the identity of a KB phrase.
std::string normalize_phrase(std::span<const std::string> tokens);

struct KEConfig {
  std::size_t dim = 32;
  double margin = 1.0;
  double learning_rate = 0.01;
  std::size_t epochs = 200;
  std::size_t negatives = 1;
  std::uint64_t seed = 1;

  void validate() const;
};

struct PhraseLookup {
  Vec vector;
  bool known = false;
  // The store has no phrase of the requested kind; vector is zero.
  bool empty_kind = false;
};

// TransE phrase tables. Argument vectors are kept at unit L2 norm during
// training; the means back out-of-vocabulary lookups.
class KEStore : public PlausibilityModel {
 public:
  static constexpr int kFormatVersion = 1;

  explicit KEStore(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t count(PhraseKind kind) const { return table(kind).names.size(); }
  const std::vector<std::string>& names(PhraseKind kind) const { return table(kind).names; }
  const Vec& vector(PhraseKind kind, std::size_t index) const { return table(kind).vectors.at(index); }
  Vec& mutable_vector(PhraseKind kind, std::size_t index) { return table(kind).vectors.at(index); }
  // Index of a normalized phrase, or SIZE_MAX.
  std::size_t find(PhraseKind kind, const std::string& phrase) const;

  // Inserts or overwrites; returns the index. Means become stale until
  // recompute_means().
  std::size_t set(PhraseKind kind, const std::string& phrase, Vec v);
  void recompute_means();
  const Vec& mean(PhraseKind kind) const { return table(kind).mean; }

  // Exact match on the normalized phrase, else the kind's mean vector.
  PhraseLookup embed_phrase(std::span<const std::string> phrase, PhraseKind kind) const;

  // ||v_arg1 + v_rel - v_arg2||_2
  double distance(const Triple& t) const override;

  // Header "NEURON-KE<TAB>version<TAB>dim<TAB>#args<TAB>#rels", then
  // "A|R<TAB>phrase<TAB>v1,v2,..." lines with round-trip precision.
  std::string serialize() const;
  static KEStore parse(std::string_view text);

 private:
  struct Table {
    std::vector<std::string> names;
    std::vector<Vec> vectors;
    std::unordered_map<std::string, std::size_t> index;
    Vec mean;
  };
  Table& table(PhraseKind k) { return k == PhraseKind::Argument ? args_ : rels_; }
  const Table& table(PhraseKind k) const { return k == PhraseKind::Argument ? args_ : rels_; }

  std::size_t dim_;
  Table args_;
  Table rels_;
};

double ke_distance(const KEStore& store, const Triple& t);

// R = -log(1 + d): zero for an exact translation, negative otherwise.
double relevance_logscore(const PlausibilityModel& model, const Triple& t);

struct TransETrainResult {
  KEStore store;
  // Full-batch margin loss on a fixed negative set; entry 0 is before training.
  std::vector<double> loss_history;
  // Epochs whose update was rolled back because the loss went up.
  std::size_t rejected_epochs = 0;
};

// Margin-ranking TransE trained by SGD. Negatives replace arg1 or arg2 with a
// uniformly drawn known argument. An epoch that raises the full-batch loss
// is rolled back and the step size halved, so the loss history never goes up.
TransETrainResult train_transe(std::span<const Triple> tuples, const KEConfig& cfg);

struct RankReport {
  double mean_rank = 0.0;
  double random_mean_rank = 0.0;
  std::size_t queries = 0;
};

// Filtered tail ranking of every tuple's arg2 among all known arguments.
RankReport filtered_tail_rank(const KEStore& store, std::span<const Triple> tuples);

}  // namespace neuron
