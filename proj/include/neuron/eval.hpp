#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "neuron/text.hpp"

namespace neuron {

// At most one predicted tuple per pair id; absent ids are missing predictions.
struct PredictionSet {
  std::string system;
  std::map<std::string, Triple> predictions;
};

// Pair id -> acceptable tuples. Its keys define the evaluated pair set.
using GoldSet = std::map<std::string, std::vector<Triple>>;

// Lowercase, collapse whitespace, strip leading and trailing punctuation.
std::string normalize_span(std::span<const std::string> tokens);

bool tuple_match(const Triple& pred, std::span<const Triple> golds);

// Ids of gold pairs whose prediction matches.
std::set<std::string> true_positives(const PredictionSet& preds, const GoldSet& gold);

// Correct / evaluated pairs. Throws DataError for an empty gold set.
double precision(const PredictionSet& preds, const GoldSet& gold);

// nullopt when no system has a correct prediction.
std::map<std::string, std::optional<double>> pooled_recall(std::span<const PredictionSet> systems,
                                                           const GoldSet& gold);

// |TP_n \ TP_b| / |TP_n u TP_b|; nullopt when both are empty.
std::optional<double> relative_coverage(const std::set<std::string>& tp_n, const std::set<std::string>& tp_b);
std::optional<double> relative_coverage(const PredictionSet& n, const PredictionSet& b, const GoldSet& gold);

struct LengthBucket {
  std::size_t min_length = 0;
  std::size_t max_length = 0;
  std::size_t pairs = 0;
  std::size_t correct = 0;
  double precision = 0.0;
};

// Gold pairs sorted by q+a length (ties by id) and cut into `buckets`
// equal-count groups; empty groups are omitted. Pairs missing from
// `lengths` count as length 0.
std::vector<LengthBucket> length_buckets(const PredictionSet& preds, const GoldSet& gold,
                                         const std::map<std::string, std::size_t>& lengths,
                                         std::size_t buckets = 10);
std::string bucket_table(std::span<const LengthBucket> rows);

struct SystemScore {
  std::string system;
  std::size_t correct = 0;
  double precision = 0.0;
  std::optional<double> recall;
  std::optional<double> rc_vs_baseline;
};

// RC is filled against `baseline` when it names one of the systems.
std::vector<SystemScore> score_systems(std::span<const PredictionSet> systems, const GoldSet& gold,
                                       const std::string& baseline = "");

// Undefined values print as NA.
std::string report_text(std::span<const SystemScore> scores, std::size_t pairs, const std::string& baseline);
std::string report_tsv(std::span<const SystemScore> scores);

}  // namespace neuron
