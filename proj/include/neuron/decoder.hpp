#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "neuron/grammar.hpp"
#include "neuron/model.hpp"
#include "neuron/relevance.hpp"
#include "neuron/text.hpp"

namespace neuron {

struct DecodeConfig {
  std::size_t beam_width = 10;
  // Complete sequences kept for re-ranking.
  std::size_t pool_size = 500;
  // Tokens including </S>; the shortest tuple needs 10.
  std::size_t max_length = 64;
  double gamma = 0.05;

  void validate() const;
};

struct StepDistribution {
  Vec probs;
  DecoderState<EagerOps> state;
};

// Unmasked next-token distribution and the advanced decoder state.
StepDistribution step_distribution(const Model& model, const Encoded<EagerOps>& enc, TokenId prev,
                                   const DecoderState<EagerOps>& state);

// Position i becomes -inf iff v_mask[i] == 0 or r_mask[i] == 0. Throws
// NoValidContinuation when nothing survives.
Vec apply_masks(std::span<const double> logits, std::span<const std::uint8_t> v_mask,
                std::span<const std::uint8_t> r_mask);

struct Candidate {
  TaggedSequence sequence;
  double log_prob = 0.0;
};

// Constrained beam search. Keeps the beam_width best partial hypotheses per
// step; a hypothesis that emits </S> leaves the beam for the complete set.
// Returns at most pool_size complete sequences, best log-probability first,
// ties broken by the lexicographically smaller token sequence. Throws
// NoExtraction when nothing completes within max_length.
std::vector<Candidate> beam_search(const Model& model, const Vocabulary& vocab, const QAPair& pair,
                                   const DecodeConfig& cfg);

struct RankedCandidate {
  std::size_t index = 0;  // into the candidate list
  double log_prob = 0.0;
  double relevance = 0.0;
  double score = 0.0;
};

// Orders candidates by log_prob + gamma * R with R = relevance_logscore.
// With no model or gamma == 0 the relevance is not computed and the input
// order is kept.
std::vector<RankedCandidate> rerank(std::span<const Candidate> candidates, const Vocabulary& vocab,
                                    const PlausibilityModel* plausibility, double gamma);

struct Extraction {
  Triple triple;
  TaggedSequence sequence;
  double log_prob = 0.0;
  double relevance = 0.0;
  bool relevance_used = false;
  // 1-based rank by log-probability of the returned sequence.
  std::size_t rank_before = 1;
  std::size_t rank_after = 1;
  std::size_t candidates = 0;
};

Extraction decode(const Model& model, const Vocabulary& vocab, const QAPair& pair,
                  const PlausibilityModel* plausibility, const DecodeConfig& cfg);

}  // namespace neuron
