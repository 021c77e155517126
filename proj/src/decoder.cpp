#include "neuron/decoder.hpp"

#include <algorithm>
#include <cmath>

#include "neuron/errors.hpp"

namespace neuron {

void DecodeConfig::validate() const {
  if (beam_width < 1) throw ConfigError("decode.beam must be at least 1");
  if (pool_size < 1) throw ConfigError("decode.pool must be at least 1");
  if (max_length < 10) throw ConfigError("decode.max_length must be at least 10");
  if (!std::isfinite(gamma)) throw ConfigError("decode.gamma must be finite");
}

StepDistribution step_distribution(const Model& model, const Encoded<EagerOps>& enc, TokenId prev,
                                   const DecoderState<EagerOps>& state) {
  EagerOps ops(model.params);
  auto out = decoder_step(ops, model, enc, prev, state);
  return {softmax(out.logits), std::move(out.state)};
}

Vec apply_masks(std::span<const double> logits, std::span<const std::uint8_t> v_mask,
                std::span<const std::uint8_t> r_mask) {
  if (logits.size() != v_mask.size() || logits.size() != r_mask.size()) {
    throw DimensionError("apply_masks: length mismatch");
  }
  Vec out(logits.begin(), logits.end());
  bool any = false;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!v_mask[i] || !r_mask[i]) {
      out[i] = kNegInf;
    } else {
      any = true;
    }
  }
  if (!any) throw NoValidContinuation("every token is masked");
  return out;
}

namespace {

struct Hypothesis {
  std::vector<TokenId> tokens;
  double log_prob = 0.0;
  GrammarState fsm = GrammarState::Start;
  DecoderState<EagerOps> dec;
};

struct Extension {
  std::size_t parent;
  TokenId token;
  double log_prob;
};

}  // namespace

std::vector<Candidate> beam_search(const Model& model, const Vocabulary& vocab, const QAPair& pair,
                                   const DecodeConfig& cfg) {
  cfg.validate();
  if (model.config.vocab_size != vocab.size()) throw DimensionError("beam_search: model and vocabulary disagree");
  EagerOps ops(model.params);
  const auto enc = encode(ops, model, pair);
  const auto v_mask = input_mask(vocab, pair);
  const GrammarMasks grammar(vocab);

  std::vector<Hypothesis> beam(1);
  beam[0].dec = initial_state(ops, model, enc);
  std::vector<Candidate> complete;

  for (std::size_t step = 0; step < cfg.max_length && !beam.empty(); ++step) {
    std::vector<Extension> ext;
    std::vector<DecoderState<EagerOps>> next_states(beam.size());
    for (std::size_t hi = 0; hi < beam.size(); ++hi) {
      const Hypothesis& h = beam[hi];
      const TokenId prev = h.tokens.empty() ? vocab.end_id() : h.tokens.back();
      auto out = decoder_step(ops, model, enc, prev, h.dec);
      const Vec logp = log_softmax(apply_masks(out.logits, v_mask, grammar[h.fsm]));
      next_states[hi] = std::move(out.state);
      for (std::size_t i = 0; i < logp.size(); ++i) {
        if (logp[i] == kNegInf) continue;
        // partials that can no longer close within max_length never take a beam slot
        const GrammarState to = *transition(h.fsm, static_cast<TokenId>(i), vocab);
        if (h.tokens.size() + 1 + tokens_to_finish(to) > cfg.max_length) continue;
        ext.push_back({hi, static_cast<TokenId>(i), h.log_prob + logp[i]});
      }
    }

    auto better = [&](const Extension& a, const Extension& b) {
      if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
      if (a.parent != b.parent) {
        const auto& ta = beam[a.parent].tokens;
        const auto& tb = beam[b.parent].tokens;
        if (ta != tb) return ta < tb;
      }
      return a.token < b.token;
    };
    const std::size_t keep = std::min(cfg.beam_width, ext.size());
    std::partial_sort(ext.begin(), ext.begin() + static_cast<std::ptrdiff_t>(keep), ext.end(), better);

    std::vector<Hypothesis> next;
    next.reserve(keep);
    for (std::size_t e = 0; e < keep; ++e) {
      const Extension& x = ext[e];
      const Hypothesis& parent = beam[x.parent];
      const GrammarState fsm = *transition(parent.fsm, x.token, vocab);
      std::vector<TokenId> tokens = parent.tokens;
      tokens.push_back(x.token);
      if (fsm == GrammarState::Done) {
        complete.push_back({TaggedSequence{std::move(tokens)}, x.log_prob});
        continue;
      }
      Hypothesis h;
      h.tokens = std::move(tokens);
      h.log_prob = x.log_prob;
      h.fsm = fsm;
      h.dec = next_states[x.parent];
      next.push_back(std::move(h));
    }
    beam = std::move(next);
  }

  if (complete.empty()) throw NoExtraction("beam search produced no complete sequence for pair " + pair.id);
  std::sort(complete.begin(), complete.end(), [](const Candidate& a, const Candidate& b) {
    if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
    return a.sequence.tokens < b.sequence.tokens;
  });
  complete.erase(std::unique(complete.begin(), complete.end(),
                             [](const Candidate& a, const Candidate& b) { return a.sequence.tokens == b.sequence.tokens; }),
                 complete.end());
  if (complete.size() > cfg.pool_size) complete.resize(cfg.pool_size);
  return complete;
}

std::vector<RankedCandidate> rerank(std::span<const Candidate> candidates, const Vocabulary& vocab,
                                    const PlausibilityModel* plausibility, double gamma) {
  std::vector<RankedCandidate> ranked(candidates.size());
  const bool use = plausibility != nullptr && gamma != 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    ranked[i].index = i;
    ranked[i].log_prob = candidates[i].log_prob;
    if (use) ranked[i].relevance = relevance_logscore(*plausibility, delinearize(candidates[i].sequence.tokens, vocab));
    ranked[i].score = ranked[i].log_prob + gamma * ranked[i].relevance;
  }
  if (!use) return ranked;
  std::stable_sort(ranked.begin(), ranked.end(), [&](const RankedCandidate& a, const RankedCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return candidates[a.index].sequence.tokens < candidates[b.index].sequence.tokens;
  });
  return ranked;
}

Extraction decode(const Model& model, const Vocabulary& vocab, const QAPair& pair,
                  const PlausibilityModel* plausibility, const DecodeConfig& cfg) {
  const auto candidates = beam_search(model, vocab, pair, cfg);
  const auto ranked = rerank(candidates, vocab, plausibility, cfg.gamma);
  const RankedCandidate& best = ranked.front();
  Extraction x;
  x.sequence = candidates[best.index].sequence;
  x.triple = delinearize(x.sequence.tokens, vocab);
  x.log_prob = best.log_prob;
  x.relevance = best.relevance;
  x.relevance_used = plausibility != nullptr && cfg.gamma != 0.0;
  x.rank_before = best.index + 1;
  x.rank_after = 1;
  x.candidates = candidates.size();
  return x;
}

}  // namespace neuron
