#pragma once

// Straight-line reference computations used as test oracles. They share no
// code with the library beyond plain containers.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "neuron/model.hpp"
#include "neuron/nn.hpp"
#include "neuron/text.hpp"

namespace oracle {

struct State {
  std::vector<double> h;
  std::vector<double> c;
};

inline double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Gate blocks stacked input, forget, output, candidate.
inline State lstm(const neuron::Matrix& wx, const neuron::Matrix& wh, const std::vector<double>& b,
                  const std::vector<double>& x, const std::vector<double>& h, const std::vector<double>& c) {
  const std::size_t H = h.size();
  auto pre = [&](std::size_t row) {
    double s = b[row];
    for (std::size_t j = 0; j < x.size(); ++j) s += wx(row, j) * x[j];
    for (std::size_t j = 0; j < H; ++j) s += wh(row, j) * h[j];
    return s;
  };
  State out{std::vector<double>(H), std::vector<double>(H)};
  for (std::size_t k = 0; k < H; ++k) {
    const double i = sig(pre(k));
    const double f = sig(pre(H + k));
    const double o = sig(pre(2 * H + k));
    const double g = std::tanh(pre(3 * H + k));
    out.c[k] = f * c[k] + i * g;
    out.h[k] = o * std::tanh(out.c[k]);
  }
  return out;
}

inline std::vector<double> matvec(const neuron::Matrix& w, const std::vector<double>& x) {
  std::vector<double> y(w.rows, 0.0);
  for (std::size_t r = 0; r < w.rows; ++r) {
    for (std::size_t j = 0; j < w.cols; ++j) y[r] += w(r, j) * x[j];
  }
  return y;
}

inline std::vector<double> softmax(const std::vector<double>& z) {
  double m = -INFINITY;
  for (double v : z) m = std::max(m, v);
  std::vector<double> p(z.size());
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::isinf(z[i]) && z[i] < 0 ? 0.0 : std::exp(z[i] - m);
    s += p[i];
  }
  for (auto& v : p) v /= s;
  return p;
}

// Additive attention: e_i = v . tanh(Wq s + Wk h_i).
inline std::pair<std::vector<double>, std::vector<double>> attention(const neuron::Matrix& wq, const neuron::Matrix& wk,
                                                                     const neuron::Matrix& v,
                                                                     const std::vector<double>& s,
                                                                     const std::vector<std::vector<double>>& hs) {
  const auto q = matvec(wq, s);
  std::vector<double> e;
  for (const auto& h : hs) {
    const auto k = matvec(wk, h);
    double score = 0.0;
    for (std::size_t a = 0; a < q.size(); ++a) score += v.data[a] * std::tanh(q[a] + k[a]);
    e.push_back(score);
  }
  const auto alpha = softmax(e);
  std::vector<double> ctx(hs[0].size(), 0.0);
  for (std::size_t i = 0; i < hs.size(); ++i) {
    for (std::size_t d = 0; d < ctx.size(); ++d) ctx[d] += alpha[i] * hs[i][d];
  }
  return {ctx, alpha};
}

// Exhaustive search over every tuple sequence of at most max_len tokens whose
// words come from the pair, scored with masked log-softmax of the model's
// logits. The grammar is spelled out here as a token-class pattern rather
// than taken from the library automaton.
struct Best {
  std::vector<neuron::TokenId> tokens;
  double log_prob = -INFINITY;
  std::size_t sequences = 0;
};

namespace detail {

// Phase p in 0..9: 0 expects <arg1>; 1,4,7 expect the first word of a span;
// 2,5,8 are inside a span; 3,6 expect the next opening tag; 9 expects </S>.
inline std::vector<neuron::TokenId> legal(int phase, const std::vector<neuron::TokenId>& words,
                                          const neuron::Vocabulary& v) {
  using neuron::Tag;
  switch (phase) {
    case 0: return {v.tag_id(Tag::Arg1Open)};
    case 1: case 4: case 7: return words;
    case 2: case 5: case 8: {
      auto out = words;
      out.push_back(v.tag_id(phase == 2 ? Tag::Arg1Close : phase == 5 ? Tag::RelClose : Tag::Arg2Close));
      return out;
    }
    case 3: return {v.tag_id(Tag::RelOpen)};
    case 6: return {v.tag_id(Tag::Arg2Open)};
    default: return {v.end_id()};
  }
}

inline int next_phase(int phase, bool is_word) {
  if (phase == 1 || phase == 4 || phase == 7) return phase + 1;
  if (phase == 2 || phase == 5 || phase == 8) return is_word ? phase : phase + 1;
  return phase + 1;  // tags at 0, 3, 6, 9 (9 -> 10 = done)
}

inline bool better(double lp, const std::vector<neuron::TokenId>& t, const Best& b) {
  if (lp != b.log_prob) return lp > b.log_prob;
  return t < b.tokens;
}

inline void search(const neuron::Model& m, const neuron::Encoded<neuron::EagerOps>& enc,
                   const neuron::DecoderState<neuron::EagerOps>& state, int phase, std::vector<neuron::TokenId>& prefix,
                   double lp, const std::vector<neuron::TokenId>& words, const neuron::Vocabulary& v,
                   std::size_t max_len, Best& best) {
  if (phase == 10) {
    ++best.sequences;
    if (better(lp, prefix, best)) {
      best.log_prob = lp;
      best.tokens = prefix;
    }
    return;
  }
  // phase p needs at least 10 - p more tokens; such prefixes cannot complete
  if (prefix.size() + static_cast<std::size_t>(10 - phase) > max_len) return;
  neuron::EagerOps ops(m.params);
  const neuron::TokenId prev = prefix.empty() ? v.end_id() : prefix.back();
  auto out = neuron::decoder_step(ops, m, enc, prev, state);
  const auto allowed = legal(phase, words, v);
  double mx = -INFINITY;
  for (auto t : allowed) mx = std::max(mx, out.logits[static_cast<std::size_t>(t)]);
  double z = 0.0;
  for (auto t : allowed) z += std::exp(out.logits[static_cast<std::size_t>(t)] - mx);
  const double lse = mx + std::log(z);
  for (auto t : allowed) {
    const bool is_word = !v.is_tag(t);
    prefix.push_back(t);
    search(m, enc, out.state, next_phase(phase, is_word), prefix, lp + out.logits[static_cast<std::size_t>(t)] - lse,
           words, v, max_len, best);
    prefix.pop_back();
  }
}

}  // namespace detail

inline Best exhaustive_argmax(const neuron::Model& m, const neuron::Vocabulary& v, const neuron::QAPair& pair,
                              std::size_t max_len) {
  std::vector<neuron::TokenId> words;
  for (const auto* side : {&pair.q_tokens, &pair.a_tokens}) {
    for (auto t : *side) {
      if (!v.is_tag(t) && std::find(words.begin(), words.end(), t) == words.end()) words.push_back(t);
    }
  }
  std::sort(words.begin(), words.end());
  neuron::EagerOps ops(m.params);
  const auto enc = neuron::encode(ops, m, pair);
  Best best;
  std::vector<neuron::TokenId> prefix;
  detail::search(m, enc, neuron::initial_state(ops, m, enc), 0, prefix, 0.0, words, v, max_len, best);
  return best;
}

// 50 true tuples: ten relations, each linking five heads to one of two
// relation-specific tails.
inline std::vector<neuron::Triple> toy_kb() {
  std::vector<neuron::Triple> kb;
  for (int r = 0; r < 10; ++r) {
    for (int i = 0; i < 5; ++i) {
      kb.push_back({{"head" + std::to_string(r) + "_" + std::to_string(i)},
                    {"rel" + std::to_string(r)},
                    {"tail" + std::to_string(r) + "_" + std::to_string(i % 2)}});
    }
  }
  return kb;
}

}  // namespace oracle
