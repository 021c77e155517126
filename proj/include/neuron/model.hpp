#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "neuron/autodiff.hpp"
#include "neuron/errors.hpp"
#include "neuron/nn.hpp"
#include "neuron/text.hpp"

namespace neuron {

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t embedding_dim = 32;
  std::size_t hidden_dim = 32;
  std::size_t attention_dim = 32;
  std::size_t layers = 1;
  bool bidirectional = false;
  double init_scale = 0.1;
};

struct AttentionIds {
  ParamId w_query;  // A x decoder hidden
  ParamId w_key;    // A x encoder state dim
  ParamId v;        // A x 1
};

// All trainable weights of the dual-encoder / attention decoder model.
// Question and answer encoders have their own embedding tables and LSTM
// stacks; the decoder has its own output-side embedding.
struct Model {
  ModelConfig config;
  ParamStore params;

  ParamId q_embed;
  ParamId a_embed;
  ParamId dec_embed;
  // [layer] forward cells and, when bidirectional, backward cells.
  std::vector<LstmCellIds> q_fwd, q_bwd, a_fwd, a_bwd;
  std::vector<LstmCellIds> dec;
  ParamId combiner;  // W_c: H x 2E
  AttentionIds att_q;
  AttentionIds att_a;
  ParamId w_s;  // decoder input projection: emb x (emb + 2E)
  ParamId w_y;  // output projection: V x (H + 2E)

  // Per-timestep encoder state width: H, or 2H when bidirectional.
  std::size_t encoder_state_dim() const { return config.bidirectional ? 2 * config.hidden_dim : config.hidden_dim; }

  // Allocates every parameter and draws uniform(-init_scale, init_scale)
  // weights from the seed. LSTM biases start at zero.
  static Model create(const ModelConfig& config, std::uint64_t seed);

  // Rebuilds the parameter layout for `config` with zero weights; used by
  // checkpoint loading.
  static Model layout(const ModelConfig& config);
};

// Encoder outputs. keys_* cache the attention key projection of every
// encoder state, which does not depend on the decoder step.
template <class Ops>
struct Encoded {
  using Var = typename Ops::Var;
  std::vector<Var> hq;
  std::vector<Var> ha;
  std::vector<Var> keys_q;
  std::vector<Var> keys_a;
  Var h0;
};

template <class Ops>
struct DecoderState {
  using Var = typename Ops::Var;
  std::vector<Var> h;  // per layer
  std::vector<Var> c;
};

template <class Ops>
struct StepOutput {
  using Var = typename Ops::Var;
  Var logits;
  DecoderState<Ops> state;
  Var alpha_q;
  Var alpha_a;
};

template <class Ops>
struct Attended {
  typename Ops::Var context;
  typename Ops::Var alpha;
};

// e_i = v . tanh(W_q s + W_k h_i), alpha = softmax(e), context = sum alpha_i h_i.
template <class Ops>
Attended<Ops> attend(Ops& ops, const AttentionIds& att, const typename Ops::Var& query_state,
                     const std::vector<typename Ops::Var>& keys, const std::vector<typename Ops::Var>& states) {
  using Var = typename Ops::Var;
  if (states.empty()) throw DimensionError("attention over an empty encoder sequence");
  Var query = ops.matvec(att.w_query, query_state);
  std::vector<Var> scores;
  scores.reserve(keys.size());
  for (const auto& key : keys) scores.push_back(ops.dot(att.v, ops.tanh(ops.add(query, key))));
  Var alpha = ops.softmax(ops.stack(scores));
  return {ops.weighted_sum(alpha, states), alpha};
}

namespace detail {

template <class Ops>
std::vector<typename Ops::Var> run_direction(Ops& ops, const LstmCellIds& cell, const std::vector<typename Ops::Var>& xs,
                                             bool reverse) {
  using Var = typename Ops::Var;
  std::vector<Var> out(xs.size());
  Var h = ops.zeros(cell.hidden_dim);
  Var c = ops.zeros(cell.hidden_dim);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const std::size_t t = reverse ? xs.size() - 1 - k : k;
    auto [hn, cn] = ops.lstm(cell, xs[t], h, c);
    h = hn;
    c = cn;
    out[t] = h;
  }
  return out;
}

// Returns top-layer per-timestep states and the summary vector fed to the
// combiner (last forward state, concatenated with the first backward state
// when bidirectional).
template <class Ops>
std::pair<std::vector<typename Ops::Var>, typename Ops::Var> run_stack(Ops& ops, const Model& m, ParamId embed,
                                                                       const std::vector<LstmCellIds>& fwd,
                                                                       const std::vector<LstmCellIds>& bwd,
                                                                       const std::vector<TokenId>& tokens) {
  using Var = typename Ops::Var;
  std::vector<Var> xs;
  xs.reserve(tokens.size());
  for (TokenId t : tokens) xs.push_back(ops.dropout(ops.embed(embed, t)));

  std::vector<Var> f, b;
  for (std::size_t layer = 0; layer < fwd.size(); ++layer) {
    if (layer > 0) {
      for (auto& x : xs) x = ops.dropout(x);
    }
    f = run_direction(ops, fwd[layer], xs, false);
    if (m.config.bidirectional) {
      b = run_direction(ops, bwd[layer], xs, true);
      for (std::size_t t = 0; t < xs.size(); ++t) {
        const Var parts[] = {f[t], b[t]};
        xs[t] = ops.concat(parts);
      }
    } else {
      xs = f;
    }
  }
  Var summary = xs.back();
  if (m.config.bidirectional) {
    const Var parts[] = {f.back(), b.front()};
    summary = ops.concat(parts);
  }
  return {std::move(xs), summary};
}

}  // namespace detail

// Runs both encoders and the combiner h0 = tanh(W_c [q_summary ; a_summary]).
template <class Ops>
Encoded<Ops> encode(Ops& ops, const Model& m, const QAPair& pair) {
  using Var = typename Ops::Var;
  if (pair.q_tokens.empty() || pair.a_tokens.empty()) throw DataError("encode: empty question or answer");
  Encoded<Ops> enc;
  auto [hq, q_sum] = detail::run_stack(ops, m, m.q_embed, m.q_fwd, m.q_bwd, pair.q_tokens);
  auto [ha, a_sum] = detail::run_stack(ops, m, m.a_embed, m.a_fwd, m.a_bwd, pair.a_tokens);
  enc.hq = std::move(hq);
  enc.ha = std::move(ha);
  for (const auto& h : enc.hq) enc.keys_q.push_back(ops.matvec(m.att_q.w_key, h));
  for (const auto& h : enc.ha) enc.keys_a.push_back(ops.matvec(m.att_a.w_key, h));
  const Var parts[] = {q_sum, a_sum};
  enc.h0 = ops.tanh(ops.matvec(m.combiner, ops.concat(parts)));
  return enc;
}

// s_0 = h0 in every decoder layer, zero cells.
template <class Ops>
DecoderState<Ops> initial_state(Ops& ops, const Model& m, const Encoded<Ops>& enc) {
  DecoderState<Ops> s;
  for (std::size_t l = 0; l < m.dec.size(); ++l) {
    s.h.push_back(enc.h0);
    s.c.push_back(ops.zeros(m.config.hidden_dim));
  }
  return s;
}

// One decoder step. Contexts are attended with the previous top-layer state,
// then s_t = lstm(W_s [y_{t-1} ; c_q ; c_a], s_{t-1}) and
// logits = W_y [s_t ; c_q ; c_a]. Logits are unmasked.
template <class Ops>
StepOutput<Ops> decoder_step(Ops& ops, const Model& m, const Encoded<Ops>& enc, TokenId prev,
                             const DecoderState<Ops>& state) {
  using Var = typename Ops::Var;
  const Var& query = state.h.back();
  auto cq = attend(ops, m.att_q, query, enc.keys_q, enc.hq);
  auto ca = attend(ops, m.att_a, query, enc.keys_a, enc.ha);

  Var emb = ops.dropout(ops.embed(m.dec_embed, prev));
  const Var in_parts[] = {emb, cq.context, ca.context};
  Var x = ops.matvec(m.w_s, ops.concat(in_parts));

  StepOutput<Ops> out;
  for (std::size_t l = 0; l < m.dec.size(); ++l) {
    if (l > 0) x = ops.dropout(x);
    auto [h, c] = ops.lstm(m.dec[l], x, state.h[l], state.c[l]);
    out.state.h.push_back(h);
    out.state.c.push_back(c);
    x = h;
  }
  const Var out_parts[] = {out.state.h.back(), cq.context, ca.context};
  out.logits = ops.matvec(m.w_y, ops.concat(out_parts));
  out.alpha_q = cq.alpha;
  out.alpha_a = ca.alpha;
  return out;
}

}  // namespace neuron
