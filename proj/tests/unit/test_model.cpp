#include <cmath>
#include <numeric>

#include "doctest.h"
#include "neuron/decoder.hpp"
#include "neuron/errors.hpp"
#include "neuron/model.hpp"
#include "oracles.hpp"

using namespace neuron;

namespace {

ModelConfig small(std::size_t vocab, std::size_t hidden = 4, bool bi = false, std::size_t layers = 1) {
  ModelConfig c;
  c.vocab_size = vocab;
  c.embedding_dim = 3;
  c.hidden_dim = hidden;
  c.attention_dim = 5;
  c.layers = layers;
  c.bidirectional = bi;
  c.init_scale = 0.5;
  return c;
}

Model randomized(const ModelConfig& c, std::uint64_t seed) {
  Model m = Model::create(c, seed);
  // nonzero biases exercise more of the cell
  Rng rng(seed + 100);
  for (auto& p : m.params.all()) {
    for (auto& v : p.value.data) {
      if (v == 0.0) v = rng.uniform(-0.3, 0.3);
    }
  }
  return m;
}

std::vector<double> embedding(const Model& m, ParamId table, TokenId t) {
  const auto row = m.params[table].value.row(static_cast<std::size_t>(t));
  return {row.begin(), row.end()};
}

std::vector<std::vector<double>> oracle_run(const Model& m, ParamId table, const LstmCellIds& cell,
                                            const std::vector<TokenId>& tokens, bool reverse) {
  const std::size_t H = cell.hidden_dim;
  std::vector<std::vector<double>> out(tokens.size());
  oracle::State s{std::vector<double>(H, 0.0), std::vector<double>(H, 0.0)};
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    const std::size_t t = reverse ? tokens.size() - 1 - k : k;
    s = oracle::lstm(m.params[cell.w_x].value, m.params[cell.w_h].value, m.params[cell.bias].value.data,
                     embedding(m, table, tokens[t]), s.h, s.c);
    out[t] = s.h;
  }
  return out;
}

void copy_param(Model& m, const std::string& from, const std::string& to) {
  m.params[m.params.find(to)].value = m.params[m.params.find(from)].value;
}

}  // namespace

TEST_CASE("model layout shapes") {
  const auto c = small(20, 4, true, 2);
  const Model m = Model::create(c, 1);
  CHECK(m.encoder_state_dim() == 8);
  CHECK(m.params[m.combiner].value.rows == 4);
  CHECK(m.params[m.combiner].value.cols == 16);
  CHECK(m.params[m.w_y].value.rows == 20);
  CHECK(m.params[m.w_y].value.cols == 4 + 16);
  CHECK(m.params[m.w_s].value.cols == 3 + 16);
  CHECK(m.q_fwd.size() == 2);
  CHECK(m.q_fwd[1].input_dim == 8);
  CHECK(m.dec.size() == 2);
  for (const auto& cell : m.dec) {
    const auto& b = m.params[cell.bias].value.data;
    CHECK(std::all_of(b.begin(), b.end(), [](double v) { return v == 0.0; }));
  }
  CHECK_THROWS_AS(Model::layout(small(0)), ConfigError);
}

TEST_CASE("zero combiner gives a zero initial state") {
  Model m = randomized(small(15), 2);
  auto& wc = m.params[m.combiner].value.data;
  std::fill(wc.begin(), wc.end(), 0.0);
  EagerOps ops(m.params);
  const auto enc = encode(ops, m, QAPair{"p", {9, 10}, {11, 12, 13}});
  CHECK(enc.h0 == Vec(4, 0.0));
}

TEST_CASE("tied encoders on identical inputs produce identical states") {
  Model m = randomized(small(15), 3);
  copy_param(m, "q.embed", "a.embed");
  for (const char* w : {".w_x", ".w_h", ".bias"}) copy_param(m, std::string("q.l0.fwd") + w, std::string("a.l0.fwd") + w);
  EagerOps ops(m.params);
  const auto enc = encode(ops, m, QAPair{"p", {9, 10, 11}, {9, 10, 11}});
  for (std::size_t t = 0; t < 3; ++t) CHECK(enc.hq[t] == enc.ha[t]);
}

TEST_CASE("encoder states match the step-by-step oracle") {
  const Model m = randomized(small(15), 4);
  const std::vector<TokenId> q{9, 12}, a{10, 11, 14};
  EagerOps ops(m.params);
  const auto enc = encode(ops, m, QAPair{"p", q, a});
  const auto hq = oracle_run(m, m.q_embed, m.q_fwd[0], q, false);
  const auto ha = oracle_run(m, m.a_embed, m.a_fwd[0], a, false);
  REQUIRE(enc.hq.size() == 2);
  REQUIRE(enc.ha.size() == 3);
  for (std::size_t t = 0; t < 2; ++t) {
    for (std::size_t k = 0; k < 4; ++k) CHECK(enc.hq[t][k] == doctest::Approx(hq[t][k]).epsilon(1e-12));
  }
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t k = 0; k < 4; ++k) CHECK(enc.ha[t][k] == doctest::Approx(ha[t][k]).epsilon(1e-12));
  }
  // h0 = tanh(W_c [hq_last ; ha_last])
  std::vector<double> cat = hq.back();
  cat.insert(cat.end(), ha.back().begin(), ha.back().end());
  const auto pre = oracle::matvec(m.params[m.combiner].value, cat);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(enc.h0[k] == doctest::Approx(std::tanh(pre[k])).epsilon(1e-12));
    CHECK(std::abs(enc.h0[k]) < 1.0);
  }
}

TEST_CASE("bidirectional states concatenate forward and backward passes") {
  const Model m = randomized(small(15, 3, true), 5);
  const std::vector<TokenId> q{9, 12, 13};
  EagerOps ops(m.params);
  const auto enc = encode(ops, m, QAPair{"p", q, {10}});
  const auto f = oracle_run(m, m.q_embed, m.q_fwd[0], q, false);
  const auto b = oracle_run(m, m.q_embed, m.q_bwd[0], q, true);
  for (std::size_t t = 0; t < 3; ++t) {
    REQUIRE(enc.hq[t].size() == 6);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(enc.hq[t][k] == doctest::Approx(f[t][k]).epsilon(1e-12));
      CHECK(enc.hq[t][3 + k] == doctest::Approx(b[t][k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("encoders are order sensitive and asymmetric") {
  const Model m = randomized(small(15), 6);
  EagerOps ops(m.params);
  const auto e1 = encode(ops, m, QAPair{"p", {9}, {10, 11, 12}});
  const auto e2 = encode(ops, m, QAPair{"p", {9}, {12, 11, 10}});
  CHECK(e1.ha.back() != e2.ha.back());
  const auto e3 = encode(ops, m, QAPair{"p", {10, 11, 12}, {9}});
  CHECK(e1.h0 != e3.h0);
  CHECK_THROWS_AS(encode(ops, m, QAPair{"p", {}, {9}}), DataError);
  CHECK_THROWS_AS(encode(ops, m, QAPair{"p", {9}, {}}), DataError);
}

TEST_CASE("attention edge cases and oracle") {
  const Model m = randomized(small(15), 7);
  EagerOps ops(m.params);
  const Vec s{0.1, -0.2, 0.3, 0.05};
  const std::vector<Vec> one{{0.5, -0.5, 0.25, 0.0}};
  const std::vector<Vec> one_key{ops.matvec(m.att_q.w_key, one[0])};
  const auto a1 = attend(ops, m.att_q, s, one_key, one);
  CHECK(a1.alpha == Vec{1.0});
  CHECK(a1.context == one[0]);

  const std::vector<Vec> same(3, Vec{0.2, 0.4, -0.1, 0.3});
  std::vector<Vec> same_keys;
  for (const auto& h : same) same_keys.push_back(ops.matvec(m.att_q.w_key, h));
  const auto a2 = attend(ops, m.att_q, s, same_keys, same);
  for (std::size_t k = 0; k < 4; ++k) CHECK(a2.context[k] == doctest::Approx(same[0][k]).epsilon(1e-14));

  const std::vector<Vec> hs{{0.1, 0.2, 0.3, 0.4}, {-0.5, 0.0, 0.5, 0.2}, {0.9, -0.9, 0.1, -0.3}};
  std::vector<Vec> keys;
  for (const auto& h : hs) keys.push_back(ops.matvec(m.att_q.w_key, h));
  const auto got = attend(ops, m.att_q, s, keys, hs);
  const auto [ctx, alpha] = oracle::attention(m.params[m.att_q.w_query].value, m.params[m.att_q.w_key].value,
                                              m.params[m.att_q.v].value, s, hs);
  for (std::size_t i = 0; i < 3; ++i) CHECK(got.alpha[i] == doctest::Approx(alpha[i]).epsilon(1e-12));
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(got.context[k] == doctest::Approx(ctx[k]).epsilon(1e-12));
    const double lo = std::min({hs[0][k], hs[1][k], hs[2][k]});
    const double hi = std::max({hs[0][k], hs[1][k], hs[2][k]});
    CHECK(got.context[k] >= lo - 1e-15);
    CHECK(got.context[k] <= hi + 1e-15);
  }
  CHECK_THROWS_AS(attend(ops, m.att_q, s, {}, {}), DimensionError);
}

TEST_CASE("attention weights form distributions at every decode step") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Model m = randomized(small(15, 4, seed % 2 == 0, 1 + seed % 2), seed);
    EagerOps ops(m.params);
    const auto enc = encode(ops, m, QAPair{"p", {9, 10, 11}, {12, 13}});
    auto state = initial_state(ops, m, enc);
    TokenId prev = 8;
    for (int t = 0; t < 6; ++t) {
      auto out = decoder_step(ops, m, enc, prev, state);
      for (const Vec* a : {&out.alpha_q, &out.alpha_a}) {
        CHECK(std::accumulate(a->begin(), a->end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
        for (double v : *a) CHECK(v >= 0.0);
      }
      state = out.state;
      prev = static_cast<TokenId>(9 + t % 5);
    }
  }
}

TEST_CASE("decoder step matches the composed oracle") {
  const Model m = randomized(small(12), 8);
  EagerOps ops(m.params);
  const QAPair pair{"p", {9, 10}, {11}};
  const auto enc = encode(ops, m, pair);
  const auto state = initial_state(ops, m, enc);
  const auto out = decoder_step(ops, m, enc, 8, state);

  auto cq = oracle::attention(m.params[m.att_q.w_query].value, m.params[m.att_q.w_key].value, m.params[m.att_q.v].value,
                              enc.h0, enc.hq)
                .first;
  auto ca = oracle::attention(m.params[m.att_a.w_query].value, m.params[m.att_a.w_key].value, m.params[m.att_a.v].value,
                              enc.h0, enc.ha)
                .first;
  std::vector<double> in = embedding(m, m.dec_embed, 8);
  in.insert(in.end(), cq.begin(), cq.end());
  in.insert(in.end(), ca.begin(), ca.end());
  const auto x = oracle::matvec(m.params[m.w_s].value, in);
  const auto s = oracle::lstm(m.params[m.dec[0].w_x].value, m.params[m.dec[0].w_h].value,
                              m.params[m.dec[0].bias].value.data, x, enc.h0, std::vector<double>(4, 0.0));
  std::vector<double> o = s.h;
  o.insert(o.end(), cq.begin(), cq.end());
  o.insert(o.end(), ca.begin(), ca.end());
  const auto logits = oracle::matvec(m.params[m.w_y].value, o);
  const auto p = oracle::softmax(logits);
  const auto dist = step_distribution(m, enc, 8, state);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    CHECK(out.logits[i] == doctest::Approx(logits[i]).epsilon(1e-12));
    CHECK(dist.probs[i] == doctest::Approx(p[i]).epsilon(1e-12));
  }
}
