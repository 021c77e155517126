#include "neuron/model.hpp"

#include "neuron/errors.hpp"

namespace neuron {
namespace {

LstmCellIds add_cell(ParamStore& p, const std::string& prefix, std::size_t input, std::size_t hidden) {
  LstmCellIds c;
  c.w_x = p.add(prefix + ".w_x", 4 * hidden, input);
  c.w_h = p.add(prefix + ".w_h", 4 * hidden, hidden);
  c.bias = p.add(prefix + ".bias", 4 * hidden, 1);
  c.input_dim = input;
  c.hidden_dim = hidden;
  return c;
}

void add_encoder(Model& m, const std::string& name, std::vector<LstmCellIds>& fwd, std::vector<LstmCellIds>& bwd) {
  const auto& cfg = m.config;
  std::size_t input = cfg.embedding_dim;
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    fwd.push_back(add_cell(m.params, name + ".l" + std::to_string(l) + ".fwd", input, cfg.hidden_dim));
    if (cfg.bidirectional) bwd.push_back(add_cell(m.params, name + ".l" + std::to_string(l) + ".bwd", input, cfg.hidden_dim));
    input = m.encoder_state_dim();
  }
}

}  // namespace

Model Model::layout(const ModelConfig& config) {
  if (config.vocab_size == 0 || config.embedding_dim == 0 || config.hidden_dim == 0 || config.attention_dim == 0 ||
      config.layers == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  Model m;
  m.config = config;
  const std::size_t V = config.vocab_size;
  const std::size_t D = config.embedding_dim;
  const std::size_t H = config.hidden_dim;
  const std::size_t A = config.attention_dim;
  const std::size_t E = m.encoder_state_dim();

  m.q_embed = m.params.add("q.embed", V, D);
  m.a_embed = m.params.add("a.embed", V, D);
  add_encoder(m, "q", m.q_fwd, m.q_bwd);
  add_encoder(m, "a", m.a_fwd, m.a_bwd);
  m.combiner = m.params.add("combiner", H, 2 * E);
  m.att_q = {m.params.add("att_q.w_query", A, H), m.params.add("att_q.w_key", A, E), m.params.add("att_q.v", A, 1)};
  m.att_a = {m.params.add("att_a.w_query", A, H), m.params.add("att_a.w_key", A, E), m.params.add("att_a.v", A, 1)};
  m.dec_embed = m.params.add("dec.embed", V, D);
  m.w_s = m.params.add("dec.w_s", D, D + 2 * E);
  for (std::size_t l = 0; l < config.layers; ++l) {
    m.dec.push_back(add_cell(m.params, "dec.l" + std::to_string(l), l == 0 ? D : H, H));
  }
  m.w_y = m.params.add("dec.w_y", V, H + 2 * E);
  return m;
}

Model Model::create(const ModelConfig& config, std::uint64_t seed) {
  Model m = layout(config);
  Rng rng(seed);
  m.params.init_uniform(rng, config.init_scale);
  for (auto* cells : {&m.q_fwd, &m.q_bwd, &m.a_fwd, &m.a_bwd, &m.dec}) {
    for (const auto& c : *cells) {
      auto& b = m.params[c.bias].value.data;
      std::fill(b.begin(), b.end(), 0.0);
    }
  }
  return m;
}

}  // namespace neuron
