#include "neuron/train.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "neuron/errors.hpp"
#include "neuron/decoder.hpp"
#include "neuron/grammar.hpp"
#include "neuron/io.hpp"

namespace neuron {
namespace {

void check_vocab(const Model& model, const Vocabulary& vocab) {
  if (model.config.vocab_size != vocab.size()) throw DimensionError("model and vocabulary sizes disagree");
}

// v AND r for the current grammar state.
std::vector<std::uint8_t> step_mask(const std::vector<std::uint8_t>& v, const std::vector<std::uint8_t>& r) {
  std::vector<std::uint8_t> m(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) m[i] = v[i] && r[i];
  return m;
}

GrammarState advance(GrammarState s, TokenId token, const Vocabulary& vocab, std::size_t position) {
  const auto next = transition(s, token, vocab);
  if (!next) throw MalformedSequence(position, "target token not allowed in state " + std::string(state_name(s)));
  return *next;
}

}  // namespace

TrainingInstance make_training_instance(const Vocabulary& vocab, const TextPair& pair, const Triple& target,
                                        InstanceType type) {
  TrainingInstance inst;
  inst.pair = encode_pair(vocab, pair);
  inst.target = linearize(target, vocab);
  inst.type = type;
  if (!is_well_formed(inst.target.tokens, vocab)) throw DataError("target of " + pair.id + " is not well formed");
  const auto mask = input_mask(vocab, inst.pair);
  for (TokenId t : inst.target.tokens) {
    if (!mask[static_cast<std::size_t>(t)]) {
      throw DataError("target token '" + vocab.token(t) + "' of " + pair.id + " does not occur in the pair");
    }
  }
  return inst;
}

double sequence_nll(const Model& model, const Vocabulary& vocab, const TrainingInstance& instance) {
  check_vocab(model, vocab);
  EagerOps ops(model.params);
  const auto enc = encode(ops, model, instance.pair);
  auto state = initial_state(ops, model, enc);
  const auto v_mask = input_mask(vocab, instance.pair);
  const GrammarMasks grammar(vocab);

  GrammarState fsm = GrammarState::Start;
  TokenId prev = vocab.end_id();
  double loss = 0.0;
  const auto& target = instance.target.tokens;
  for (std::size_t t = 0; t < target.size(); ++t) {
    if (fsm == GrammarState::Done) throw MalformedSequence(t, "tokens after </S>");
    auto out = decoder_step(ops, model, enc, prev, state);
    const auto y = static_cast<std::size_t>(target[t]);
    const Vec logp = log_softmax(apply_masks(out.logits, v_mask, grammar[fsm]));
    if (logp.at(y) == kNegInf) throw DataError("sequence_nll: gold token is masked out (data bug)");
    loss -= logp[y];
    fsm = advance(fsm, target[t], vocab, t);
    state = std::move(out.state);
    prev = target[t];
  }
  return loss;
}

double sequence_nll_backward(Model& model, const Vocabulary& vocab, const TrainingInstance& instance,
                             Rng* dropout_rng, double dropout_rate) {
  check_vocab(model, vocab);
  Tape tape(model.params, dropout_rng, dropout_rate);
  TapeOps ops(tape);
  const auto enc = encode(ops, model, instance.pair);
  auto state = initial_state(ops, model, enc);
  const auto v_mask = input_mask(vocab, instance.pair);
  const GrammarMasks grammar(vocab);

  GrammarState fsm = GrammarState::Start;
  TokenId prev = vocab.end_id();
  std::vector<Tape::Var> terms;
  const auto& target = instance.target.tokens;
  for (std::size_t t = 0; t < target.size(); ++t) {
    if (fsm == GrammarState::Done) throw MalformedSequence(t, "tokens after </S>");
    auto out = decoder_step(ops, model, enc, prev, state);
    const auto mask = step_mask(v_mask, grammar[fsm]);
    terms.push_back(tape.masked_nll(out.logits, mask, static_cast<std::size_t>(target[t])));
    fsm = advance(fsm, target[t], vocab, t);
    state = std::move(out.state);
    prev = target[t];
  }
  const auto loss = tape.sum(terms);
  tape.backward(loss);
  return tape.scalar(loss);
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("train.lr must be >= 0");
  if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("train.decay must be in (0, 1]");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("train.dropout must be in [0, 1)");
  if (batch_size < 1) throw ConfigError("train.batch must be at least 1");
  if (eval_every < 1) throw ConfigError("train.eval_every must be at least 1");
  if (!(clip_norm > 0.0)) throw ConfigError("train.clip must be positive");
}

double mean_loss(const Model& model, const Vocabulary& vocab, std::span<const TrainingInstance> set) {
  if (set.empty()) throw DataError("mean_loss: empty instance set");
  double total = 0.0;
  for (const auto& inst : set) total += sequence_nll(model, vocab, inst);
  return total / static_cast<double>(set.size());
}

TrainResult train(Model init, const Vocabulary& vocab, std::span<const TrainingInstance> train_set,
                  std::span<const TrainingInstance> dev_set, const TrainConfig& cfg, const TrainLogger& log) {
  cfg.validate();
  check_vocab(init, vocab);
  if (train_set.empty()) throw DataError("train: no training instances");
  // Without a dev split the plateau check falls back to the training set.
  const auto monitor = dev_set.empty() ? train_set : dev_set;

  Rng rng(cfg.seed);
  Rng drop_rng = rng.split();
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order.begin(), order.end());
  std::size_t cursor = 0;

  Model model = std::move(init);
  TrainResult result;
  result.initial_dev_loss = mean_loss(model, vocab, monitor);
  result.best.model = model;
  result.best.vocab = vocab;
  result.best.dev_loss_history.push_back(result.initial_dev_loss);
  double best_dev = result.initial_dev_loss;
  double lr = cfg.learning_rate;
  double window = 0.0;
  std::size_t window_steps = 0;
  std::vector<double> history{result.initial_dev_loss};

  auto say = [&](const std::string& s) {
    if (log) log(s);
  };
  say("step 0 dev_loss " + io::format_fixed(result.initial_dev_loss, 6));

  for (std::size_t step = 1; step <= cfg.max_steps; ++step) {
    model.params.zero_grad();
    double batch_loss = 0.0;
    for (std::size_t b = 0; b < cfg.batch_size; ++b) {
      const auto& inst = train_set[order[cursor]];
      if (++cursor == order.size()) {
        cursor = 0;
        rng.shuffle(order.begin(), order.end());
      }
      try {
        batch_loss += sequence_nll_backward(model, vocab, inst, cfg.dropout > 0.0 ? &drop_rng : nullptr, cfg.dropout);
      } catch (const NumericError&) {
        // overflowed activations surface as fully masked softmax rows
        batch_loss = std::numeric_limits<double>::quiet_NaN();
        break;
      }
    }
    batch_loss /= static_cast<double>(cfg.batch_size);
    if (!std::isfinite(batch_loss) || !model.params.grads_finite()) {
      say("step " + std::to_string(step) + " non-finite loss or gradient; stopping");
      result.status = TrainStatus::Diverged;
      break;
    }
    model.params.scale_grad(1.0 / static_cast<double>(cfg.batch_size));
    clip_gradients(model.params, cfg.clip_norm);
    sgd_update(model.params, lr);
    window += batch_loss;
    ++window_steps;

    if (step % cfg.eval_every == 0 || step == cfg.max_steps) {
      double dev = std::numeric_limits<double>::quiet_NaN();
      try {
        dev = mean_loss(model, vocab, monitor);
      } catch (const NumericError&) {
      }
      if (!std::isfinite(dev)) {
        say("step " + std::to_string(step) + " non-finite dev loss; stopping");
        result.status = TrainStatus::Diverged;
        break;
      }
      history.push_back(dev);
      result.train_loss_history.push_back(window / static_cast<double>(window_steps));
      window = 0.0;
      window_steps = 0;
      std::string line = "step " + std::to_string(step) + " train_loss " +
                         io::format_fixed(result.train_loss_history.back(), 6) + " dev_loss " +
                         io::format_fixed(dev, 6) + " lr " + io::format_double(lr);
      if (dev < best_dev) {
        best_dev = dev;
        result.best.model = model;
        result.best.step = step;
        line += " best";
      } else {
        lr *= cfg.decay;
        ++result.decays;
        line += " decay";
      }
      say(line);
    }
  }
  result.best.dev_loss_history = std::move(history);
  result.final_lr = lr;
  return result;
}

// --- Checkpoint container ---------------------------------------------------

namespace {

constexpr std::string_view kMagic = "neuron-checkpoint";

nlohmann::json config_json(const ModelConfig& c) {
  return {{"vocab_size", c.vocab_size},       {"embedding_dim", c.embedding_dim}, {"hidden_dim", c.hidden_dim},
          {"attention_dim", c.attention_dim}, {"layers", c.layers},               {"bidirectional", c.bidirectional},
          {"init_scale", c.init_scale}};
}

std::vector<std::uint8_t> to_bytes(const std::vector<double>& values) {
  std::vector<std::uint8_t> out(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) out[i * 8 + b] = static_cast<std::uint8_t>(bits >> (8 * b));
  }
  return out;
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::size_t offset() const noexcept { return pos_; }

  std::string_view line(const char* what) {
    const auto end = text_.find('\n', pos_);
    if (end == std::string_view::npos) throw ParseError(text_.size(), std::string("truncated file: expected ") + what);
    auto l = text_.substr(pos_, end - pos_);
    start_ = pos_;
    pos_ = end + 1;
    return l;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(start_, what); }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t start_ = 0;
};

std::size_t parse_count(std::string_view s, const Reader& r, const char* what) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) r.fail(std::string("bad ") + what);
  return v;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& c) {
  nlohmann::json header = {{"format", kMagic},
                           {"version", Checkpoint::kFormatVersion},
                           {"model", config_json(c.model.config)},
                           {"step", c.step},
                           {"dev_loss_history", c.dev_loss_history},
                           {"config", c.config_echo},
                           {"params", c.model.params.size()}};
  std::string out = header.dump() + "\n";
  out += "VOCAB " + std::to_string(c.vocab.size()) + "\n";
  out += c.vocab.serialize();
  for (const auto& p : c.model.params.all()) {
    out += "PARAM " + p.name + " " + std::to_string(p.value.rows) + " " + std::to_string(p.value.cols) + "\n";
    out += io::base64_encode(to_bytes(p.value.data));
    out += "\n";
  }
  out += "END " + io::hex64(io::fnv1a(out)) + "\n";
  return out;
}

Checkpoint parse_checkpoint(std::string_view text) {
  Reader r(text);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(r.line("header"));
  } catch (const nlohmann::json::exception& e) {
    r.fail(std::string("bad header: ") + e.what());
  }
  if (!header.is_object() || header.value("format", std::string()) != kMagic) r.fail("not a checkpoint file");
  const int version = header.value("version", -1);
  if (version != Checkpoint::kFormatVersion) {
    r.fail("unsupported checkpoint version " + std::to_string(version) + " (this build reads version " +
           std::to_string(Checkpoint::kFormatVersion) + ")");
  }

  Checkpoint c;
  ModelConfig cfg;
  std::size_t n_params = 0;
  try {
    const auto& m = header.at("model");
    cfg.vocab_size = m.at("vocab_size").get<std::size_t>();
    cfg.embedding_dim = m.at("embedding_dim").get<std::size_t>();
    cfg.hidden_dim = m.at("hidden_dim").get<std::size_t>();
    cfg.attention_dim = m.at("attention_dim").get<std::size_t>();
    cfg.layers = m.at("layers").get<std::size_t>();
    cfg.bidirectional = m.at("bidirectional").get<bool>();
    cfg.init_scale = m.at("init_scale").get<double>();
    c.step = header.at("step").get<std::size_t>();
    c.dev_loss_history = header.at("dev_loss_history").get<std::vector<double>>();
    c.config_echo = header.at("config").get<std::string>();
    n_params = header.at("params").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("bad header field: ") + e.what());
  }

  const auto vocab_line = r.line("VOCAB");
  if (!vocab_line.starts_with("VOCAB ")) r.fail("expected VOCAB");
  const std::size_t n_vocab = parse_count(vocab_line.substr(6), r, "vocabulary size");
  std::vector<std::string> entries;
  entries.reserve(n_vocab);
  for (std::size_t i = 0; i < n_vocab; ++i) entries.emplace_back(r.line("vocabulary entry"));
  try {
    c.vocab = Vocabulary::from_entries(std::move(entries));
  } catch (const ParseError& e) {
    throw ParseError(r.offset(), std::string("bad vocabulary: ") + e.what());
  }
  if (cfg.vocab_size != c.vocab.size()) r.fail("vocabulary size does not match the model header");

  try {
    c.model = Model::layout(cfg);
  } catch (const ConfigError& e) {
    throw ParseError(0, e.what());
  }
  if (c.model.params.size() != n_params) throw ParseError(0, "parameter count does not match the model layout");

  for (auto& p : c.model.params.all()) {
    const auto head = r.line("PARAM");
    std::istringstream hs{std::string(head)};
    std::string tag, name;
    std::size_t rows = 0, cols = 0;
    if (!(hs >> tag >> name >> rows >> cols) || tag != "PARAM") r.fail("expected PARAM line");
    if (name != p.name || rows != p.value.rows || cols != p.value.cols) {
      r.fail("parameter " + name + " does not match expected " + p.name);
    }
    const auto body = r.line("parameter data");
    const std::size_t body_offset = r.offset() - body.size() - 1;
    std::vector<std::uint8_t> bytes;
    try {
      bytes = io::base64_decode(body);
    } catch (const ParseError& e) {
      throw ParseError(body_offset + e.offset(), "bad parameter data for " + p.name);
    }
    if (bytes.size() != p.value.data.size() * 8) r.fail("parameter " + p.name + " has the wrong length");
    for (std::size_t i = 0; i < p.value.data.size(); ++i) {
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[i * 8 + b]) << (8 * b);
      p.value.data[i] = std::bit_cast<double>(bits);
    }
  }

  const std::size_t end_offset = r.offset();
  const auto end = r.line("END");
  if (!end.starts_with("END ")) r.fail("expected END");
  if (end.substr(4) != io::hex64(io::fnv1a(text.substr(0, end_offset)))) r.fail("checksum mismatch");
  if (r.offset() != text.size()) throw ParseError(r.offset(), "trailing data after END");
  return c;
}

void save_checkpoint(const Checkpoint& c, const std::string& path) { io::write_file(path, serialize_checkpoint(c)); }

Checkpoint load_checkpoint(const std::string& path) { return parse_checkpoint(io::read_file(path)); }

std::uint64_t parameter_hash(const Model& model) {
  std::uint64_t h = io::fnv1a("");
  for (const auto& p : model.params.all()) {
    const auto bytes = to_bytes(p.value.data);
    h = io::fnv1a(p.name, h);
    h = io::fnv1a(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), h);
  }
  return h;
}

}  // namespace neuron
