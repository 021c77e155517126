#include "neuron/config.hpp"

#include <charconv>
#include <cmath>

#include "neuron/errors.hpp"
#include "neuron/io.hpp"

namespace neuron {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

}  // namespace

RunConfig::RunConfig() {
  const SynthConfig sc;
  const BootstrapConfig bc;
  const ModelConfig mc;
  const TrainConfig tc;
  const DecodeConfig dc;
  const KEConfig kc;
  auto add = [&](const std::string& k, Kind kind, std::string v) { entries_[k] = {kind, std::move(v)}; };
  auto num = [](auto v) { return io::format_double(static_cast<double>(v)); };

  add("seed", Kind::Seed, "7");

  add("synth.pairs", Kind::Count, std::to_string(sc.pairs));
  add("synth.relations", Kind::Count, std::to_string(sc.relations));
  add("synth.entities", Kind::Count, std::to_string(sc.entities));
  add("synth.noise_rate", Kind::Real, num(sc.noise_rate));
  add("synth.dev_fraction", Kind::Real, num(sc.dev_fraction));
  add("synth.test_fraction", Kind::Real, num(sc.test_fraction));

  add("bootstrap.min_count", Kind::Count, std::to_string(bc.min_count));
  add("bootstrap.max_count", Kind::Count, std::to_string(bc.max_count));

  add("vocab.max_size", Kind::Count, "50000");

  add("model.embedding_dim", Kind::Count, std::to_string(mc.embedding_dim));
  add("model.hidden_dim", Kind::Count, std::to_string(mc.hidden_dim));
  add("model.attention_dim", Kind::Count, std::to_string(mc.attention_dim));
  add("model.layers", Kind::Count, std::to_string(mc.layers));
  add("model.bidirectional", Kind::Bool, mc.bidirectional ? "true" : "false");
  add("model.init_scale", Kind::Real, num(mc.init_scale));

  add("train.lr", Kind::Real, num(tc.learning_rate));
  add("train.decay", Kind::Real, num(tc.decay));
  add("train.dropout", Kind::Real, num(tc.dropout));
  add("train.batch", Kind::Count, std::to_string(tc.batch_size));
  add("train.max_steps", Kind::Count, std::to_string(tc.max_steps));
  add("train.eval_every", Kind::Count, std::to_string(tc.eval_every));
  add("train.clip", Kind::Real, num(tc.clip_norm));

  add("decode.beam", Kind::Count, std::to_string(dc.beam_width));
  add("decode.pool", Kind::Count, std::to_string(dc.pool_size));
  add("decode.max_length", Kind::Count, std::to_string(dc.max_length));
  add("decode.gamma", Kind::Real, num(dc.gamma));

  add("ke.dim", Kind::Count, std::to_string(kc.dim));
  add("ke.margin", Kind::Real, num(kc.margin));
  add("ke.lr", Kind::Real, num(kc.learning_rate));
  add("ke.epochs", Kind::Count, std::to_string(kc.epochs));
  add("ke.negatives", Kind::Count, std::to_string(kc.negatives));

  add("extract.workers", Kind::Count, "1");
  add("extract.split", Kind::SplitName, "test");
  add("eval.split", Kind::SplitName, "test");
  add("eval.buckets", Kind::Count, "10");
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("unknown configuration key '" + key + "'");
  const std::string_view v = trim(value);
  bool ok = true;
  switch (it->second.kind) {
    case Kind::Count: {
      std::size_t x = 0;
      ok = parse_number(v, x);
      break;
    }
    case Kind::Seed: {
      std::uint64_t x = 0;
      ok = parse_number(v, x);
      break;
    }
    case Kind::Real: {
      double x = 0.0;
      ok = parse_number(v, x) && std::isfinite(x);
      break;
    }
    case Kind::Bool:
      ok = v == "true" || v == "false";
      break;
    case Kind::SplitName:
      ok = v == "train" || v == "dev" || v == "test" || v == "all";
      break;
  }
  if (!ok) throw ConfigError("invalid value '" + std::string(v) + "' for " + key);
  it->second.value = std::string(v);
}

void RunConfig::load_text(std::string_view text) {
  std::size_t lineno = 0;
  std::size_t s = 0;
  while (s < text.size()) {
    auto e = text.find('\n', s);
    if (e == std::string_view::npos) e = text.size();
    std::string_view line = text.substr(s, e - s);
    s = e + 1;
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    try {
      set(std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))));
    } catch (const ConfigError& err) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " + err.what());
    }
  }
}

void RunConfig::load_file(const std::string& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  load_text(text);
}

const std::string& RunConfig::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("unknown configuration key '" + key + "'");
  return it->second.value;
}

std::vector<std::string> RunConfig::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, e] : entries_) out.push_back(k);
  return out;
}

std::size_t RunConfig::count(const std::string& key) const {
  std::size_t x = 0;
  parse_number(std::string_view(get(key)), x);
  return x;
}

double RunConfig::real(const std::string& key) const {
  double x = 0.0;
  parse_number(std::string_view(get(key)), x);
  return x;
}

bool RunConfig::flag(const std::string& key) const { return get(key) == "true"; }

std::uint64_t RunConfig::seed() const {
  std::uint64_t x = 0;
  parse_number(std::string_view(get("seed")), x);
  return x;
}

SynthConfig RunConfig::synth() const {
  SynthConfig c;
  c.pairs = count("synth.pairs");
  c.relations = count("synth.relations");
  c.entities = count("synth.entities");
  c.noise_rate = real("synth.noise_rate");
  c.dev_fraction = real("synth.dev_fraction");
  c.test_fraction = real("synth.test_fraction");
  c.seed = seed();
  c.validate();
  return c;
}

BootstrapConfig RunConfig::bootstrap() const {
  BootstrapConfig c;
  c.min_count = count("bootstrap.min_count");
  c.max_count = count("bootstrap.max_count");
  if (c.min_count > c.max_count) throw ConfigError("bootstrap.min_count exceeds bootstrap.max_count");
  return c;
}

ModelConfig RunConfig::model(std::size_t vocab_size) const {
  ModelConfig c;
  c.vocab_size = vocab_size;
  c.embedding_dim = count("model.embedding_dim");
  c.hidden_dim = count("model.hidden_dim");
  c.attention_dim = count("model.attention_dim");
  c.layers = count("model.layers");
  c.bidirectional = flag("model.bidirectional");
  c.init_scale = real("model.init_scale");
  if (c.embedding_dim == 0 || c.hidden_dim == 0 || c.attention_dim == 0 || c.layers == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  if (!(c.init_scale > 0.0)) throw ConfigError("model.init_scale must be positive");
  return c;
}

TrainConfig RunConfig::train() const {
  TrainConfig c;
  c.learning_rate = real("train.lr");
  c.decay = real("train.decay");
  c.dropout = real("train.dropout");
  c.batch_size = count("train.batch");
  c.max_steps = count("train.max_steps");
  c.eval_every = count("train.eval_every");
  c.clip_norm = real("train.clip");
  c.seed = seed();
  c.validate();
  return c;
}

DecodeConfig RunConfig::decode() const {
  DecodeConfig c;
  c.beam_width = count("decode.beam");
  c.pool_size = count("decode.pool");
  c.max_length = count("decode.max_length");
  c.gamma = real("decode.gamma");
  c.validate();
  return c;
}

KEConfig RunConfig::ke() const {
  KEConfig c;
  c.dim = count("ke.dim");
  c.margin = real("ke.margin");
  c.learning_rate = real("ke.lr");
  c.epochs = count("ke.epochs");
  c.negatives = count("ke.negatives");
  c.seed = seed();
  c.validate();
  return c;
}

std::string RunConfig::echo(const std::vector<std::string>& namespaces) const {
  std::string out = "# seed = " + get("seed") + "\n";
  for (const auto& [k, e] : entries_) {
    for (const auto& ns : namespaces) {
      if (k.starts_with(ns + ".")) {
        out += "# " + k + " = " + e.value + "\n";
        break;
      }
    }
  }
  return out;
}

}  // namespace neuron
