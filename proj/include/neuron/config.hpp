#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "neuron/bootstrap.hpp"
#include "neuron/decoder.hpp"
#include "neuron/model.hpp"
#include "neuron/relevance.hpp"
#include "neuron/train.hpp"

namespace neuron {

// Flat `namespace.key = value` settings for every command. Values are
// type-checked on assignment; unknown keys are rejected.
class RunConfig {
 public:
  enum class Kind { Count, Real, Bool, Seed, SplitName };

  RunConfig();

  void set(const std::string& key, const std::string& value);
  // `key = value` lines; '#' starts a comment. Throws ConfigError naming the line.
  void load_text(std::string_view text);
  void load_file(const std::string& path);

  const std::string& get(const std::string& key) const;
  std::vector<std::string> keys() const;
  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::size_t count(const std::string& key) const;
  double real(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::uint64_t seed() const;

  SynthConfig synth() const;
  BootstrapConfig bootstrap() const;
  ModelConfig model(std::size_t vocab_size) const;
  TrainConfig train() const;
  DecodeConfig decode() const;
  KEConfig ke() const;

  // "# key = value" lines for every key under the given namespaces
  // (the global "seed" is always included).
  std::string echo(const std::vector<std::string>& namespaces) const;

 private:
  struct Entry {
    Kind kind;
    std::string value;
  };
  std::map<std::string, Entry> entries_;
};

}  // namespace neuron
