#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "neuron/text.hpp"

namespace neuron {

// States of the tuple grammar. *_EMPTY means the span is open but has no
// word yet, so its closing tag is not allowed.
enum class GrammarState : std::uint8_t {
  Start,
  Arg1Empty,
  Arg1Body,
  RelWait,
  RelEmpty,
  RelBody,
  Arg2Wait,
  Arg2Empty,
  Arg2Body,
  EndWait,
  Done,
};
inline constexpr std::size_t kGrammarStateCount = 11;

std::string_view state_name(GrammarState s);

// Next state after emitting `token`, or nullopt when the token is illegal.
// Done has no legal continuation.
std::optional<GrammarState> transition(GrammarState state, TokenId token, const Vocabulary& vocab);

// r[i] = 1 iff token i is a legal emission in `state`. Throws
// std::invalid_argument for Done.
std::vector<std::uint8_t> grammar_mask(GrammarState state, const Vocabulary& vocab);

// Fewest tokens that take `state` to Done: 10 from Start, 0 at Done.
std::size_t tokens_to_finish(GrammarState state);

// True iff the FSM consumes the whole sequence and ends in Done.
bool fsm_accepts(std::span<const TokenId> sequence, const Vocabulary& vocab);

// grammar_mask for every non-terminal state, built once per vocabulary.
class GrammarMasks {
 public:
  explicit GrammarMasks(const Vocabulary& vocab);
  const std::vector<std::uint8_t>& operator[](GrammarState s) const { return masks_.at(static_cast<std::size_t>(s)); }

 private:
  std::array<std::vector<std::uint8_t>, kGrammarStateCount> masks_;
};

}  // namespace neuron
