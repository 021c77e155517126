#include "neuron/grammar.hpp"

#include <stdexcept>

namespace neuron {

std::string_view state_name(GrammarState s) {
  static constexpr std::array<std::string_view, kGrammarStateCount> names = {
      "START", "ARG1_EMPTY", "ARG1_BODY", "REL_WAIT", "REL_EMPTY", "REL_BODY",
      "ARG2_WAIT", "ARG2_EMPTY", "ARG2_BODY", "END_WAIT", "DONE"};
  return names[static_cast<std::size_t>(s)];
}

std::optional<GrammarState> transition(GrammarState state, TokenId token, const Vocabulary& vocab) {
  if (token < 0 || static_cast<std::size_t>(token) >= vocab.size()) return std::nullopt;
  const bool word = !vocab.is_tag(token);
  auto is = [&](Tag t) { return token == vocab.tag_id(t); };
  using S = GrammarState;
  switch (state) {
    case S::Start:
      if (is(Tag::Arg1Open)) return S::Arg1Empty;
      break;
    case S::Arg1Empty:
      if (word) return S::Arg1Body;
      break;
    case S::Arg1Body:
      if (word) return S::Arg1Body;
      if (is(Tag::Arg1Close)) return S::RelWait;
      break;
    case S::RelWait:
      if (is(Tag::RelOpen)) return S::RelEmpty;
      break;
    case S::RelEmpty:
      if (word) return S::RelBody;
      break;
    case S::RelBody:
      if (word) return S::RelBody;
      if (is(Tag::RelClose)) return S::Arg2Wait;
      break;
    case S::Arg2Wait:
      if (is(Tag::Arg2Open)) return S::Arg2Empty;
      break;
    case S::Arg2Empty:
      if (word) return S::Arg2Body;
      break;
    case S::Arg2Body:
      if (word) return S::Arg2Body;
      if (is(Tag::Arg2Close)) return S::EndWait;
      break;
    case S::EndWait:
      if (is(Tag::End)) return S::Done;
      break;
    case S::Done:
      break;
  }
  return std::nullopt;
}

std::vector<std::uint8_t> grammar_mask(GrammarState state, const Vocabulary& vocab) {
  if (state == GrammarState::Done) throw std::invalid_argument("grammar_mask: DONE has no continuation");
  std::vector<std::uint8_t> r(vocab.size(), 0);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = transition(state, static_cast<TokenId>(i), vocab).has_value();
  return r;
}

bool fsm_accepts(std::span<const TokenId> sequence, const Vocabulary& vocab) {
  GrammarState s = GrammarState::Start;
  for (TokenId t : sequence) {
    auto next = transition(s, t, vocab);
    if (!next) return false;
    s = *next;
  }
  return s == GrammarState::Done;
}

GrammarMasks::GrammarMasks(const Vocabulary& vocab) {
  for (std::size_t s = 0; s + 1 < kGrammarStateCount; ++s) masks_[s] = grammar_mask(static_cast<GrammarState>(s), vocab);
  masks_.back().assign(vocab.size(), 0);
}

std::size_t tokens_to_finish(GrammarState state) {
  return kGrammarStateCount - 1 - static_cast<std::size_t>(state);
}

}  // namespace neuron
