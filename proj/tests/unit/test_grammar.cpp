#include <set>
#include <stdexcept>

#include "doctest.h"
#include "neuron/grammar.hpp"

using namespace neuron;

namespace {

Vocabulary vocab() {
  std::vector<Tokens> corpus{{"pool", "open", "gym"}};
  return Vocabulary::build(corpus, 100);
}

std::vector<TokenId> allowed(GrammarState s, const Vocabulary& v) {
  const auto m = grammar_mask(s, v);
  std::vector<TokenId> out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i]) out.push_back(static_cast<TokenId>(i));
  }
  return out;
}

std::vector<TokenId> words(const Vocabulary& v) {
  std::vector<TokenId> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v.is_tag(static_cast<TokenId>(i))) out.push_back(static_cast<TokenId>(i));
  }
  return out;
}

}  // namespace

TEST_CASE("start admits only the arg1 opening tag") {
  const auto v = vocab();
  CHECK(allowed(GrammarState::Start, v) == std::vector<TokenId>{v.tag_id(Tag::Arg1Open)});
}

TEST_CASE("an empty span admits words only") {
  const auto v = vocab();
  for (auto s : {GrammarState::Arg1Empty, GrammarState::RelEmpty, GrammarState::Arg2Empty}) {
    CHECK(allowed(s, v) == words(v));
  }
}

TEST_CASE("a span body admits words and its own closing tag") {
  const auto v = vocab();
  const std::pair<GrammarState, Tag> cases[] = {{GrammarState::Arg1Body, Tag::Arg1Close},
                                                {GrammarState::RelBody, Tag::RelClose},
                                                {GrammarState::Arg2Body, Tag::Arg2Close}};
  for (auto [s, close] : cases) {
    auto want = words(v);
    want.push_back(v.tag_id(close));
    std::sort(want.begin(), want.end());
    CHECK(allowed(s, v) == want);
  }
}

TEST_CASE("wait states admit a single tag") {
  const auto v = vocab();
  CHECK(allowed(GrammarState::RelWait, v) == std::vector<TokenId>{v.tag_id(Tag::RelOpen)});
  CHECK(allowed(GrammarState::Arg2Wait, v) == std::vector<TokenId>{v.tag_id(Tag::Arg2Open)});
  CHECK(allowed(GrammarState::EndWait, v) == std::vector<TokenId>{v.end_id()});
  CHECK_THROWS_AS(grammar_mask(GrammarState::Done, v), std::invalid_argument);
}

TEST_CASE("done is absorbing and reachable from start") {
  const auto v = vocab();
  for (std::size_t t = 0; t < v.size(); ++t) CHECK_FALSE(transition(GrammarState::Done, static_cast<TokenId>(t), v));

  std::set<GrammarState> seen{GrammarState::Start};
  std::vector<GrammarState> frontier{GrammarState::Start};
  while (!frontier.empty()) {
    const auto s = frontier.back();
    frontier.pop_back();
    if (s == GrammarState::Done) continue;
    CHECK_FALSE(allowed(s, v).empty());
    for (std::size_t t = 0; t < v.size(); ++t) {
      if (auto n = transition(s, static_cast<TokenId>(t), v); n && seen.insert(*n).second) frontier.push_back(*n);
    }
  }
  CHECK(seen.size() == kGrammarStateCount);
  CHECK(seen.count(GrammarState::Done) == 1);
}

TEST_CASE("mask agrees with the transition function") {
  const auto v = vocab();
  const GrammarMasks cache(v);
  for (std::size_t s = 0; s + 1 < kGrammarStateCount; ++s) {
    const auto st = static_cast<GrammarState>(s);
    const auto m = grammar_mask(st, v);
    CHECK(cache[st] == m);
    for (std::size_t t = 0; t < v.size(); ++t) CHECK((m[t] != 0) == transition(st, static_cast<TokenId>(t), v).has_value());
  }
}
