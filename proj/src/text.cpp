#include "neuron/text.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

#include "neuron/errors.hpp"

namespace neuron {
namespace {

bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

void split_chunk(std::string chunk, Tokens& out) {
  for (char& c : chunk) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

  if (std::any_of(chunk.begin(), chunk.end(), is_digit)) {
    std::size_t lo = 0;
    std::size_t hi = chunk.size();
    while (lo < hi && is_punct(chunk[lo])) out.emplace_back(1, chunk[lo++]);
    std::size_t tail = hi;
    while (tail > lo && is_punct(chunk[tail - 1])) --tail;
    if (lo < tail) out.push_back(chunk.substr(lo, tail - lo));
    for (std::size_t i = tail; i < hi; ++i) out.emplace_back(1, chunk[i]);
    return;
  }

  std::string word;
  for (char c : chunk) {
    if (is_punct(c)) {
      if (!word.empty()) out.push_back(std::move(word));
      word.clear();
      out.emplace_back(1, c);
    } else {
      word.push_back(c);
    }
  }
  if (!word.empty()) out.push_back(std::move(word));
}

bool is_tag_string(std::string_view s) {
  return std::find(kTagStrings.begin(), kTagStrings.end(), s) != kTagStrings.end();
}

}  // namespace

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) split_chunk(std::string(text.substr(i, j - i)), out);
    i = j;
  }
  return out;
}

std::string join(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

Vocabulary::Vocabulary() {
  add(std::string(kPadToken));
  add(std::string(kUnkToken));
  for (auto tag : kTagStrings) add(std::string(tag));
}

void Vocabulary::add(std::string token) {
  const auto id = static_cast<TokenId>(entries_.size());
  index_.emplace(token, id);
  entries_.push_back(std::move(token));
}

Vocabulary Vocabulary::build(std::span<const Tokens> corpus, std::size_t max_size) {
  if (max_size <= kSpecialCount) {
    throw ConfigError("vocabulary max_size must exceed " + std::to_string(kSpecialCount));
  }
  struct Stat {
    std::size_t count = 0;
    std::size_t first = 0;
  };
  std::unordered_map<std::string, Stat> stats;
  std::vector<std::string> order;
  for (const auto& text : corpus) {
    for (const auto& tok : text) {
      auto [it, inserted] = stats.try_emplace(tok);
      if (inserted) {
        it->second.first = order.size();
        order.push_back(tok);
      }
      ++it->second.count;
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
    return stats[a].count > stats[b].count;
  });

  Vocabulary v;
  for (auto& tok : order) {
    if (v.size() >= max_size) break;
    if (v.contains(tok)) continue;  // a literal special in the corpus
    v.add(tok);
  }
  return v;
}

Vocabulary Vocabulary::from_entries(std::vector<std::string> entries) {
  Vocabulary v;
  if (entries.size() < kSpecialCount) throw ParseError(0, "vocabulary shorter than the special block");
  for (std::size_t i = 0; i < kSpecialCount; ++i) {
    if (entries[i] != v.entries_[i]) {
      throw ParseError(i, "vocabulary entry " + std::to_string(i) + " must be " + v.entries_[i]);
    }
  }
  for (std::size_t i = kSpecialCount; i < entries.size(); ++i) {
    if (v.contains(entries[i])) throw ParseError(i, "duplicate vocabulary token '" + entries[i] + "'");
    v.add(std::move(entries[i]));
  }
  return v;
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? unk_id() : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return index_.count(std::string(token)) != 0; }

std::vector<TokenId> Vocabulary::encode(std::span<const std::string> tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

std::string Vocabulary::serialize() const {
  std::string out;
  for (const auto& e : entries_) {
    out += e;
    out.push_back('\n');
  }
  return out;
}

Vocabulary Vocabulary::parse(std::string_view text) {
  std::vector<std::string> entries;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    entries.emplace_back(text.substr(start, end - start));
    start = end + 1;
  }
  return from_entries(std::move(entries));
}

QAPair encode_pair(const Vocabulary& vocab, const TextPair& pair) {
  return QAPair{pair.id, vocab.encode(pair.question), vocab.encode(pair.answer)};
}

std::string to_string(const Triple& t) { return join(t.arg1) + " | " + join(t.rel) + " | " + join(t.arg2); }

TaggedSequence linearize(const Triple& t, const Vocabulary& vocab) {
  TaggedSequence seq;
  auto span = [&](const Tokens& words, Tag open, Tag close, const char* name) {
    if (words.empty()) throw DataError(std::string("cannot linearize triple with empty ") + name);
    seq.tokens.push_back(vocab.tag_id(open));
    for (const auto& w : words) {
      if (is_tag_string(w)) throw DataError(std::string("tag token inside ") + name + " span");
      seq.tokens.push_back(vocab.id(w));
    }
    seq.tokens.push_back(vocab.tag_id(close));
  };
  span(t.arg1, Tag::Arg1Open, Tag::Arg1Close, "arg1");
  span(t.rel, Tag::RelOpen, Tag::RelClose, "rel");
  span(t.arg2, Tag::Arg2Open, Tag::Arg2Close, "arg2");
  seq.tokens.push_back(vocab.end_id());
  return seq;
}

namespace {

// Sequential parser shared by delinearize and is_well_formed. Returns the
// index of the first violation (or npos) and fills `out` when non-null.
struct ParseFailure {
  std::size_t position;
  const char* reason;
};

std::optional<ParseFailure> parse_tagged(std::span<const TokenId> s, const Vocabulary& vocab, Triple* out) {
  std::size_t pos = 0;
  auto expect = [&](Tag tag, const char* reason) -> std::optional<ParseFailure> {
    if (pos >= s.size() || s[pos] != vocab.tag_id(tag)) return ParseFailure{pos, reason};
    ++pos;
    return std::nullopt;
  };
  auto words = [&](Tokens* dst, const char* reason) -> std::optional<ParseFailure> {
    const std::size_t begin = pos;
    while (pos < s.size() && !vocab.is_tag(s[pos])) {
      if (s[pos] < 0 || static_cast<std::size_t>(s[pos]) >= vocab.size()) return ParseFailure{pos, "token id out of range"};
      if (dst) dst->push_back(vocab.token(s[pos]));
      ++pos;
    }
    if (pos == begin) return ParseFailure{pos, reason};
    return std::nullopt;
  };

  Triple scratch;
  Triple& t = out ? *out : scratch;
  Tokens* a1 = out ? &t.arg1 : nullptr;
  Tokens* rl = out ? &t.rel : nullptr;
  Tokens* a2 = out ? &t.arg2 : nullptr;
  if (auto f = expect(Tag::Arg1Open, "expected <arg1>")) return f;
  if (auto f = words(a1, "empty arg1")) return f;
  if (auto f = expect(Tag::Arg1Close, "expected </arg1>")) return f;
  if (auto f = expect(Tag::RelOpen, "expected <rel>")) return f;
  if (auto f = words(rl, "empty rel")) return f;
  if (auto f = expect(Tag::RelClose, "expected </rel>")) return f;
  if (auto f = expect(Tag::Arg2Open, "expected <arg2>")) return f;
  if (auto f = words(a2, "empty arg2")) return f;
  if (auto f = expect(Tag::Arg2Close, "expected </arg2>")) return f;
  if (auto f = expect(Tag::End, "expected </S>")) return f;
  if (pos != s.size()) return ParseFailure{pos, "tokens after </S>"};
  return std::nullopt;
}

}  // namespace

Triple delinearize(std::span<const TokenId> sequence, const Vocabulary& vocab) {
  Triple t;
  if (auto f = parse_tagged(sequence, vocab, &t)) throw MalformedSequence(f->position, f->reason);
  return t;
}

bool is_well_formed(std::span<const TokenId> sequence, const Vocabulary& vocab) {
  return !parse_tagged(sequence, vocab, nullptr).has_value();
}

std::vector<std::uint8_t> input_mask(const Vocabulary& vocab, const QAPair& pair) {
  std::vector<std::uint8_t> mask(vocab.size(), 0);
  for (TokenId id : pair.q_tokens) mask.at(static_cast<std::size_t>(id)) = 1;
  for (TokenId id : pair.a_tokens) mask.at(static_cast<std::size_t>(id)) = 1;
  for (std::size_t t = 0; t < kTagCount; ++t) mask[static_cast<std::size_t>(vocab.tag_id(static_cast<Tag>(t)))] = 1;
  return mask;
}

}  // namespace neuron
