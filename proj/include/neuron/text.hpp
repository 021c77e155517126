#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace neuron {

using TokenId = std::int32_t;
using Tokens = std::vector<std::string>;

// Lowercases, splits on whitespace, and peels punctuation into separate
// tokens. A chunk containing a digit keeps its internal punctuation, so
// "6:00am" survives as one token while "daily." becomes "daily" ".".
Tokens tokenize(std::string_view text);

// Joins tokens with single spaces.
std::string join(std::span<const std::string> tokens);

// Structural tags of the linearized tuple, in vocabulary order after pad/unk.
enum class Tag : std::uint8_t { Arg1Open, Arg1Close, RelOpen, RelClose, Arg2Open, Arg2Close, End };
inline constexpr std::size_t kTagCount = 7;
inline constexpr std::array<std::string_view, kTagCount> kTagStrings = {
    "<arg1>", "</arg1>", "<rel>", "</rel>", "<arg2>", "</arg2>", "</S>"};
inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kUnkToken = "<unk>";
// pad, unk, then the seven tags.
inline constexpr std::size_t kSpecialCount = 2 + kTagCount;

class Vocabulary {
 public:
  // Vocabulary holding only the specials.
  Vocabulary();

  // Builds from already-tokenized texts. Keeps the most frequent tokens up to
  // max_size entries in total (specials included); ties go to the token seen
  // first. max_size must exceed kSpecialCount.
  static Vocabulary build(std::span<const Tokens> corpus, std::size_t max_size);

  // Specials must occupy ids 0..8 in the fixed order; throws ParseError otherwise.
  static Vocabulary from_entries(std::vector<std::string> entries);

  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<std::string>& entries() const noexcept { return entries_; }
  const std::string& token(TokenId id) const { return entries_.at(static_cast<std::size_t>(id)); }

  // Returns unk_id() for unknown tokens.
  TokenId id(std::string_view token) const;
  bool contains(std::string_view token) const;

  TokenId pad_id() const noexcept { return 0; }
  TokenId unk_id() const noexcept { return 1; }
  TokenId tag_id(Tag t) const noexcept { return static_cast<TokenId>(2 + static_cast<int>(t)); }
  TokenId end_id() const noexcept { return tag_id(Tag::End); }
  bool is_tag(TokenId id) const noexcept { return id >= 2 && id < static_cast<TokenId>(kSpecialCount); }

  std::vector<TokenId> encode(std::span<const std::string> tokens) const;

  // One token per line; line number is the id.
  std::string serialize() const;
  static Vocabulary parse(std::string_view text);

 private:
  void add(std::string token);

  std::vector<std::string> entries_;
  std::unordered_map<std::string, TokenId> index_;
};

struct QAPair {
  std::string id;
  std::vector<TokenId> q_tokens;
  std::vector<TokenId> a_tokens;
};

// Tokenized but not yet vocabulary-encoded pair.
struct TextPair {
  std::string id;
  Tokens question;
  Tokens answer;
};

QAPair encode_pair(const Vocabulary& vocab, const TextPair& pair);

struct Triple {
  Tokens arg1;
  Tokens rel;
  Tokens arg2;

  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

// Joined as "arg1 | rel | arg2"; used for logging and as a map key.
std::string to_string(const Triple& t);

struct TaggedSequence {
  std::vector<TokenId> tokens;
};

// <arg1> arg1 </arg1> <rel> rel </rel> <arg2> arg2 </arg2> </S>.
// Throws DataError if a span is empty or contains a tag string.
TaggedSequence linearize(const Triple& t, const Vocabulary& vocab);

// Exact inverse of linearize. Throws MalformedSequence on the first grammar
// violation.
Triple delinearize(std::span<const TokenId> sequence, const Vocabulary& vocab);

// Same grammar check without building the Triple.
bool is_well_formed(std::span<const TokenId> sequence, const Vocabulary& vocab);

// mask[i] = 1 iff token i occurs in q or a, or i is a tag.
std::vector<std::uint8_t> input_mask(const Vocabulary& vocab, const QAPair& pair);

}  // namespace neuron
