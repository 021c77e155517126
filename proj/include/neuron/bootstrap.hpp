#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "neuron/text.hpp"

namespace neuron {

using WordSet = std::unordered_set<std::string>;

// Fixed stopword list shipped with the library.
const WordSet& default_stopwords();

enum class TokenClass : std::uint8_t { Punct, Verb, Prep, Det, Stop, Content };

enum class Role : std::uint8_t { None, Arg1, Rel, Arg2 };

enum class Quantifier : std::uint8_t { One, Optional, Star, Plus };

// One element of a surface pattern: a set of accepted token classes, how
// many tokens it may consume, and which tuple slot receives them.
struct Matcher {
  std::vector<TokenClass> classes;
  Quantifier quantifier = Quantifier::One;
  Role role = Role::None;
};

struct SurfacePattern {
  std::string name;
  std::vector<Matcher> matchers;
};

// Deterministic pattern-based stand-in for an external OpenIE system.
// Patterns are matched greedily inside punctuation-delimited clauses.
class SeedExtractor {
 public:
  // Default lexicons and the single NP + verb group + trailing span pattern.
  SeedExtractor();
  SeedExtractor(WordSet verbs, WordSet prepositions, WordSet determiners, WordSet pronouns, WordSet stopwords,
                std::vector<SurfacePattern> patterns);

  TokenClass classify(const std::string& token) const;

  // Matches on one token stream (no q/a concatenation).
  std::vector<Triple> extract_text(std::span<const std::string> tokens) const;

  // Patterns on q, on a, and on the question's last noun phrase substituted
  // for a leading pronoun of an answer clause. Deduplicated, first-seen
  // order.
  std::vector<Triple> extract(const TextPair& pair) const;

  const std::vector<SurfacePattern>& patterns() const noexcept { return patterns_; }

 private:
  std::vector<std::vector<std::string>> clauses(std::span<const std::string> tokens) const;
  bool match_at(const SurfacePattern& p, std::span<const std::string> clause, std::size_t start, Triple& out) const;
  Tokens last_noun_phrase(std::span<const std::string> tokens) const;

  WordSet verbs_;
  WordSet preps_;
  WordSet dets_;
  WordSet pronouns_;
  WordSet stop_;
  std::vector<SurfacePattern> patterns_;
};

struct TupleCount {
  Triple triple;
  std::size_t count = 0;
};

// Counts tuples, first-seen order.
std::vector<TupleCount> count_tuples(std::span<const Triple> tuples);

// Keeps tuples with min_count <= count <= max_count, in first-seen order.
std::vector<Triple> frequency_filter(std::span<const Triple> tuples, std::size_t min_count = 5,
                                     std::size_t max_count = 100);

// Non-stopword tokens of all three spans, deduplicated, in order.
Tokens content_words(const Triple& t, const WordSet& stopwords);

// Pairs whose q or a contain every content word of t. Throws DataError when
// t has no content word.
std::vector<std::size_t> retrieve_pairs(const Triple& t, std::span<const TextPair> corpus, const WordSet& stopwords);

enum class InstanceType : std::uint8_t { QuestionOnly, AnswerOnly, Ambiguous, Joint };
inline constexpr std::size_t kInstanceTypeCount = 4;
std::string_view instance_type_name(InstanceType t);
InstanceType parse_instance_type(std::string_view name);

// Which side(s) of the pair carry the tuple's content words. Throws
// DataError if q and a together do not contain them all.
InstanceType classify_instance(const Triple& t, const TextPair& pair, const WordSet& stopwords);

struct BootstrapInstance {
  std::string pair_id;
  Triple target;
  InstanceType type = InstanceType::Joint;
};

struct BootstrapConfig {
  std::size_t min_count = 5;
  std::size_t max_count = 100;
};

struct BootstrapReport {
  std::size_t pairs = 0;
  std::size_t seed_mentions = 0;
  std::size_t distinct_tuples = 0;
  std::size_t frequent_tuples = 0;
  std::size_t retrieved_tuples = 0;
  std::size_t retrieved_instances = 0;
  std::size_t sound_instances = 0;
  std::array<std::size_t, kInstanceTypeCount> by_type{};

  // Plain-text table with one row per instance type.
  std::string type_table() const;
  std::string stage_table() const;
};

struct BootstrapResult {
  std::vector<BootstrapInstance> instances;
  BootstrapReport report;
};

// seed_extract -> frequency_filter -> retrieve_pairs -> classify_instance.
// Instances whose target has a token absent from the pair are dropped.
// Output is ordered by pair position in the corpus, then by tuple.
BootstrapResult bootstrap(std::span<const TextPair> corpus, const SeedExtractor& extractor, const WordSet& stopwords,
                          const BootstrapConfig& cfg);

// True iff every target token occurs in q or a.
bool tokens_covered(const Triple& t, const TextPair& pair);

// --- Synthetic corpus -------------------------------------------------------

enum class Split : std::uint8_t { Train, Dev, Test };
std::string_view split_name(Split s);
Split parse_split(std::string_view name);

struct RawPair {
  std::string id;
  std::string question;
  std::string answer;
};

struct SynthConfig {
  std::size_t pairs = 2000;
  std::size_t relations = 20;
  std::size_t entities = 200;
  // Probability that a pair gets an irrelevant sentence added to its answer.
  double noise_rate = 0.2;
  double dev_fraction = 0.1;
  double test_fraction = 0.1;
  std::uint64_t seed = 7;

  void validate() const;
};

struct SynthCorpus {
  std::vector<RawPair> pairs;
  std::map<std::string, std::vector<Triple>> gold;
  std::map<std::string, Split> split;
  // Template type used for each generated pair.
  std::array<std::size_t, kInstanceTypeCount> template_counts{};
  std::size_t noise_sentences = 0;

  std::string type_table() const;
};

// Facts (entity, relation, value) rendered through question/answer templates
// of the four instance types, optionally with filler or distractor
// sentences. Deterministic in the seed; splits are disjoint by pair.
SynthCorpus generate_synthetic(const SynthConfig& cfg);

// Synthetic lexicons, exposed for tests.
std::span<const std::string_view> synthetic_relations();

}  // namespace neuron
