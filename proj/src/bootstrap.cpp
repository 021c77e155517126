#include "neuron/bootstrap.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_map>

#include "neuron/errors.hpp"
#include "neuron/lexicons.hpp"

namespace neuron {

namespace lexicons {

std::unordered_set<std::string> parse_word_list(std::string_view text) {
  std::unordered_set<std::string> words;
  for (const auto& line : [&] {
         std::vector<std::string> lines;
         std::size_t s = 0;
         while (s < text.size()) {
           auto e = text.find('\n', s);
           if (e == std::string_view::npos) e = text.size();
           lines.emplace_back(text.substr(s, e - s));
           s = e + 1;
         }
         return lines;
       }()) {
    std::string w = line;
    while (!w.empty() && (w.back() == '\r' || w.back() == ' ')) w.pop_back();
    if (w.empty() || w[0] == '#') continue;
    words.insert(w);
  }
  return words;
}

}  // namespace lexicons

const WordSet& default_stopwords() {
  static const WordSet words = lexicons::parse_word_list(lexicons::stopwords_text());
  return words;
}

namespace {

bool all_punct(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::ispunct(static_cast<unsigned char>(c)); });
}

SurfacePattern default_pattern() {
  using C = TokenClass;
  using Q = Quantifier;
  return SurfacePattern{
      "np-verb-rest",
      {
          {{C::Det}, Q::Optional, Role::Arg1},
          {{C::Content}, Q::Plus, Role::Arg1},
          {{C::Verb}, Q::Plus, Role::Rel},
          {{C::Prep}, Q::Star, Role::Rel},
          {{C::Det, C::Stop, C::Content, C::Verb, C::Prep}, Q::Plus, Role::Arg2},
      }};
}

}  // namespace

SeedExtractor::SeedExtractor()
    : SeedExtractor(lexicons::parse_word_list(lexicons::verbs_text()),
                    lexicons::parse_word_list(lexicons::prepositions_text()),
                    {"the", "a", "an", "our", "your", "this", "that", "these", "those", "its", "their", "my"},
                    {"it", "they", "this", "that", "he", "she"}, default_stopwords(), {default_pattern()}) {}

SeedExtractor::SeedExtractor(WordSet verbs, WordSet prepositions, WordSet determiners, WordSet pronouns,
                             WordSet stopwords, std::vector<SurfacePattern> patterns)
    : verbs_(std::move(verbs)),
      preps_(std::move(prepositions)),
      dets_(std::move(determiners)),
      pronouns_(std::move(pronouns)),
      stop_(std::move(stopwords)),
      patterns_(std::move(patterns)) {}

TokenClass SeedExtractor::classify(const std::string& token) const {
  if (all_punct(token)) return TokenClass::Punct;
  if (verbs_.count(token)) return TokenClass::Verb;
  if (preps_.count(token)) return TokenClass::Prep;
  if (dets_.count(token)) return TokenClass::Det;
  if (stop_.count(token)) return TokenClass::Stop;
  return TokenClass::Content;
}

std::vector<std::vector<std::string>> SeedExtractor::clauses(std::span<const std::string> tokens) const {
  std::vector<std::vector<std::string>> out(1);
  for (const auto& t : tokens) {
    if (classify(t) == TokenClass::Punct) {
      if (!out.back().empty()) out.emplace_back();
    } else {
      out.back().push_back(t);
    }
  }
  if (out.back().empty()) out.pop_back();
  return out;
}

bool SeedExtractor::match_at(const SurfacePattern& p, std::span<const std::string> clause, std::size_t start,
                             Triple& out) const {
  Triple t;
  std::size_t pos = start;
  for (const auto& m : p.matchers) {
    std::size_t taken = 0;
    const std::size_t limit = (m.quantifier == Quantifier::One || m.quantifier == Quantifier::Optional) ? 1 : SIZE_MAX;
    while (pos < clause.size() && taken < limit &&
           std::find(m.classes.begin(), m.classes.end(), classify(clause[pos])) != m.classes.end()) {
      Tokens* dst = m.role == Role::Arg1 ? &t.arg1 : m.role == Role::Rel ? &t.rel : m.role == Role::Arg2 ? &t.arg2 : nullptr;
      if (dst) dst->push_back(clause[pos]);
      ++pos;
      ++taken;
    }
    const bool need_one = m.quantifier == Quantifier::One || m.quantifier == Quantifier::Plus;
    if (need_one && taken == 0) return false;
  }
  if (t.arg1.empty() || t.rel.empty() || t.arg2.empty()) return false;
  out = std::move(t);
  return true;
}

std::vector<Triple> SeedExtractor::extract_text(std::span<const std::string> tokens) const {
  std::vector<Triple> out;
  for (const auto& clause : clauses(tokens)) {
    for (std::size_t i = 0; i < clause.size(); ++i) {
      const TokenClass c = classify(clause[i]);
      if (c != TokenClass::Det && c != TokenClass::Content) continue;
      if (i > 0) {
        const TokenClass prev = classify(clause[i - 1]);
        if (prev == TokenClass::Content || prev == TokenClass::Det) continue;  // not the start of a noun phrase
      }
      Triple t;
      bool matched = false;
      for (const auto& p : patterns_) {
        if (match_at(p, clause, i, t)) {
          matched = true;
          break;
        }
      }
      if (matched) {
        out.push_back(std::move(t));
        break;
      }
    }
  }
  return out;
}

Tokens SeedExtractor::last_noun_phrase(std::span<const std::string> tokens) const {
  Tokens best;
  for (const auto& clause : clauses(tokens)) {
    std::size_t i = 0;
    while (i < clause.size()) {
      std::size_t j = i;
      if (classify(clause[j]) == TokenClass::Det) ++j;
      std::size_t k = j;
      while (k < clause.size() && classify(clause[k]) == TokenClass::Content) ++k;
      if (k > j) {
        best.assign(clause.begin() + static_cast<std::ptrdiff_t>(i), clause.begin() + static_cast<std::ptrdiff_t>(k));
        i = k;
      } else {
        i = j + 1;
      }
    }
  }
  return best;
}

std::vector<Triple> SeedExtractor::extract(const TextPair& pair) const {
  std::vector<Triple> found = extract_text(pair.question);
  for (auto& t : extract_text(pair.answer)) found.push_back(std::move(t));

  const Tokens subject = last_noun_phrase(pair.question);
  if (!subject.empty()) {
    for (const auto& clause : clauses(pair.answer)) {
      if (clause.size() < 2 || !pronouns_.count(clause[0]) || classify(clause[1]) != TokenClass::Verb) continue;
      Tokens joined = subject;
      joined.insert(joined.end(), clause.begin() + 1, clause.end());
      for (auto& t : extract_text(joined)) found.push_back(std::move(t));
    }
  }

  std::vector<Triple> unique;
  for (auto& t : found) {
    if (std::find(unique.begin(), unique.end(), t) == unique.end()) unique.push_back(std::move(t));
  }
  return unique;
}

std::vector<TupleCount> count_tuples(std::span<const Triple> tuples) {
  std::vector<TupleCount> counts;
  std::map<Triple, std::size_t> index;
  for (const auto& t : tuples) {
    auto [it, inserted] = index.try_emplace(t, counts.size());
    if (inserted) counts.push_back({t, 0});
    ++counts[it->second].count;
  }
  return counts;
}

std::vector<Triple> frequency_filter(std::span<const Triple> tuples, std::size_t min_count, std::size_t max_count) {
  std::vector<Triple> kept;
  for (const auto& tc : count_tuples(tuples)) {
    if (tc.count >= min_count && tc.count <= max_count) kept.push_back(tc.triple);
  }
  return kept;
}

Tokens content_words(const Triple& t, const WordSet& stopwords) {
  Tokens out;
  for (const Tokens* span : {&t.arg1, &t.rel, &t.arg2}) {
    for (const auto& w : *span) {
      if (stopwords.count(w) || all_punct(w)) continue;
      if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
    }
  }
  return out;
}

namespace {

bool contains(const Tokens& haystack, const std::string& w) {
  return std::find(haystack.begin(), haystack.end(), w) != haystack.end();
}

}  // namespace

std::vector<std::size_t> retrieve_pairs(const Triple& t, std::span<const TextPair> corpus, const WordSet& stopwords) {
  const Tokens words = content_words(t, stopwords);
  if (words.empty()) throw DataError("retrieve_pairs: tuple '" + to_string(t) + "' has no content words");
  std::vector<std::size_t> hits;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& p = corpus[i];
    if (std::all_of(words.begin(), words.end(),
                    [&](const std::string& w) { return contains(p.question, w) || contains(p.answer, w); })) {
      hits.push_back(i);
    }
  }
  return hits;
}

std::string_view instance_type_name(InstanceType t) {
  switch (t) {
    case InstanceType::QuestionOnly:
      return "question-only";
    case InstanceType::AnswerOnly:
      return "answer-only";
    case InstanceType::Ambiguous:
      return "ambiguous";
    case InstanceType::Joint:
      return "joint";
  }
  return "?";
}

InstanceType parse_instance_type(std::string_view name) {
  for (std::size_t i = 0; i < kInstanceTypeCount; ++i) {
    if (instance_type_name(static_cast<InstanceType>(i)) == name) return static_cast<InstanceType>(i);
  }
  throw DataError("unknown instance type '" + std::string(name) + "'");
}

InstanceType classify_instance(const Triple& t, const TextPair& pair, const WordSet& stopwords) {
  const Tokens words = content_words(t, stopwords);
  bool in_q = true;
  bool in_a = true;
  for (const auto& w : words) {
    const bool q = contains(pair.question, w);
    const bool a = contains(pair.answer, w);
    if (!q && !a) throw DataError("classify_instance: '" + w + "' absent from pair " + pair.id);
    in_q = in_q && q;
    in_a = in_a && a;
  }
  if (in_q && in_a) return InstanceType::Ambiguous;
  if (in_q) return InstanceType::QuestionOnly;
  if (in_a) return InstanceType::AnswerOnly;
  return InstanceType::Joint;
}

bool tokens_covered(const Triple& t, const TextPair& pair) {
  for (const Tokens* span : {&t.arg1, &t.rel, &t.arg2}) {
    for (const auto& w : *span) {
      if (!contains(pair.question, w) && !contains(pair.answer, w)) return false;
    }
  }
  return true;
}

namespace {

std::string percent(std::size_t part, std::size_t whole) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", whole ? 100.0 * static_cast<double>(part) / static_cast<double>(whole) : 0.0);
  return buf;
}

std::string row(std::string_view label, std::size_t count, std::size_t total) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-28s %8zu %8s\n", std::string(label).c_str(), count, percent(count, total).c_str());
  return buf;
}

std::string type_rows(const std::array<std::size_t, kInstanceTypeCount>& counts) {
  static constexpr std::array<std::string_view, kInstanceTypeCount> labels = {
      "Exclusively from question", "Exclusively from answer", "Ambiguous", "Jointly from Q-A"};
  std::size_t total = 0;
  for (auto c : counts) total += c;
  char head[128];
  std::snprintf(head, sizeof head, "%-28s %8s %8s\n", "Instance type", "Count", "Share");
  std::string out = head;
  for (std::size_t i = 0; i < kInstanceTypeCount; ++i) out += row(labels[i], counts[i], total);
  out += row("Total", total, total);
  return out;
}

}  // namespace

std::string BootstrapReport::type_table() const { return type_rows(by_type); }

std::string BootstrapReport::stage_table() const {
  char buf[640];
  std::snprintf(buf, sizeof buf,
                "pairs                 %zu\n"
                "seed mentions         %zu\n"
                "tuples: distinct      %zu\n"
                "tuples: frequent      %zu\n"
                "tuples: retrieved     %zu\n"
                "instances: retrieved  %zu\n"
                "instances: sound      %zu\n",
                pairs, seed_mentions, distinct_tuples, frequent_tuples, retrieved_tuples, retrieved_instances,
                sound_instances);
  return buf;
}

std::string SynthCorpus::type_table() const { return type_rows(template_counts); }

BootstrapResult bootstrap(std::span<const TextPair> corpus, const SeedExtractor& extractor, const WordSet& stopwords,
                          const BootstrapConfig& cfg) {
  if (cfg.min_count > cfg.max_count) throw ConfigError("bootstrap.min_count exceeds bootstrap.max_count");
  BootstrapResult result;
  auto& rep = result.report;
  rep.pairs = corpus.size();

  std::vector<Triple> mentions;
  for (const auto& p : corpus) {
    for (auto& t : extractor.extract(p)) mentions.push_back(std::move(t));
  }
  rep.seed_mentions = mentions.size();
  rep.distinct_tuples = count_tuples(mentions).size();

  std::vector<Triple> frequent;
  for (auto& t : frequency_filter(mentions, cfg.min_count, cfg.max_count)) {
    if (!content_words(t, stopwords).empty()) frequent.push_back(std::move(t));
  }
  rep.frequent_tuples = frequent.size();

  struct Hit {
    std::size_t pair;
    std::size_t tuple;
  };
  std::vector<Hit> hits;
  for (std::size_t ti = 0; ti < frequent.size(); ++ti) {
    auto found = retrieve_pairs(frequent[ti], corpus, stopwords);
    if (!found.empty()) ++rep.retrieved_tuples;
    for (std::size_t pi : found) hits.push_back({pi, ti});
  }
  rep.retrieved_instances = hits.size();
  std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.pair < b.pair; });

  for (const auto& h : hits) {
    const auto& pair = corpus[h.pair];
    const auto& t = frequent[h.tuple];
    if (!tokens_covered(t, pair)) continue;
    const InstanceType type = classify_instance(t, pair, stopwords);
    ++rep.by_type[static_cast<std::size_t>(type)];
    result.instances.push_back({pair.id, t, type});
  }
  rep.sound_instances = result.instances.size();
  return result;
}

std::string_view split_name(Split s) {
  switch (s) {
    case Split::Train:
      return "train";
    case Split::Dev:
      return "dev";
    case Split::Test:
      return "test";
  }
  return "?";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "dev") return Split::Dev;
  if (name == "test") return Split::Test;
  throw DataError("unknown split '" + std::string(name) + "'");
}

}  // namespace neuron
