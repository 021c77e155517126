#include <algorithm>
#include <set>

#include "doctest.h"
#include "neuron/bootstrap.hpp"
#include "neuron/errors.hpp"

using namespace neuron;

namespace {

Triple tri(std::string a, std::string r, std::string b) { return {tokenize(a), tokenize(r), tokenize(b)}; }

TextPair pair(std::string id, std::string q, std::string a) { return {std::move(id), tokenize(q), tokenize(a)}; }

}  // namespace

TEST_CASE("seed extractor finds noun verb-group tuples") {
  const SeedExtractor e;
  CHECK(e.extract_text(tokenize("the pool opens at 6am")) == std::vector<Triple>{tri("the pool", "opens at", "6am")});
  CHECK(e.extract_text(tokenize("the gym is located on the third floor.")) ==
        std::vector<Triple>{tri("the gym", "is located on", "the third floor")});
  CHECK(e.extract_text(tokenize("yes")).empty());
  CHECK(e.extract_text(tokenize("thanks , see you soon")).empty());
  CHECK(e.extract_text(Tokens{}).empty());
  // a bare pronoun is not an argument on its own
  CHECK(e.extract_text(tokenize("it opens at 6am")).empty());
}

TEST_CASE("pair extraction resolves a leading pronoun and deduplicates") {
  const SeedExtractor e;
  CHECK(e.extract(pair("x", "when does the pool open?", "it opens at 6am.")) ==
        std::vector<Triple>{tri("the pool", "opens at", "6am")});
  const auto twice = e.extract(pair("y", "the pool opens at 6am?", "the pool opens at 6am."));
  CHECK(twice == std::vector<Triple>{tri("the pool", "opens at", "6am")});
}

TEST_CASE("token classes") {
  const SeedExtractor e;
  CHECK(e.classify(",") == TokenClass::Punct);
  CHECK(e.classify("opens") == TokenClass::Verb);
  CHECK(e.classify("at") == TokenClass::Prep);
  CHECK(e.classify("the") == TokenClass::Det);
  CHECK(e.classify("pool") == TokenClass::Content);
}

TEST_CASE("frequency filter keeps the inclusive band") {
  const auto a = tri("a", "is", "b"), b = tri("c", "is", "d"), c = tri("e", "is", "f"), d = tri("g", "is", "h");
  std::vector<Triple> mentions;
  for (int i = 0; i < 4; ++i) mentions.push_back(a);
  for (int i = 0; i < 5; ++i) mentions.push_back(b);
  for (int i = 0; i < 100; ++i) mentions.push_back(c);
  for (int i = 0; i < 101; ++i) mentions.push_back(d);
  const auto kept = frequency_filter(mentions, 5, 100);
  CHECK(kept == std::vector<Triple>{b, c});
  // filtering a kept list again with counts of one keeps nothing new
  CHECK(frequency_filter(kept, 1, 100) == kept);
  const auto counts = count_tuples(mentions);
  REQUIRE(counts.size() == 4);
  CHECK(counts[0].count == 4);
  CHECK(counts[3].count == 101);
  CHECK(frequency_filter(std::vector<Triple>{}, 5, 100).empty());
}

TEST_CASE("retrieval needs every content word on some side") {
  const auto& stop = default_stopwords();
  const std::vector<TextPair> corpus{pair("1", "when does the pool open?", "the pool opens at 6am."),
                                     pair("2", "is the pool heated?", "yes it is."),
                                     pair("3", "when does it open?", "the pool opens at 6am daily.")};
  const auto t = tri("the pool", "opens at", "6am");
  CHECK(content_words(t, stop) == Tokens{"pool", "opens", "6am"});
  CHECK(retrieve_pairs(t, corpus, stop) == std::vector<std::size_t>{0, 2});
  CHECK_THROWS_AS(retrieve_pairs(tri("the", "is", "at"), corpus, stop), DataError);
}

TEST_CASE("instance types follow where the content words are") {
  const auto& stop = default_stopwords();
  const auto t = tri("the pool", "opens at", "6am");
  CHECK(classify_instance(t, pair("q", "the pool opens at 6am?", "sure."), stop) == InstanceType::QuestionOnly);
  CHECK(classify_instance(t, pair("a", "hours?", "the pool opens at 6am."), stop) == InstanceType::AnswerOnly);
  CHECK(classify_instance(t, pair("b", "the pool opens at 6am?", "yes the pool opens at 6am."), stop) ==
        InstanceType::Ambiguous);
  CHECK(classify_instance(t, pair("j", "when does the pool open?", "it opens at 6am."), stop) == InstanceType::Joint);
  CHECK_THROWS_AS(classify_instance(t, pair("x", "is there a gym?", "yes."), stop), DataError);
  for (auto type : {InstanceType::QuestionOnly, InstanceType::AnswerOnly, InstanceType::Ambiguous, InstanceType::Joint}) {
    CHECK(parse_instance_type(instance_type_name(type)) == type);
  }
  CHECK(tokens_covered(t, pair("j", "when does the pool open?", "it opens at 6am.")));
  CHECK_FALSE(tokens_covered(tri("a pool", "opens at", "6am"), pair("j", "the pool opens at 6am?", "")));
}

TEST_CASE("synthetic corpus is deterministic and splits are disjoint") {
  SynthConfig c;
  c.pairs = 300;
  const auto a = generate_synthetic(c);
  const auto b = generate_synthetic(c);
  REQUIRE(a.pairs.size() == 300);
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    CHECK(a.pairs[i].id == b.pairs[i].id);
    CHECK(a.pairs[i].question == b.pairs[i].question);
    CHECK(a.pairs[i].answer == b.pairs[i].answer);
  }
  CHECK(a.gold == b.gold);
  CHECK(a.split.size() == 300);
  std::set<std::string> ids;
  for (const auto& p : a.pairs) ids.insert(p.id);
  CHECK(ids.size() == 300);
  std::array<std::size_t, 3> per{};
  for (const auto& [id, s] : a.split) ++per[static_cast<std::size_t>(s)];
  CHECK(per[0] == 240);
  CHECK(per[1] == 30);
  CHECK(per[2] == 30);
  c.seed = 8;
  const auto other = generate_synthetic(c);
  CHECK(other.gold != a.gold);
}

TEST_CASE("synthetic corpus edge settings") {
  SynthConfig c;
  c.pairs = 0;
  CHECK(generate_synthetic(c).pairs.empty());
  c.pairs = 200;
  c.noise_rate = 0.0;
  CHECK(generate_synthetic(c).noise_sentences == 0);
  c.noise_rate = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.noise_rate = 0.2;
  c.dev_fraction = 0.6;
  c.test_fraction = 0.6;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("gold tuples are covered by their pairs") {
  SynthConfig c;
  c.pairs = 400;
  const auto s = generate_synthetic(c);
  for (const auto& p : s.pairs) {
    const TextPair tp{p.id, tokenize(p.question), tokenize(p.answer)};
    for (const auto& t : s.gold.at(p.id)) CHECK(tokens_covered(t, tp));
  }
}

TEST_CASE("bootstrap on the default corpus yields every instance type") {
  const auto s = generate_synthetic(SynthConfig{});
  std::vector<TextPair> corpus;
  for (const auto& p : s.pairs) corpus.push_back({p.id, tokenize(p.question), tokenize(p.answer)});
  const auto r = bootstrap(corpus, SeedExtractor{}, default_stopwords(), BootstrapConfig{});
  CHECK(r.report.pairs == corpus.size());
  CHECK(r.report.sound_instances == r.instances.size());
  for (std::size_t t = 0; t < kInstanceTypeCount; ++t) CHECK(r.report.by_type[t] >= 1);
  for (const auto& inst : r.instances) {
    const auto it = std::find_if(corpus.begin(), corpus.end(), [&](const TextPair& p) { return p.id == inst.pair_id; });
    REQUIRE(it != corpus.end());
    CHECK(tokens_covered(inst.target, *it));
    CHECK(classify_instance(inst.target, *it, default_stopwords()) == inst.type);
  }
  CHECK(r.report.type_table().find("Jointly from Q-A") != std::string::npos);
}
