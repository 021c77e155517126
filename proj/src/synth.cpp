#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "neuron/bootstrap.hpp"
#include "neuron/errors.hpp"
#include "neuron/rng.hpp"

namespace neuron {
namespace {

constexpr std::array<std::string_view, 10> kModifiers = {"rooftop", "main", "north", "south", "east",
                                                          "west", "indoor", "outdoor", "lakeside", "upper"};
constexpr std::array<std::string_view, 20> kHeads = {"pool",    "gym",     "spa",    "restaurant", "bar",
                                                      "lounge",  "cafe",    "sauna",  "library",    "garden",
                                                      "terrace", "boutique", "laundry", "theater",  "arcade",
                                                      "salon",   "deli",    "bakery", "courtyard",  "playroom"};

constexpr std::array<std::string_view, 8> kMorning = {"6:00am", "6:30am", "7:00am", "7:30am",
                                                      "8:00am", "9:00am", "10:00am", "11:00am"};
constexpr std::array<std::string_view, 8> kEvening = {"5:00pm", "6:00pm", "7:30pm", "8:00pm",
                                                      "9:00pm", "10:00pm", "11:00pm", "midnight"};

struct RelationSpec {
  std::string_view phrase;
  std::vector<std::string_view> values;
};

const std::vector<RelationSpec>& relation_specs() {
  static const std::vector<RelationSpec> specs = {
      {"opens at", {kMorning.begin(), kMorning.end()}},
      {"closes at", {kEvening.begin(), kEvening.end()}},
      {"is located on", {"floor 2", "floor 3", "floor 4", "floor 5", "level 1", "level 6", "floor 7"}},
      {"is located near", {"main entrance", "west wing", "elevator bank", "parking garage", "front desk"}},
      {"is open until", {kEvening.begin(), kEvening.end()}},
      {"offers", {"free wifi", "daily classes", "towel service", "guided tours", "happy hour specials"}},
      {"serves", {"breakfast", "brunch", "cocktails", "vegan dishes", "espresso", "light snacks"}},
      {"costs", {"15 dollars", "20 dollars", "25 dollars", "30 dollars", "40 dollars", "50 dollars"}},
      {"starts at", {kMorning.begin(), kMorning.end()}},
      {"ends at", {kEvening.begin(), kEvening.end()}},
      {"charges", {"5 dollars per visit", "10 dollars per day", "2 dollars per hour", "12 dollars per night"}},
      {"provides", {"fresh towels", "bottled water", "beach chairs", "yoga mats", "umbrellas"}},
      {"includes", {"steam room", "hot tub", "kids area", "outdoor seating", "massage chairs"}},
      {"accepts", {"credit cards", "reservations", "walk ins", "room charges"}},
      {"is closed on", {"mondays", "tuesdays", "holidays", "sundays", "weekends"}},
      {"requires", {"reservations", "proper footwear", "room keys", "photo id", "advance booking"}},
      {"has", {"heated water", "ocean views", "live music", "free parking", "dress code"}},
      {"features", {"live jazz", "local art", "craft beer", "stone fireplace", "board games"}},
      {"is next to", {"main lobby", "gift shop", "fitness room", "business center"}},
      {"allows", {"pets", "children", "outside food", "day guests"}},
  };
  return specs;
}

const std::vector<std::string_view>& relation_phrases() {
  static const std::vector<std::string_view> phrases = [] {
    std::vector<std::string_view> v;
    for (const auto& s : relation_specs()) v.push_back(s.phrase);
    return v;
  }();
  return phrases;
}

constexpr std::array<std::string_view, 4> kFillers = {
    "Thank you for your question.", "I am sorry for the delay.", "Please let us know if you need anything else!",
    "Have a wonderful stay."};
constexpr std::array<std::string_view, 6> kDistractorTails = {"very popular", "quite busy today", "recently renovated",
                                                              "a guest favorite", "really lovely", "worth a visit"};

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

Tokens words(std::string_view s) {
  Tokens out;
  std::size_t i = 0;
  while (i < s.size()) {
    auto j = s.find(' ', i);
    if (j == std::string_view::npos) j = s.size();
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j + 1;
  }
  return out;
}

std::string entity_name(std::size_t k) {
  std::string name = std::string(kModifiers[k % kModifiers.size()]) + " " +
                     std::string(kHeads[(k / kModifiers.size()) % kHeads.size()]);
  const std::size_t round = k / (kModifiers.size() * kHeads.size());
  if (round > 0) name += " " + std::to_string(round + 1);
  return name;
}

template <class Container>
std::string_view pick(Rng& rng, const Container& c) {
  return c[rng.index(c.size())];
}

}  // namespace

std::span<const std::string_view> synthetic_relations() { return relation_phrases(); }

void SynthConfig::validate() const {
  if (relations == 0 || relations > relation_specs().size()) {
    throw ConfigError("synth.relations must be in [1, " + std::to_string(relation_specs().size()) + "]");
  }
  if (entities == 0) throw ConfigError("synth.entities must be positive");
  if (noise_rate < 0.0 || noise_rate > 1.0) throw ConfigError("synth.noise_rate must be in [0, 1]");
  if (dev_fraction < 0.0 || test_fraction < 0.0 || dev_fraction + test_fraction > 1.0) {
    throw ConfigError("synth dev/test fractions must be non-negative and sum to at most 1");
  }
}

SynthCorpus generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const auto& specs = relation_specs();

  struct Fact {
    std::string entity;  // with determiner
    std::string relation;
    std::string value;
  };
  std::vector<Fact> facts;
  for (std::size_t k = 0; k < cfg.entities; ++k) {
    const auto& spec = specs[k % cfg.relations];
    facts.push_back({"the " + entity_name(k), std::string(spec.phrase), std::string(pick(rng, spec.values))});
  }

  // Template shares loosely follow the mix of instance types seen in real
  // cQA data: many ambiguous and joint pairs, fewer question-only ones.
  constexpr std::array<double, kInstanceTypeCount> kTypeWeights = {0.15, 0.25, 0.30, 0.30};

  SynthCorpus corpus;
  for (std::size_t i = 0; i < cfg.pairs; ++i) {
    const Fact& f = facts[i % facts.size()];
    const std::string clause = f.entity + " " + f.relation + " " + f.value;
    double u = rng.uniform();
    std::size_t type = 0;
    while (type + 1 < kInstanceTypeCount && u >= kTypeWeights[type]) u -= kTypeWeights[type++];

    std::string q;
    std::string a;
    switch (static_cast<InstanceType>(type)) {
      case InstanceType::QuestionOnly:
        q = "I heard " + clause + ", is that right?";
        a = std::string(pick(rng, std::array<std::string_view, 3>{"Yes, correct.", "Yes indeed.", "Correct!"}));
        break;
      case InstanceType::AnswerOnly: {
        const std::array<std::string, 3> asks = {"Can you tell me about " + f.entity + "?",
                                                 "Any details on " + f.entity + "?",
                                                 "Question about " + f.entity + " please."};
        q = asks[rng.index(asks.size())];
        a = capitalize(clause) + ".";
        break;
      }
      case InstanceType::Ambiguous:
        q = "Is it true " + clause + "?";
        a = "Yes, " + clause + ".";
        break;
      case InstanceType::Joint: {
        const std::array<std::string, 2> asks = {"What about " + f.entity + "?", "Tell me about " + f.entity + "."};
        q = asks[rng.index(asks.size())];
        a = "It " + f.relation + " " + f.value + ".";
        break;
      }
    }
    ++corpus.template_counts[type];

    if (rng.bernoulli(cfg.noise_rate)) {
      std::string noise;
      if (rng.bernoulli(0.5)) {
        noise = std::string(pick(rng, kFillers));
      } else {
        const std::size_t other = rng.index(facts.size());
        noise = capitalize(facts[other].entity) + " is " + std::string(pick(rng, kDistractorTails)) + ".";
      }
      a = rng.bernoulli(0.5) ? noise + " " + a : a + " " + noise;
      ++corpus.noise_sentences;
    }

    char id[32];
    std::snprintf(id, sizeof id, "qa%05zu", i + 1);
    corpus.pairs.push_back({id, q, a});
    corpus.gold[id] = {Triple{words(f.entity), words(f.relation), words(f.value)}};
  }

  std::vector<std::size_t> order(cfg.pairs);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order.begin(), order.end());
  const auto n = static_cast<double>(cfg.pairs);
  const auto n_test = static_cast<std::size_t>(std::llround(n * cfg.test_fraction));
  const auto n_dev = static_cast<std::size_t>(std::llround(n * cfg.dev_fraction));
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Split s = k < n_test ? Split::Test : k < n_test + n_dev ? Split::Dev : Split::Train;
    corpus.split[corpus.pairs[order[k]].id] = s;
  }
  return corpus;
}

}  // namespace neuron
