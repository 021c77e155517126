#pragma once

// Closed-form precision / pooled recall / relative coverage cases, shared by
// the unit suite and the acceptance runner.

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "neuron/errors.hpp"
#include "neuron/eval.hpp"
#include "neuron/rng.hpp"

namespace metric_cases {

using Case = std::pair<std::string, bool>;

inline neuron::Triple tuple_for(const std::string& id) { return {{"arg" + id}, {"is"}, {"value" + id}}; }

inline neuron::GoldSet gold_for(int pairs) {
  neuron::GoldSet g;
  for (int i = 1; i <= pairs; ++i) g[std::to_string(i)] = {tuple_for(std::to_string(i))};
  return g;
}

// Predicts the gold tuple for `correct` ids and a wrong tuple for `wrong` ids.
inline neuron::PredictionSet system(std::string name, const std::vector<int>& correct, const std::vector<int>& wrong = {}) {
  neuron::PredictionSet s{std::move(name), {}};
  for (int i : correct) s.predictions[std::to_string(i)] = tuple_for(std::to_string(i));
  for (int i : wrong) s.predictions[std::to_string(i)] = {{"nobody"}, {"is"}, {"here"}};
  return s;
}

inline bool same(std::optional<double> got, double want) { return got.has_value() && *got == want; }

inline std::vector<Case> formula_cases() {
  using namespace neuron;
  std::vector<Case> out;
  const auto g4 = gold_for(4);
  out.emplace_back("precision all correct = 1", precision(system("s", {1, 2, 3, 4}), g4) == 1.0);
  out.emplace_back("precision one wrong = 0.75", precision(system("s", {1, 2, 3}, {4}), g4) == 0.75);
  out.emplace_back("precision one missing = 0.75", precision(system("s", {1, 2, 3}), g4) == 0.75);
  bool threw = false;
  try {
    precision(system("s", {}), GoldSet{});
  } catch (const DataError&) {
    threw = true;
  }
  out.emplace_back("precision over no pairs is rejected", threw);

  {
    const std::vector<PredictionSet> one{system("s", {2}, {1, 3})};
    out.emplace_back("single system recall = 1", same(pooled_recall(one, g4).at("s"), 1.0));
    const std::vector<PredictionSet> ab{system("a", {1, 2}), system("b", {2, 3})};
    const auto r = pooled_recall(ab, g4);
    out.emplace_back("overlapping pool recall = 2/3", same(r.at("a"), 2.0 / 3.0) && same(r.at("b"), 2.0 / 3.0));
    const std::vector<PredictionSet> dis{system("a", {1}), system("b", {4})};
    const auto d = pooled_recall(dis, g4);
    out.emplace_back("disjoint singletons recall = 0.5", same(d.at("a"), 0.5) && same(d.at("b"), 0.5));
    const std::vector<PredictionSet> none{system("a", {}, {1}), system("b", {})};
    const auto n = pooled_recall(none, g4);
    out.emplace_back("empty pool recall is undefined", !n.at("a").has_value() && !n.at("b").has_value());
  }

  const std::set<std::string> n{"t1", "t2", "t3"}, b{"t2", "t4"}, empty;
  out.emplace_back("RC formula = 0.5", same(relative_coverage(n, b), 0.5));
  out.emplace_back("RC identical sets = 0", same(relative_coverage(n, n), 0.0));
  out.emplace_back("RC against empty baseline = 1", same(relative_coverage(n, empty), 1.0));
  out.emplace_back("RC of two empty sets is undefined", !relative_coverage(empty, empty).has_value());
  return out;
}

struct PairSweep {
  std::size_t pairs = 0;
  std::size_t violations = 0;
  std::size_t equality_mismatches = 0;
};

// RC(n,b) + RC(b,n) <= 1, with equality exactly when the sets are disjoint.
inline PairSweep rc_pair_sweep(std::size_t pairs, std::uint64_t seed) {
  neuron::Rng rng(seed);
  PairSweep s;
  while (s.pairs < pairs) {
    std::set<std::string> a, b;
    const std::size_t universe = 1 + rng.index(12);
    for (std::size_t i = 0; i < universe; ++i) {
      if (rng.uniform() < 0.5) a.insert("t" + std::to_string(i));
      if (rng.uniform() < 0.5) b.insert("t" + std::to_string(i));
    }
    const auto ab = neuron::relative_coverage(a, b);
    const auto ba = neuron::relative_coverage(b, a);
    if (!ab) continue;
    ++s.pairs;
    const double sum = *ab + *ba;
    if (sum > 1.0 + 1e-15 || *ab < 0.0 || *ab > 1.0) ++s.violations;
    bool disjoint = true;
    for (const auto& x : a) disjoint = disjoint && !b.count(x);
    if (disjoint != (std::abs(sum - 1.0) < 1e-15)) ++s.equality_mismatches;
  }
  return s;
}

}  // namespace metric_cases
