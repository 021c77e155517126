#include "neuron/eval.hpp"

#include <algorithm>
#include <cctype>

#include "neuron/errors.hpp"
#include "neuron/io.hpp"

namespace neuron {

std::string normalize_span(std::span<const std::string> tokens) {
  std::string joined;
  for (const auto& t : tokens) {
    for (char c : t) {
      const auto u = static_cast<unsigned char>(c);
      if (std::isspace(u)) {
        if (!joined.empty() && joined.back() != ' ') joined.push_back(' ');
      } else {
        joined.push_back(static_cast<char>(std::tolower(u)));
      }
    }
    if (!joined.empty() && joined.back() != ' ') joined.push_back(' ');
  }
  auto trim = [](unsigned char c) { return c == ' ' || std::ispunct(c); };
  std::size_t b = 0, e = joined.size();
  while (b < e && trim(static_cast<unsigned char>(joined[b]))) ++b;
  while (e > b && trim(static_cast<unsigned char>(joined[e - 1]))) --e;
  return joined.substr(b, e - b);
}

namespace {

struct NormalTriple {
  std::string a, r, b;
  bool operator==(const NormalTriple&) const = default;
};

NormalTriple normal(const Triple& t) { return {normalize_span(t.arg1), normalize_span(t.rel), normalize_span(t.arg2)}; }

}  // namespace

bool tuple_match(const Triple& pred, std::span<const Triple> golds) {
  const auto p = normal(pred);
  return std::any_of(golds.begin(), golds.end(), [&](const Triple& g) { return normal(g) == p; });
}

std::set<std::string> true_positives(const PredictionSet& preds, const GoldSet& gold) {
  std::set<std::string> tp;
  for (const auto& [id, golds] : gold) {
    const auto it = preds.predictions.find(id);
    if (it != preds.predictions.end() && tuple_match(it->second, golds)) tp.insert(id);
  }
  return tp;
}

double precision(const PredictionSet& preds, const GoldSet& gold) {
  if (gold.empty()) throw DataError("precision: empty evaluation set");
  return static_cast<double>(true_positives(preds, gold).size()) / static_cast<double>(gold.size());
}

std::map<std::string, std::optional<double>> pooled_recall(std::span<const PredictionSet> systems,
                                                           const GoldSet& gold) {
  if (systems.empty()) throw DataError("pooled_recall: no systems");
  std::vector<std::set<std::string>> tps;
  std::set<std::string> pool;
  for (const auto& s : systems) {
    tps.push_back(true_positives(s, gold));
    pool.insert(tps.back().begin(), tps.back().end());
  }
  std::map<std::string, std::optional<double>> out;
  for (std::size_t i = 0; i < systems.size(); ++i) {
    out[systems[i].system] =
        pool.empty() ? std::nullopt
                     : std::optional<double>(static_cast<double>(tps[i].size()) / static_cast<double>(pool.size()));
  }
  return out;
}

std::optional<double> relative_coverage(const std::set<std::string>& tp_n, const std::set<std::string>& tp_b) {
  std::size_t only_n = 0;
  for (const auto& id : tp_n) only_n += tp_b.count(id) == 0;
  const std::size_t uni = tp_b.size() + only_n;
  if (uni == 0) return std::nullopt;
  return static_cast<double>(only_n) / static_cast<double>(uni);
}

std::optional<double> relative_coverage(const PredictionSet& n, const PredictionSet& b, const GoldSet& gold) {
  return relative_coverage(true_positives(n, gold), true_positives(b, gold));
}

std::vector<LengthBucket> length_buckets(const PredictionSet& preds, const GoldSet& gold,
                                         const std::map<std::string, std::size_t>& lengths, std::size_t buckets) {
  if (buckets == 0) throw ConfigError("length_buckets: bucket count must be positive");
  std::vector<std::pair<std::size_t, std::string>> items;
  for (const auto& [id, g] : gold) {
    const auto it = lengths.find(id);
    items.emplace_back(it == lengths.end() ? 0 : it->second, id);
  }
  std::sort(items.begin(), items.end());
  const auto tp = true_positives(preds, gold);
  std::vector<LengthBucket> rows;
  for (std::size_t k = 0; k < buckets; ++k) {
    const std::size_t lo = k * items.size() / buckets;
    const std::size_t hi = (k + 1) * items.size() / buckets;
    if (lo == hi) continue;
    LengthBucket b;
    b.min_length = items[lo].first;
    b.max_length = items[hi - 1].first;
    b.pairs = hi - lo;
    for (std::size_t i = lo; i < hi; ++i) b.correct += tp.count(items[i].second);
    b.precision = static_cast<double>(b.correct) / static_cast<double>(b.pairs);
    rows.push_back(b);
  }
  return rows;
}

std::string bucket_table(std::span<const LengthBucket> rows) {
  std::string out = "bucket  length     pairs  correct  precision\n";
  char buf[128];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::snprintf(buf, sizeof buf, "%6zu  %4zu-%-4zu  %5zu  %7zu  %9.4f\n", i + 1, r.min_length, r.max_length,
                  r.pairs, r.correct, r.precision);
    out += buf;
  }
  return out;
}

std::vector<SystemScore> score_systems(std::span<const PredictionSet> systems, const GoldSet& gold,
                                       const std::string& baseline) {
  const auto recall = pooled_recall(systems, gold);
  const PredictionSet* base = nullptr;
  for (const auto& s : systems) {
    if (s.system == baseline) base = &s;
  }
  if (!baseline.empty() && base == nullptr) throw ConfigError("baseline system '" + baseline + "' not found");
  std::vector<SystemScore> out;
  for (const auto& s : systems) {
    SystemScore sc;
    sc.system = s.system;
    const auto tp = true_positives(s, gold);
    sc.correct = tp.size();
    sc.precision = precision(s, gold);
    sc.recall = recall.at(s.system);
    if (base != nullptr) sc.rc_vs_baseline = relative_coverage(tp, true_positives(*base, gold));
    out.push_back(sc);
  }
  return out;
}

namespace {
std::string opt(const std::optional<double>& v) { return v ? io::format_fixed(*v, 4) : "NA"; }
}  // namespace

std::string report_text(std::span<const SystemScore> scores, std::size_t pairs, const std::string& baseline) {
  std::size_t width = 6;
  for (const auto& s : scores) width = std::max(width, s.system.size());
  std::string out = "pairs evaluated: " + std::to_string(pairs) + "\n";
  if (!baseline.empty()) out += "RC baseline: " + baseline + "\n";
  auto pad = [&](const std::string& s) { return s + std::string(width - s.size() + 2, ' '); };
  out += pad("system") + "correct  P       R       RC\n";
  for (const auto& s : scores) {
    std::string c = std::to_string(s.correct);
    c.resize(std::max<std::size_t>(c.size(), 7), ' ');
    out += pad(s.system) + c + "  " + io::format_fixed(s.precision, 4) + "  " + opt(s.recall) + "  " +
           opt(s.rc_vs_baseline) + "\n";
  }
  return out;
}

std::string report_tsv(std::span<const SystemScore> scores) {
  std::string out = "system\tP\tR\tRC\n";
  for (const auto& s : scores) {
    out += s.system + "\t" + io::format_fixed(s.precision, 4) + "\t" + opt(s.recall) + "\t" + opt(s.rc_vs_baseline) +
           "\n";
  }
  return out;
}

}  // namespace neuron
