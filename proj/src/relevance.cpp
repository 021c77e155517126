#include "neuron/relevance.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <tuple>

#include "neuron/errors.hpp"
#include "neuron/kernels.hpp"

namespace neuron {

std::string normalize_phrase(std::span<const std::string> tokens) {
  std::string out;
  for (const auto& tok : tokens) {
    std::string lower;
    for (char c : tok) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!lower.empty() && lower.back() != ' ') lower.push_back(' ');
      } else {
        lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      }
    }
    while (!lower.empty() && lower.back() == ' ') lower.pop_back();
    if (lower.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += lower;
  }
  return out;
}

void KEConfig::validate() const {
  if (dim < 2) throw ConfigError("ke.dim must be at least 2");
  if (!(margin > 0.0)) throw ConfigError("ke.margin must be positive");
  if (!(learning_rate >= 0.0)) throw ConfigError("ke.lr must be non-negative");
  if (negatives == 0) throw ConfigError("ke.negatives must be at least 1");
}

std::size_t KEStore::find(PhraseKind kind, const std::string& phrase) const {
  const auto& t = table(kind);
  auto it = t.index.find(phrase);
  return it == t.index.end() ? SIZE_MAX : it->second;
}

std::size_t KEStore::set(PhraseKind kind, const std::string& phrase, Vec v) {
  if (v.size() != dim_) throw DimensionError("KEStore::set: vector has wrong dimension");
  auto& t = table(kind);
  auto [it, inserted] = t.index.try_emplace(phrase, t.names.size());
  if (inserted) {
    t.names.push_back(phrase);
    t.vectors.push_back(std::move(v));
  } else {
    t.vectors[it->second] = std::move(v);
  }
  return it->second;
}

void KEStore::recompute_means() {
  for (Table* t : {&args_, &rels_}) {
    t->mean.assign(dim_, 0.0);
    if (t->vectors.empty()) continue;
    for (const auto& v : t->vectors) kernels::axpy(1.0, v, t->mean);
    for (double& x : t->mean) x /= static_cast<double>(t->vectors.size());
  }
}

PhraseLookup KEStore::embed_phrase(std::span<const std::string> phrase, PhraseKind kind) const {
  const auto& t = table(kind);
  if (t.vectors.empty()) return PhraseLookup{Vec(dim_, 0.0), false, true};
  auto it = t.index.find(normalize_phrase(phrase));
  if (it != t.index.end()) return PhraseLookup{t.vectors[it->second], true, false};
  if (t.mean.size() != dim_) throw NumericError("KEStore: means not computed");
  return PhraseLookup{t.mean, false, false};
}

double KEStore::distance(const Triple& t) const {
  const Vec h = embed_phrase(t.arg1, PhraseKind::Argument).vector;
  const Vec r = embed_phrase(t.rel, PhraseKind::Relation).vector;
  const Vec tail = embed_phrase(t.arg2, PhraseKind::Argument).vector;
  double s = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double d = h[i] + r[i] - tail[i];
    s += d * d;
  }
  return std::sqrt(s);
}

namespace {

void append_vector(std::string& out, const Vec& v) {
  char buf[32];
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.push_back(',');
    auto res = std::to_chars(buf, buf + sizeof buf, v[i]);
    out.append(buf, res.ptr);
  }
}

}  // namespace

std::string KEStore::serialize() const {
  std::string out = "NEURON-KE\t" + std::to_string(kFormatVersion) + "\t" + std::to_string(dim_) + "\t" +
                    std::to_string(args_.names.size()) + "\t" + std::to_string(rels_.names.size()) + "\n";
  for (auto [tag, t] : {std::pair{'A', &args_}, std::pair{'R', &rels_}}) {
    for (std::size_t i = 0; i < t->names.size(); ++i) {
      out.push_back(tag);
      out.push_back('\t');
      out += t->names[i];
      out.push_back('\t');
      append_vector(out, t->vectors[i]);
      out.push_back('\n');
    }
  }
  return out;
}

KEStore KEStore::parse(std::string_view text) {
  std::size_t pos = 0;
  auto next_line = [&](std::size_t& start) -> std::string_view {
    start = pos;
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    return line;
  };
  auto split = [](std::string_view line) {
    std::vector<std::string_view> f;
    std::size_t s = 0;
    while (true) {
      auto e = line.find('\t', s);
      f.push_back(line.substr(s, e == std::string_view::npos ? std::string_view::npos : e - s));
      if (e == std::string_view::npos) break;
      s = e + 1;
    }
    return f;
  };
  auto to_size = [](std::string_view s, std::size_t offset) {
    std::size_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ParseError(offset, "expected an integer");
    return v;
  };

  std::size_t line_start = 0;
  const auto header = split(next_line(line_start));
  if (header.size() != 5 || header[0] != "NEURON-KE") throw ParseError(0, "missing NEURON-KE header");
  const auto version = to_size(header[1], 0);
  if (version != static_cast<std::size_t>(kFormatVersion)) {
    throw ParseError(0, "unsupported KE store version " + std::string(header[1]));
  }
  KEStore store(to_size(header[2], 0));
  const std::size_t n_args = to_size(header[3], 0);
  const std::size_t n_rels = to_size(header[4], 0);

  for (std::size_t k = 0; k < n_args + n_rels; ++k) {
    if (pos >= text.size()) throw ParseError(text.size(), "truncated KE store");
    const auto fields = split(next_line(line_start));
    const char expected = k < n_args ? 'A' : 'R';
    if (fields.size() != 3 || fields[0].size() != 1 || fields[0][0] != expected) {
      throw ParseError(line_start, std::string("expected an ") + expected + " line");
    }
    Vec v;
    std::string_view nums = fields[2];
    std::size_t s = 0;
    while (s <= nums.size()) {
      auto e = nums.find(',', s);
      if (e == std::string_view::npos) e = nums.size();
      double x = 0.0;
      auto res = std::from_chars(nums.data() + s, nums.data() + e, x);
      if (res.ec != std::errc() || res.ptr != nums.data() + e) throw ParseError(line_start, "bad vector component");
      v.push_back(x);
      s = e + 1;
    }
    if (v.size() != store.dim()) throw ParseError(line_start, "vector has wrong dimension");
    store.set(k < n_args ? PhraseKind::Argument : PhraseKind::Relation, std::string(fields[1]), std::move(v));
  }
  store.recompute_means();
  return store;
}

double ke_distance(const KEStore& store, const Triple& t) { return store.distance(t); }

double relevance_logscore(const PlausibilityModel& model, const Triple& t) { return -std::log1p(model.distance(t)); }

namespace {

struct IndexedTriple {
  std::size_t h, r, t;
  auto operator<=>(const IndexedTriple&) const = default;
};

void normalize(Vec& v) {
  const double n = std::sqrt(kernels::dot(v, v));
  if (n > 0) {
    for (double& x : v) x /= n;
  }
}

Vec random_unit(Rng& rng, std::size_t dim) {
  const double bound = 6.0 / std::sqrt(static_cast<double>(dim));
  Vec v(dim);
  for (double& x : v) x = rng.uniform(-bound, bound);
  normalize(v);
  return v;
}

double dist(const Vec& h, const Vec& r, const Vec& t) {
  double s = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double d = h[i] + r[i] - t[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// Corrupted copy of `pos`, or pos itself when no corruption exists.
IndexedTriple corrupt(const IndexedTriple& pos, std::size_t n_args, const std::set<IndexedTriple>& known, Rng& rng) {
  if (n_args < 2) return pos;
  for (int attempt = 0; attempt < 16; ++attempt) {
    IndexedTriple neg = pos;
    const bool head = rng.bernoulli(0.5);
    std::size_t& slot = head ? neg.h : neg.t;
    std::size_t pick = rng.index(n_args - 1);
    if (pick >= slot) ++pick;  // never the original argument
    slot = pick;
    if (!known.count(neg)) return neg;
  }
  return pos;
}

}  // namespace

TransETrainResult train_transe(std::span<const Triple> tuples, const KEConfig& cfg) {
  cfg.validate();
  if (tuples.empty()) throw DataError("train_transe: no tuples");

  KEStore store(cfg.dim);
  Rng init_rng(cfg.seed);
  std::vector<IndexedTriple> pos;
  auto intern = [&](PhraseKind kind, const Tokens& phrase) {
    const std::string key = normalize_phrase(phrase);
    if (key.empty()) throw DataError("train_transe: empty phrase");
    std::size_t i = store.find(kind, key);
    if (i == SIZE_MAX) i = store.set(kind, key, random_unit(init_rng, cfg.dim));
    return i;
  };
  std::set<IndexedTriple> known;
  for (const auto& t : tuples) {
    IndexedTriple it{intern(PhraseKind::Argument, t.arg1), intern(PhraseKind::Relation, t.rel),
                     intern(PhraseKind::Argument, t.arg2)};
    if (known.insert(it).second) pos.push_back(it);
  }
  const std::size_t n_args = store.count(PhraseKind::Argument);

  Rng eval_rng(cfg.seed ^ 0x5eedULL);
  std::vector<std::pair<IndexedTriple, IndexedTriple>> eval_pairs;
  for (const auto& p : pos) {
    for (std::size_t k = 0; k < cfg.negatives; ++k) {
      IndexedTriple n = corrupt(p, n_args, known, eval_rng);
      if (!(n == p)) eval_pairs.emplace_back(p, n);
    }
  }
  auto full_loss = [&]() {
    double loss = 0.0;
    for (const auto& [p, n] : eval_pairs) {
      const double dp = dist(store.vector(PhraseKind::Argument, p.h), store.vector(PhraseKind::Relation, p.r),
                             store.vector(PhraseKind::Argument, p.t));
      const double dn = dist(store.vector(PhraseKind::Argument, n.h), store.vector(PhraseKind::Relation, n.r),
                             store.vector(PhraseKind::Argument, n.t));
      loss += std::max(0.0, cfg.margin + dp - dn);
    }
    return loss;
  };

  TransETrainResult result{KEStore(cfg.dim), {full_loss()}, 0};
  Rng train_rng(cfg.seed ^ 0x7a11ULL);
  double lr = cfg.learning_rate;
  std::vector<std::size_t> order(pos.size());

  // Moves (h, r, t) along -sign * grad of ||h + r - t||.
  auto step = [&](const IndexedTriple& x, double sign) {
    Vec& h = store.mutable_vector(PhraseKind::Argument, x.h);
    Vec& r = store.mutable_vector(PhraseKind::Relation, x.r);
    Vec& t = store.mutable_vector(PhraseKind::Argument, x.t);
    const double d = dist(h, r, t);
    if (d == 0.0) return;
    for (std::size_t i = 0; i < cfg.dim; ++i) {
      const double g = sign * lr * (h[i] + r[i] - t[i]) / d;
      h[i] -= g;
      r[i] -= g;
      t[i] += g;
    }
  };

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const KEStore snapshot = store;
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    train_rng.shuffle(order.begin(), order.end());
    for (std::size_t idx : order) {
      const IndexedTriple& p = pos[idx];
      for (std::size_t k = 0; k < cfg.negatives; ++k) {
        const IndexedTriple n = corrupt(p, n_args, known, train_rng);
        if (n == p) continue;
        const double dp = dist(store.vector(PhraseKind::Argument, p.h), store.vector(PhraseKind::Relation, p.r),
                               store.vector(PhraseKind::Argument, p.t));
        const double dn = dist(store.vector(PhraseKind::Argument, n.h), store.vector(PhraseKind::Relation, n.r),
                               store.vector(PhraseKind::Argument, n.t));
        if (cfg.margin + dp - dn <= 0.0) continue;
        step(p, +1.0);
        step(n, -1.0);
        for (std::size_t e : {p.h, p.t, n.h, n.t}) normalize(store.mutable_vector(PhraseKind::Argument, e));
      }
    }
    const double loss = full_loss();
    if (loss > result.loss_history.back()) {
      store = snapshot;
      lr *= 0.5;
      ++result.rejected_epochs;
      result.loss_history.push_back(result.loss_history.back());
    } else {
      result.loss_history.push_back(loss);
    }
  }
  store.recompute_means();
  result.store = std::move(store);
  return result;
}

RankReport filtered_tail_rank(const KEStore& store, std::span<const Triple> tuples) {
  std::set<std::tuple<std::string, std::string, std::string>> truth;
  for (const auto& t : tuples) truth.emplace(normalize_phrase(t.arg1), normalize_phrase(t.rel), normalize_phrase(t.arg2));

  RankReport report;
  const auto& args = store.names(PhraseKind::Argument);
  for (const auto& t : tuples) {
    const std::string h = normalize_phrase(t.arg1);
    const std::string r = normalize_phrase(t.rel);
    const std::string tail = normalize_phrase(t.arg2);
    const Vec hv = store.embed_phrase(t.arg1, PhraseKind::Argument).vector;
    const Vec rv = store.embed_phrase(t.rel, PhraseKind::Relation).vector;
    const double target = dist(hv, rv, store.embed_phrase(t.arg2, PhraseKind::Argument).vector);
    std::size_t rank = 1;
    std::size_t candidates = 1;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == tail || truth.count({h, r, args[i]})) continue;
      ++candidates;
      if (dist(hv, rv, store.vector(PhraseKind::Argument, i)) < target) ++rank;
    }
    report.mean_rank += static_cast<double>(rank);
    report.random_mean_rank += static_cast<double>(candidates + 1) / 2.0;
    ++report.queries;
  }
  if (report.queries) {
    report.mean_rank /= static_cast<double>(report.queries);
    report.random_mean_rank /= static_cast<double>(report.queries);
  }
  return report;
}

}  // namespace neuron
