#include "neuron/formats.hpp"

#include <charconv>

#include "neuron/errors.hpp"
#include "neuron/io.hpp"

namespace neuron {
namespace {

struct Line {
  std::string_view text;
  std::size_t offset;
};

std::vector<Line> data_lines(std::string_view text) {
  std::vector<Line> out;
  std::size_t s = 0;
  while (s < text.size()) {
    auto e = text.find('\n', s);
    if (e == std::string_view::npos) e = text.size();
    std::string_view l = text.substr(s, e - s);
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    if (!l.empty() && l[0] != '#') out.push_back({l, s});
    s = e + 1;
  }
  return out;
}

std::vector<std::string_view> fields(const Line& l, std::size_t n, const char* what) {
  auto f = io::split_tabs(l.text);
  if (f.size() != n) {
    throw ParseError(l.offset, std::string(what) + ": expected " + std::to_string(n) + " fields, found " +
                                   std::to_string(f.size()));
  }
  if (f[0].empty()) throw ParseError(l.offset, std::string(what) + ": empty id");
  return f;
}

std::string with_header(std::string_view header) {
  std::string out;
  for (const auto l : io::lines(header, true)) {
    out += l[0] == '#' ? "" : "# ";
    out += l;
    out += "\n";
  }
  return out;
}

void check_field(std::string_view s, const Line& l) {
  if (s.find('\t') != std::string_view::npos || s.find('\n') != std::string_view::npos) {
    throw DataError("field contains a tab or newline near byte " + std::to_string(l.offset));
  }
}

Triple triple_from(std::string_view a, std::string_view r, std::string_view b, const Line& l) {
  Triple t{split_span(a), split_span(r), split_span(b)};
  if (t.arg1.empty() || t.rel.empty() || t.arg2.empty()) throw ParseError(l.offset, "tuple has an empty span");
  return t;
}

std::string triple_fields(const Triple& t) { return join(t.arg1) + "\t" + join(t.rel) + "\t" + join(t.arg2); }

double parse_real(std::string_view s, const Line& l) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ParseError(l.offset, "bad number '" + std::string(s) + "'");
  return v;
}

}  // namespace

Tokens split_span(std::string_view span) {
  Tokens out;
  std::size_t s = 0;
  while (s <= span.size()) {
    auto e = span.find(' ', s);
    if (e == std::string_view::npos) e = span.size();
    if (e > s) out.emplace_back(span.substr(s, e - s));
    s = e + 1;
  }
  return out;
}

std::string write_corpus(const std::vector<RawPair>& pairs, std::string_view header) {
  std::string out = with_header(header);
  for (const auto& p : pairs) {
    for (const auto* f : {&p.id, &p.question, &p.answer}) check_field(*f, {"", 0});
    out += p.id + "\t" + p.question + "\t" + p.answer + "\n";
  }
  return out;
}

std::vector<RawPair> read_corpus(std::string_view text) {
  std::vector<RawPair> out;
  for (const auto& l : data_lines(text)) {
    const auto f = fields(l, 3, "corpus");
    out.push_back({std::string(f[0]), std::string(f[1]), std::string(f[2])});
  }
  return out;
}

std::string write_tuples(const std::map<std::string, std::vector<Triple>>& tuples, std::string_view header) {
  std::string out = with_header(header);
  for (const auto& [id, ts] : tuples) {
    for (const auto& t : ts) out += id + "\t" + triple_fields(t) + "\n";
  }
  return out;
}

std::map<std::string, std::vector<Triple>> read_tuples(std::string_view text) {
  std::map<std::string, std::vector<Triple>> out;
  for (const auto& l : data_lines(text)) {
    const auto f = fields(l, 4, "tuples");
    out[std::string(f[0])].push_back(triple_from(f[1], f[2], f[3], l));
  }
  return out;
}

std::string write_splits(const std::map<std::string, Split>& splits, std::string_view header) {
  std::string out = with_header(header);
  for (const auto& [id, s] : splits) out += id + "\t" + std::string(split_name(s)) + "\n";
  return out;
}

std::map<std::string, Split> read_splits(std::string_view text) {
  std::map<std::string, Split> out;
  for (const auto& l : data_lines(text)) {
    const auto f = fields(l, 2, "splits");
    Split s;
    try {
      s = parse_split(f[1]);
    } catch (const Error&) {
      throw ParseError(l.offset, "unknown split '" + std::string(f[1]) + "'");
    }
    if (!out.emplace(std::string(f[0]), s).second) throw ParseError(l.offset, "duplicate id " + std::string(f[0]));
  }
  return out;
}

std::string write_instances(const std::vector<BootstrapInstance>& instances, std::string_view header) {
  std::string out = with_header(header);
  for (const auto& i : instances) {
    out += i.pair_id + "\t" + std::string(instance_type_name(i.type)) + "\t" + triple_fields(i.target) + "\n";
  }
  return out;
}

std::vector<BootstrapInstance> read_instances(std::string_view text) {
  std::vector<BootstrapInstance> out;
  for (const auto& l : data_lines(text)) {
    const auto f = fields(l, 5, "instances");
    BootstrapInstance inst;
    inst.pair_id = std::string(f[0]);
    try {
      inst.type = parse_instance_type(f[1]);
    } catch (const Error&) {
      throw ParseError(l.offset, "unknown instance type '" + std::string(f[1]) + "'");
    }
    inst.target = triple_from(f[2], f[3], f[4], l);
    out.push_back(std::move(inst));
  }
  return out;
}

std::string write_extractions(const std::vector<ExtractionRow>& rows, std::string_view header) {
  std::string out = with_header(header);
  for (const auto& r : rows) {
    out += r.id + "\t" + triple_fields(r.triple) + "\t" + io::format_fixed(r.log_prob, 6) + "\t" +
           (r.relevance ? io::format_fixed(*r.relevance, 6) : "NA") + "\n";
  }
  return out;
}

std::vector<ExtractionRow> read_extractions(std::string_view text) {
  std::vector<ExtractionRow> out;
  for (const auto& l : data_lines(text)) {
    const auto f = fields(l, 6, "extractions");
    ExtractionRow r;
    r.id = std::string(f[0]);
    r.triple = triple_from(f[1], f[2], f[3], l);
    r.log_prob = parse_real(f[4], l);
    if (f[5] != "NA") r.relevance = parse_real(f[5], l);
    out.push_back(std::move(r));
  }
  return out;
}

PredictionSet to_prediction_set(const std::string& system, const std::vector<ExtractionRow>& rows) {
  PredictionSet p;
  p.system = system;
  for (const auto& r : rows) {
    if (!p.predictions.emplace(r.id, r.triple).second) {
      throw DataError("system " + system + " has two predictions for " + r.id);
    }
  }
  return p;
}

}  // namespace neuron
