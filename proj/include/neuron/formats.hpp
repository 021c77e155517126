#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "neuron/bootstrap.hpp"
#include "neuron/eval.hpp"
#include "neuron/text.hpp"

namespace neuron {

// Tab-separated files. Lines starting with '#' are headers and are ignored
// on read. Parse failures throw ParseError with the byte offset of the line.

// id<TAB>question<TAB>answer
std::string write_corpus(const std::vector<RawPair>& pairs, std::string_view header = "");
std::vector<RawPair> read_corpus(std::string_view text);

// id<TAB>arg1<TAB>rel<TAB>arg2, spans as space-joined tokens. Several lines
// may share an id.
std::string write_tuples(const std::map<std::string, std::vector<Triple>>& tuples, std::string_view header = "");
std::map<std::string, std::vector<Triple>> read_tuples(std::string_view text);

// id<TAB>train|dev|test
std::string write_splits(const std::map<std::string, Split>& splits, std::string_view header = "");
std::map<std::string, Split> read_splits(std::string_view text);

// id<TAB>type<TAB>arg1<TAB>rel<TAB>arg2
std::string write_instances(const std::vector<BootstrapInstance>& instances, std::string_view header = "");
std::vector<BootstrapInstance> read_instances(std::string_view text);

struct ExtractionRow {
  std::string id;
  Triple triple;
  double log_prob = 0.0;
  // Absent when no re-ranking was applied; written as NA.
  std::optional<double> relevance;
};

// id<TAB>arg1<TAB>rel<TAB>arg2<TAB>logP<TAB>relevance
std::string write_extractions(const std::vector<ExtractionRow>& rows, std::string_view header = "");
std::vector<ExtractionRow> read_extractions(std::string_view text);
PredictionSet to_prediction_set(const std::string& system, const std::vector<ExtractionRow>& rows);

// Splits a span on single spaces into tokens; empty tokens are dropped.
Tokens split_span(std::string_view span);

}  // namespace neuron
