#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace neuron {

// Base of every error thrown by the library. The CLI maps the three families
// below onto exit codes 2 (config), 3 (data) and 4 (numeric).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Tagged sequence violates the tuple grammar. `position` is the index of the
// offending token, or the sequence length when the sequence ends too early.
class MalformedSequence : public DataError {
 public:
  MalformedSequence(std::size_t position, std::string reason)
      : DataError("malformed tagged sequence at position " + std::to_string(position) + ": " + reason),
        position_(position),
        reason_(std::move(reason)) {}

  std::size_t position() const noexcept { return position_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t position_;
  std::string reason_;
};

// Every vocabulary position is masked at a decode step.
class NoValidContinuation : public NumericError {
 public:
  using NumericError::NumericError;
};

// Beam search finished without a single complete sequence.
class NoExtraction : public DataError {
 public:
  using DataError::DataError;
};

// File could not be parsed. `offset` is a byte offset into the file.
class ParseError : public DataError {
 public:
  ParseError(std::size_t offset, const std::string& what)
      : DataError("parse error at byte " + std::to_string(offset) + ": " + what), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace neuron
