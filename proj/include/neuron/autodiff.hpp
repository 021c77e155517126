#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "neuron/nn.hpp"
#include "neuron/rng.hpp"

namespace neuron {

struct LstmCellIds {
  ParamId w_x;
  ParamId w_h;
  ParamId bias;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
};

// Reverse-mode gradient tape over vector-valued nodes. Every operation
// appends a node holding its forward value; backward() walks the nodes in
// exact reverse order and accumulates into the ParamStore's grad buffers.
// One tape per sequence; a tape can be replayed only once.
class Tape {
 public:
  struct Var {
    std::uint32_t id = UINT32_MAX;
  };

  // dropout_rate is applied by dropout() only when rng is non-null.
  explicit Tape(ParamStore& params, Rng* dropout_rng = nullptr, double dropout_rate = 0.0);

  const Vec& value(Var v) const { return nodes_[v.id].value; }
  double scalar(Var v) const { return nodes_[v.id].value.at(0); }
  std::size_t size() const noexcept { return nodes_.size(); }

  Var constant(Vec value);
  Var zeros(std::size_t n) { return constant(Vec(n, 0.0)); }
  Var embed(ParamId table, std::int32_t row);
  Var param(ParamId vec);
  Var matvec(ParamId w, Var x);
  Var add(Var a, Var b);
  Var mul(Var a, Var b);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var concat(std::span<const Var> parts);
  Var slice(Var a, std::size_t offset, std::size_t length);
  // v . x with v a parameter; result has length 1.
  Var dot(ParamId v, Var x);
  Var stack(std::span<const Var> scalars);
  Var softmax(Var a);
  Var weighted_sum(Var weights, std::span<const Var> items);
  // -log softmax(logits)[target] over positions with mask[i] != 0. Throws
  // DataError if the target itself is masked.
  Var masked_nll(Var logits, std::span<const std::uint8_t> mask, std::size_t target);
  Var sum(std::span<const Var> scalars);
  Var dropout(Var a);

  std::pair<Var, Var> lstm(const LstmCellIds& cell, Var x, Var h, Var c);

  // Seeds d(loss)/d(loss) = 1 and accumulates parameter gradients. Throws
  // NumericError when called twice.
  void backward(Var loss);

 private:
  enum class Op : std::uint8_t {
    Constant, Embed, Param, MatVec, Add, Mul, Tanh, Sigmoid, Concat, Slice, Dot, Stack, Softmax,
    WeightedSum, MaskedNll, Sum, Dropout
  };
  struct Node {
    Op op = Op::Constant;
    std::uint32_t a = UINT32_MAX;
    std::uint32_t b = UINT32_MAX;
    ParamId param;
    std::size_t aux = 0;
    std::vector<std::uint32_t> inputs;
    Vec value;
    Vec cache;
  };

  Var push(Node node);

  ParamStore* params_;
  Rng* rng_;
  double rate_;
  std::vector<Node> nodes_;
  bool consumed_ = false;
};

// Forward-only backend with the same surface as Tape; used for inference.
class EagerOps {
 public:
  using Var = Vec;

  explicit EagerOps(const ParamStore& params) : params_(&params) {}

  Var zeros(std::size_t n) const { return Vec(n, 0.0); }
  Var embed(ParamId table, std::int32_t row) const;
  Var matvec(ParamId w, const Var& x) const;
  Var add(const Var& a, const Var& b) const;
  Var tanh(const Var& a) const;
  Var concat(std::span<const Var> parts) const;
  Var dot(ParamId v, const Var& x) const;
  Var stack(std::span<const Var> scalars) const;
  Var softmax(const Var& a) const;
  Var weighted_sum(const Var& weights, std::span<const Var> items) const;
  Var dropout(const Var& a) const { return a; }
  std::pair<Var, Var> lstm(const LstmCellIds& cell, const Var& x, const Var& h, const Var& c) const;

  const Vec& value(const Var& v) const { return v; }

 private:
  const ParamStore* params_;
};

// Tape exposes handles rather than values; this adapter gives it the
// value-typed Var used by the templated forward code.
class TapeOps {
 public:
  using Var = Tape::Var;

  explicit TapeOps(Tape& tape) : tape_(&tape) {}

  Var zeros(std::size_t n) { return tape_->zeros(n); }
  Var embed(ParamId table, std::int32_t row) { return tape_->embed(table, row); }
  Var matvec(ParamId w, Var x) { return tape_->matvec(w, x); }
  Var add(Var a, Var b) { return tape_->add(a, b); }
  Var tanh(Var a) { return tape_->tanh(a); }
  Var concat(std::span<const Var> parts) { return tape_->concat(parts); }
  Var dot(ParamId v, Var x) { return tape_->dot(v, x); }
  Var stack(std::span<const Var> scalars) { return tape_->stack(scalars); }
  Var softmax(Var a) { return tape_->softmax(a); }
  Var weighted_sum(Var w, std::span<const Var> items) { return tape_->weighted_sum(w, items); }
  Var dropout(Var a) { return tape_->dropout(a); }
  std::pair<Var, Var> lstm(const LstmCellIds& cell, Var x, Var h, Var c) { return tape_->lstm(cell, x, h, c); }

  const Vec& value(Var v) const { return tape_->value(v); }
  Tape& tape() { return *tape_; }

 private:
  Tape* tape_;
};

}  // namespace neuron
