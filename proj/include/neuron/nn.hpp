#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "neuron/rng.hpp"

namespace neuron {

using Vec = std::vector<double>;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Row-major dense matrix. A vector-shaped parameter is stored as rows x 1.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
};

// Opaque handle into a ParamStore, stable across copies of the store.
struct ParamId {
  std::uint32_t index = UINT32_MAX;
  bool valid() const noexcept { return index != UINT32_MAX; }
};

class ParamStore {
 public:
  ParamId add(std::string name, std::size_t rows, std::size_t cols);

  Parameter& operator[](ParamId id) { return params_.at(id.index); }
  const Parameter& operator[](ParamId id) const { return params_.at(id.index); }
  ParamId find(const std::string& name) const;

  std::size_t size() const noexcept { return params_.size(); }
  std::vector<Parameter>& all() noexcept { return params_; }
  const std::vector<Parameter>& all() const noexcept { return params_; }
  std::size_t scalar_count() const;

  void init_uniform(Rng& rng, double scale);
  void zero_grad();
  void scale_grad(double factor);
  double grad_norm() const;
  bool grads_finite() const;

 private:
  std::vector<Parameter> params_;
  std::unordered_map<std::string, std::uint32_t> by_name_;
};

// Stacked LSTM weights, gate blocks ordered input, forget, output, candidate.
// w_x is (4H x input_dim), w_h is (4H x H), bias is 4H.
struct LstmWeights {
  std::span<const double> w_x;
  std::span<const double> w_h;
  std::span<const double> bias;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
};

struct LstmState {
  Vec h;
  Vec c;
};

struct LstmCellParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  Matrix w_x;
  Matrix w_h;
  Vec bias;

  LstmCellParams(std::size_t input, std::size_t hidden)
      : input_dim(input), hidden_dim(hidden), w_x(4 * hidden, input), w_h(4 * hidden, hidden), bias(4 * hidden, 0.0) {}

  LstmWeights view() const { return {w_x.data, w_h.data, bias, input_dim, hidden_dim}; }
};

// i,f,o = sigmoid(.), g = tanh(.), c' = f*c + i*g, h' = o*tanh(c').
LstmState lstm_step(const LstmWeights& p, std::span<const double> x, const LstmState& state);

double sigmoid(double x);

// Max-subtracted softmax. -inf logits get probability exactly 0; throws
// NoValidContinuation if every logit is -inf.
Vec softmax(std::span<const double> logits);

// Log-probabilities, -inf where the logit is -inf.
Vec log_softmax(std::span<const double> logits);

// p <- p - lr * g for every parameter. Throws NumericError and leaves the
// store untouched when any gradient is non-finite.
void sgd_update(ParamStore& params, double lr);

// Rescales gradients so their global L2 norm is at most max_norm; returns the
// norm before clipping.
double clip_gradients(ParamStore& params, double max_norm);

// Inverted dropout: zero with probability rate, scale survivors by
// 1/(1-rate). Identity when !training or rate == 0.
Vec dropout(std::span<const double> v, double rate, Rng& rng, bool training);

// Learning rate after `decays` multiplicative decays.
double decayed_lr(double lr0, double decay, int decays);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
};

// Compares analytic gradients against central differences.
//   loss_and_grad: zeroes grads, evaluates the loss, fills grads.
//   loss_only:     evaluates the loss without touching grads.
// Relative error per entry is |a-n| / max(|a|, |n|, 1e-8). Throws
// NumericError if repeated evaluations disagree (e.g. dropout left on).
// max_per_param caps the entries probed per parameter (0 = all); the probed
// entries are spread evenly.
GradCheckResult gradient_check(ParamStore& params, const std::function<double(ParamStore&)>& loss_and_grad,
                               const std::function<double(ParamStore&)>& loss_only, double step,
                               std::size_t max_per_param = 0);

}  // namespace neuron
