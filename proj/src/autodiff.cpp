#include "neuron/autodiff.hpp"

#include <cmath>

#include "neuron/errors.hpp"
#include "neuron/kernels.hpp"

namespace neuron {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw DimensionError(what);
}

}  // namespace

Tape::Tape(ParamStore& params, Rng* dropout_rng, double dropout_rate)
    : params_(&params), rng_(dropout_rng), rate_(dropout_rate) {
  if (rate_ < 0.0 || rate_ >= 1.0) throw ConfigError("dropout rate must be in [0, 1)");
}

Tape::Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Tape::Var Tape::constant(Vec value) {
  Node n;
  n.op = Op::Constant;
  n.value = std::move(value);
  return push(std::move(n));
}

Tape::Var Tape::embed(ParamId table, std::int32_t row) {
  const auto& p = (*params_)[table];
  require(row >= 0 && static_cast<std::size_t>(row) < p.value.rows, "embed: row out of range");
  Node n;
  n.op = Op::Embed;
  n.param = table;
  n.aux = static_cast<std::size_t>(row);
  auto r = p.value.row(n.aux);
  n.value.assign(r.begin(), r.end());
  return push(std::move(n));
}

Tape::Var Tape::param(ParamId vec) {
  Node n;
  n.op = Op::Param;
  n.param = vec;
  n.value = (*params_)[vec].value.data;
  return push(std::move(n));
}

Tape::Var Tape::matvec(ParamId w, Var x) {
  const auto& W = (*params_)[w].value;
  require(value(x).size() == W.cols, "matvec: dimension mismatch");
  Node n;
  n.op = Op::MatVec;
  n.param = w;
  n.a = x.id;
  n.value.assign(W.rows, 0.0);
  kernels::active().gemv(W.data.data(), W.rows, W.cols, value(x).data(), n.value.data());
  return push(std::move(n));
}

Tape::Var Tape::add(Var a, Var b) {
  require(value(a).size() == value(b).size(), "add: dimension mismatch");
  Node n;
  n.op = Op::Add;
  n.a = a.id;
  n.b = b.id;
  n.value = value(a);
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] += value(b)[i];
  return push(std::move(n));
}

Tape::Var Tape::mul(Var a, Var b) {
  require(value(a).size() == value(b).size(), "mul: dimension mismatch");
  Node n;
  n.op = Op::Mul;
  n.a = a.id;
  n.b = b.id;
  n.value = value(a);
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] *= value(b)[i];
  return push(std::move(n));
}

Tape::Var Tape::tanh(Var a) {
  Node n;
  n.op = Op::Tanh;
  n.a = a.id;
  n.value = value(a);
  for (double& x : n.value) x = std::tanh(x);
  return push(std::move(n));
}

Tape::Var Tape::sigmoid(Var a) {
  Node n;
  n.op = Op::Sigmoid;
  n.a = a.id;
  n.value = value(a);
  for (double& x : n.value) x = neuron::sigmoid(x);
  return push(std::move(n));
}

Tape::Var Tape::concat(std::span<const Var> parts) {
  Node n;
  n.op = Op::Concat;
  for (Var p : parts) {
    n.inputs.push_back(p.id);
    n.value.insert(n.value.end(), value(p).begin(), value(p).end());
  }
  return push(std::move(n));
}

Tape::Var Tape::slice(Var a, std::size_t offset, std::size_t length) {
  require(offset + length <= value(a).size(), "slice: out of range");
  Node n;
  n.op = Op::Slice;
  n.a = a.id;
  n.aux = offset;
  n.value.assign(value(a).begin() + static_cast<std::ptrdiff_t>(offset),
                 value(a).begin() + static_cast<std::ptrdiff_t>(offset + length));
  return push(std::move(n));
}

Tape::Var Tape::dot(ParamId v, Var x) {
  const auto& p = (*params_)[v].value;
  require(p.data.size() == value(x).size(), "dot: dimension mismatch");
  Node n;
  n.op = Op::Dot;
  n.param = v;
  n.a = x.id;
  n.value = {kernels::dot(p.data, value(x))};
  return push(std::move(n));
}

Tape::Var Tape::stack(std::span<const Var> scalars) {
  Node n;
  n.op = Op::Stack;
  for (Var s : scalars) {
    require(value(s).size() == 1, "stack: expects scalars");
    n.inputs.push_back(s.id);
    n.value.push_back(value(s)[0]);
  }
  return push(std::move(n));
}

Tape::Var Tape::softmax(Var a) {
  Node n;
  n.op = Op::Softmax;
  n.a = a.id;
  n.value = neuron::softmax(value(a));
  return push(std::move(n));
}

Tape::Var Tape::weighted_sum(Var weights, std::span<const Var> items) {
  require(!items.empty() && value(weights).size() == items.size(), "weighted_sum: dimension mismatch");
  const std::size_t d = value(items[0]).size();
  Node n;
  n.op = Op::WeightedSum;
  n.a = weights.id;
  n.value.assign(d, 0.0);
  for (std::size_t i = 0; i < items.size(); ++i) {
    require(value(items[i]).size() == d, "weighted_sum: ragged items");
    n.inputs.push_back(items[i].id);
    kernels::axpy(value(weights)[i], value(items[i]), n.value);
  }
  return push(std::move(n));
}

Tape::Var Tape::masked_nll(Var logits, std::span<const std::uint8_t> mask, std::size_t target) {
  const Vec& z = value(logits);
  require(mask.size() == z.size() && target < z.size(), "masked_nll: dimension mismatch");
  if (!mask[target]) throw DataError("masked_nll: gold token is masked out (data bug)");
  Vec masked(z);
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!mask[i]) masked[i] = kNegInf;
  }
  Node n;
  n.op = Op::MaskedNll;
  n.a = logits.id;
  n.aux = target;
  n.cache = neuron::softmax(masked);
  const Vec logp = log_softmax(masked);
  n.value = {-logp[target]};
  return push(std::move(n));
}

Tape::Var Tape::sum(std::span<const Var> scalars) {
  Node n;
  n.op = Op::Sum;
  double s = 0.0;
  for (Var v : scalars) {
    require(value(v).size() == 1, "sum: expects scalars");
    n.inputs.push_back(v.id);
    s += value(v)[0];
  }
  n.value = {s};
  return push(std::move(n));
}

Tape::Var Tape::dropout(Var a) {
  if (rng_ == nullptr || rate_ == 0.0) return a;
  Node n;
  n.op = Op::Dropout;
  n.a = a.id;
  n.value = value(a);
  n.cache.resize(n.value.size());
  const double keep = 1.0 / (1.0 - rate_);
  for (std::size_t i = 0; i < n.value.size(); ++i) {
    n.cache[i] = rng_->bernoulli(rate_) ? 0.0 : keep;
    n.value[i] *= n.cache[i];
  }
  return push(std::move(n));
}

std::pair<Tape::Var, Tape::Var> Tape::lstm(const LstmCellIds& cell, Var x, Var h, Var c) {
  const std::size_t H = cell.hidden_dim;
  Var z = add(add(matvec(cell.w_x, x), matvec(cell.w_h, h)), param(cell.bias));
  Var i = sigmoid(slice(z, 0, H));
  Var f = sigmoid(slice(z, H, H));
  Var o = sigmoid(slice(z, 2 * H, H));
  Var g = tanh(slice(z, 3 * H, H));
  Var c_next = add(mul(f, c), mul(i, g));
  Var h_next = mul(o, tanh(c_next));
  return {h_next, c_next};
}

void Tape::backward(Var loss) {
  if (consumed_) throw NumericError("gradient tape already consumed");
  consumed_ = true;
  require(value(loss).size() == 1, "backward: loss must be a scalar");

  std::vector<Vec> grad(nodes_.size());
  auto g_of = [&](std::uint32_t id) -> Vec& {
    if (grad[id].empty()) grad[id].assign(nodes_[id].value.size(), 0.0);
    return grad[id];
  };
  g_of(loss.id)[0] = 1.0;
  const auto& k = kernels::active();

  for (std::size_t idx = loss.id + 1; idx-- > 0;) {
    if (grad[idx].empty()) continue;
    const Vec& g = grad[idx];
    Node& n = nodes_[idx];
    switch (n.op) {
      case Op::Constant:
        break;
      case Op::Embed: {
        auto row = (*params_)[n.param].grad.row(n.aux);
        for (std::size_t i = 0; i < g.size(); ++i) row[i] += g[i];
        break;
      }
      case Op::Param: {
        auto& pg = (*params_)[n.param].grad.data;
        for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i];
        break;
      }
      case Op::MatVec: {
        auto& p = (*params_)[n.param];
        k.ger(p.grad.data.data(), p.value.rows, p.value.cols, g.data(), nodes_[n.a].value.data());
        k.gemv_t(p.value.data.data(), p.value.rows, p.value.cols, g.data(), g_of(n.a).data());
        break;
      }
      case Op::Add: {
        Vec& ga = g_of(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        Vec& gb = g_of(n.b);
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
        break;
      }
      case Op::Mul: {
        const Vec& va = nodes_[n.a].value;
        const Vec& vb = nodes_[n.b].value;
        Vec& ga = g_of(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * vb[i];
        Vec& gb = g_of(n.b);
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * va[i];
        break;
      }
      case Op::Tanh: {
        Vec& ga = g_of(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - n.value[i] * n.value[i]);
        break;
      }
      case Op::Sigmoid: {
        Vec& ga = g_of(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * n.value[i] * (1.0 - n.value[i]);
        break;
      }
      case Op::Concat: {
        std::size_t off = 0;
        for (std::uint32_t in : n.inputs) {
          Vec& gi = g_of(in);
          for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += g[off + i];
          off += gi.size();
        }
        break;
      }
      case Op::Slice: {
        Vec& ga = g_of(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[n.aux + i] += g[i];
        break;
      }
      case Op::Dot: {
        auto& p = (*params_)[n.param];
        k.axpy(g[0], nodes_[n.a].value.data(), p.grad.data.data(), p.grad.data.size());
        k.axpy(g[0], p.value.data.data(), g_of(n.a).data(), p.value.data.size());
        break;
      }
      case Op::Stack: {
        for (std::size_t i = 0; i < n.inputs.size(); ++i) g_of(n.inputs[i])[0] += g[i];
        break;
      }
      case Op::Softmax: {
        const double gp = k.dot(g.data(), n.value.data(), g.size());
        Vec& ga = g_of(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += n.value[i] * (g[i] - gp);
        break;
      }
      case Op::WeightedSum: {
        Vec& gw = g_of(n.a);
        const Vec& w = nodes_[n.a].value;
        for (std::size_t i = 0; i < n.inputs.size(); ++i) {
          const Vec& item = nodes_[n.inputs[i]].value;
          gw[i] += k.dot(g.data(), item.data(), g.size());
          k.axpy(w[i], g.data(), g_of(n.inputs[i]).data(), g.size());
        }
        break;
      }
      case Op::MaskedNll: {
        Vec& ga = g_of(n.a);
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[0] * n.cache[i];
        ga[n.aux] -= g[0];
        break;
      }
      case Op::Sum: {
        for (std::uint32_t in : n.inputs) g_of(in)[0] += g[0];
        break;
      }
      case Op::Dropout: {
        Vec& ga = g_of(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * n.cache[i];
        break;
      }
    }
  }
}

Vec EagerOps::embed(ParamId table, std::int32_t row) const {
  const auto& p = (*params_)[table].value;
  require(row >= 0 && static_cast<std::size_t>(row) < p.rows, "embed: row out of range");
  auto r = p.row(static_cast<std::size_t>(row));
  return Vec(r.begin(), r.end());
}

Vec EagerOps::matvec(ParamId w, const Vec& x) const {
  const auto& W = (*params_)[w].value;
  require(x.size() == W.cols, "matvec: dimension mismatch");
  Vec y(W.rows, 0.0);
  kernels::active().gemv(W.data.data(), W.rows, W.cols, x.data(), y.data());
  return y;
}

Vec EagerOps::add(const Vec& a, const Vec& b) const {
  require(a.size() == b.size(), "add: dimension mismatch");
  Vec y(a);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += b[i];
  return y;
}

Vec EagerOps::tanh(const Vec& a) const {
  Vec y(a);
  for (double& x : y) x = std::tanh(x);
  return y;
}

Vec EagerOps::concat(std::span<const Vec> parts) const {
  Vec y;
  for (const auto& p : parts) y.insert(y.end(), p.begin(), p.end());
  return y;
}

Vec EagerOps::dot(ParamId v, const Vec& x) const {
  const auto& p = (*params_)[v].value;
  require(p.data.size() == x.size(), "dot: dimension mismatch");
  return {kernels::dot(p.data, x)};
}

Vec EagerOps::stack(std::span<const Vec> scalars) const {
  Vec y;
  y.reserve(scalars.size());
  for (const auto& s : scalars) y.push_back(s.at(0));
  return y;
}

Vec EagerOps::softmax(const Vec& a) const { return neuron::softmax(a); }

Vec EagerOps::weighted_sum(const Vec& weights, std::span<const Vec> items) const {
  require(!items.empty() && weights.size() == items.size(), "weighted_sum: dimension mismatch");
  Vec y(items[0].size(), 0.0);
  for (std::size_t i = 0; i < items.size(); ++i) kernels::axpy(weights[i], items[i], y);
  return y;
}

std::pair<Vec, Vec> EagerOps::lstm(const LstmCellIds& cell, const Vec& x, const Vec& h, const Vec& c) const {
  const LstmWeights w{(*params_)[cell.w_x].value.data, (*params_)[cell.w_h].value.data,
                      (*params_)[cell.bias].value.data, cell.input_dim, cell.hidden_dim};
  auto next = lstm_step(w, x, LstmState{h, c});
  return {std::move(next.h), std::move(next.c)};
}

}  // namespace neuron
