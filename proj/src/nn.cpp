#include "neuron/nn.hpp"

#include <algorithm>
#include <cmath>

#include "neuron/errors.hpp"
#include "neuron/kernels.hpp"

namespace neuron {

ParamId ParamStore::add(std::string name, std::size_t rows, std::size_t cols) {
  if (by_name_.count(name)) throw ConfigError("duplicate parameter name " + name);
  const auto index = static_cast<std::uint32_t>(params_.size());
  by_name_.emplace(name, index);
  params_.push_back(Parameter{std::move(name), Matrix(rows, cols), Matrix(rows, cols)});
  return ParamId{index};
}

ParamId ParamStore::find(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? ParamId{} : ParamId{it->second};
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.data.size();
  return n;
}

void ParamStore::init_uniform(Rng& rng, double scale) {
  for (auto& p : params_) {
    for (auto& x : p.value.data) x = rng.uniform(-scale, scale);
  }
}

void ParamStore::zero_grad() {
  for (auto& p : params_) std::fill(p.grad.data.begin(), p.grad.data.end(), 0.0);
}

void ParamStore::scale_grad(double factor) {
  for (auto& p : params_) {
    for (auto& g : p.grad.data) g *= factor;
  }
}

double ParamStore::grad_norm() const {
  double s = 0.0;
  for (const auto& p : params_) s += kernels::dot(p.grad.data, p.grad.data);
  return std::sqrt(s);
}

bool ParamStore::grads_finite() const {
  for (const auto& p : params_) {
    for (double g : p.grad.data) {
      if (!std::isfinite(g)) return false;
    }
  }
  return true;
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

LstmState lstm_step(const LstmWeights& p, std::span<const double> x, const LstmState& state) {
  const std::size_t H = p.hidden_dim;
  if (x.size() != p.input_dim || state.h.size() != H || state.c.size() != H || p.w_x.size() != 4 * H * p.input_dim ||
      p.w_h.size() != 4 * H * H || p.bias.size() != 4 * H) {
    throw DimensionError("lstm_step: dimension mismatch");
  }
  const auto& k = kernels::active();
  Vec z(p.bias.begin(), p.bias.end());
  k.gemv(p.w_x.data(), 4 * H, p.input_dim, x.data(), z.data());
  k.gemv(p.w_h.data(), 4 * H, H, state.h.data(), z.data());

  LstmState next{Vec(H), Vec(H)};
  for (std::size_t j = 0; j < H; ++j) {
    const double i = sigmoid(z[j]);
    const double f = sigmoid(z[H + j]);
    const double o = sigmoid(z[2 * H + j]);
    const double g = std::tanh(z[3 * H + j]);
    next.c[j] = f * state.c[j] + i * g;
    next.h[j] = o * std::tanh(next.c[j]);
  }
  return next;
}

Vec softmax(std::span<const double> logits) {
  double mx = kNegInf;
  for (double z : logits) mx = std::max(mx, z);
  if (mx == kNegInf) throw NoValidContinuation("softmax: every entry is masked");
  Vec p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = logits[i] == kNegInf ? 0.0 : std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (double& x : p) x /= sum;
  return p;
}

Vec log_softmax(std::span<const double> logits) {
  double mx = kNegInf;
  for (double z : logits) mx = std::max(mx, z);
  if (mx == kNegInf) throw NoValidContinuation("log_softmax: every entry is masked");
  double sum = 0.0;
  for (double z : logits) {
    if (z != kNegInf) sum += std::exp(z - mx);
  }
  const double lse = mx + std::log(sum);
  Vec out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] == kNegInf ? kNegInf : logits[i] - lse;
  return out;
}

void sgd_update(ParamStore& params, double lr) {
  if (!params.grads_finite()) throw NumericError("sgd_update: non-finite gradient, batch rejected");
  if (lr == 0.0) return;
  for (auto& p : params.all()) kernels::axpy(-lr, p.grad.data, p.value.data);
}

double clip_gradients(ParamStore& params, double max_norm) {
  const double norm = params.grad_norm();
  if (std::isfinite(norm) && norm > max_norm && max_norm > 0) params.scale_grad(max_norm / norm);
  return norm;
}

Vec dropout(std::span<const double> v, double rate, Rng& rng, bool training) {
  if (rate < 0.0 || rate >= 1.0) throw ConfigError("dropout rate must be in [0, 1)");
  Vec out(v.begin(), v.end());
  if (!training || rate == 0.0) return out;
  const double keep_scale = 1.0 / (1.0 - rate);
  for (double& x : out) x = rng.bernoulli(rate) ? 0.0 : x * keep_scale;
  return out;
}

double decayed_lr(double lr0, double decay, int decays) { return lr0 * std::pow(decay, decays); }

GradCheckResult gradient_check(ParamStore& params, const std::function<double(ParamStore&)>& loss_and_grad,
                               const std::function<double(ParamStore&)>& loss_only, double step,
                               std::size_t max_per_param) {
  const double analytic_loss = loss_and_grad(params);
  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params.all()) analytic.push_back(p.grad);

  const double base1 = loss_only(params);
  const double base2 = loss_only(params);
  const double tol = 1e-10 * std::max(1.0, std::abs(base1));
  if (base1 != base2 || std::abs(analytic_loss - base1) > tol) {
    throw NumericError("gradient_check: loss is not deterministic; disable dropout before checking");
  }

  GradCheckResult result;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto& p = params.all()[pi];
    const std::size_t n = p.value.data.size();
    const std::size_t probes = (max_per_param == 0 || max_per_param >= n) ? n : max_per_param;
    for (std::size_t k = 0; k < probes; ++k) {
      const std::size_t idx = probes == n ? k : (k * n) / probes;
      const double saved = p.value.data[idx];
      p.value.data[idx] = saved + step;
      const double up = loss_only(params);
      p.value.data[idx] = saved - step;
      const double down = loss_only(params);
      p.value.data[idx] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[pi].data[idx];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      ++result.checked;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_param = p.name;
        result.worst_index = idx;
      }
    }
  }
  for (std::size_t pi = 0; pi < params.size(); ++pi) params.all()[pi].grad = analytic[pi];
  return result;
}

}  // namespace neuron
