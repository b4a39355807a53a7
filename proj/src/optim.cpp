#include "quakecast/nn/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace quakecast::nn {

MseResult mse_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size() || pred.empty())
    throw std::invalid_argument("mse: inputs must have equal non-zero length");
  MseResult r;
  r.grad.resize(pred.size());
  double n = static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double d = pred[i] - target[i];
    r.loss += d * d;
    r.grad[i] = 2.0 * d / n;
  }
  r.loss /= n;
  return r;
}

AdamState::AdamState(const std::vector<ParamRef>& params, double lr, double b1, double b2,
                     double eps)
    : learning_rate(lr), beta1(b1), beta2(b2), epsilon(eps) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const ParamRef& p : params) {
    m_.emplace_back(p.value->rows, p.value->cols);
    v_.emplace_back(p.value->rows, p.value->cols);
  }
}

void AdamState::step(const std::vector<ParamRef>& params) {
  if (params.size() != m_.size()) throw std::invalid_argument("adam: parameter list changed size");
  ++step_;
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_));
  for (std::size_t b = 0; b < params.size(); ++b) {
    const ParamRef& p = params[b];
    if (!p.grad->same_shape(*p.value) || !m_[b].same_shape(*p.value))
      throw std::invalid_argument("adam: shape mismatch in block " + p.name);
    if (!p.grad->all_finite())
      throw std::runtime_error("adam: non-finite gradient in block " + p.name);
    for (std::size_t i = 0; i < p.value->data.size(); ++i) {
      double g = p.grad->data[i];
      m_[b].data[i] = beta1 * m_[b].data[i] + (1.0 - beta1) * g;
      v_[b].data[i] = beta2 * v_[b].data[i] + (1.0 - beta2) * g * g;
      double m_hat = m_[b].data[i] / bc1;
      double v_hat = v_[b].data[i] / bc2;
      p.value->data[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + epsilon);
    }
  }
}

void init_params(const std::vector<ParamRef>& params, Rng& rng) {
  for (const ParamRef& p : params) {
    if (p.is_bias) {
      p.value->zero();
      continue;
    }
    double bound = std::sqrt(6.0 / (p.value->rows + p.value->cols));
    for (double& v : p.value->data) v = rng.uniform(-bound, bound);
  }
}

double max_grad_check_error(Tensor2& values, const Tensor2& analytic,
                            const std::function<double()>& loss, double h) {
  if (!values.same_shape(analytic)) throw std::invalid_argument("grad check: shape mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < values.data.size(); ++i) {
    double keep = values.data[i];
    values.data[i] = keep + h;
    double up = loss();
    values.data[i] = keep - h;
    double down = loss();
    values.data[i] = keep;
    double fd = (up - down) / (2.0 * h);
    double a = analytic.data[i];
    double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-6});
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace quakecast::nn
