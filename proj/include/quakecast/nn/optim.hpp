#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "quakecast/nn/layers.hpp"
#include "quakecast/util.hpp"

namespace quakecast::nn {

struct MseResult {
  double loss = 0.0;
  std::vector<double> grad;  // dL/dpred = 2(pred - target)/n
};

MseResult mse_loss(std::span<const double> pred, std::span<const double> target);

/// Adam with bias correction; moment accumulators mirror the parameter list
/// it was created for.
class AdamState {
public:
  AdamState(const std::vector<ParamRef>& params, double learning_rate, double beta1 = 0.9,
            double beta2 = 0.999, double epsilon = 1e-8);

  /// One update over the bound parameters from their accumulated grads.
  /// Throws naming the block on a non-finite gradient.
  void step(const std::vector<ParamRef>& params);

  std::int64_t step_count() const { return step_; }
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

private:
  std::vector<Tensor2> m_, v_;
  std::int64_t step_ = 0;
};

/// Uniform init in +-sqrt(6/(fan_in+fan_out)); biases (rows == 1) zeroed.
void init_params(const std::vector<ParamRef>& params, Rng& rng);

/// Max relative finite-difference error of an analytic gradient against
/// central differences on every entry of `values`. `loss()` must re-run the
/// forward pass; `analytic` is the gradient at the unperturbed point.
double max_grad_check_error(Tensor2& values, const Tensor2& analytic,
                            const std::function<double()>& loss, double h = 1e-5);

}  // namespace quakecast::nn
