#pragma once

#include <string>
#include <vector>

#include "quakecast/nn/tensor.hpp"

namespace quakecast::nn {

/// Named view of a parameter tensor and its gradient accumulator, the unit
/// Adam and serialization operate on.
struct ParamRef {
  std::string name;
  Tensor2* value = nullptr;
  Tensor2* grad = nullptr;
  bool is_bias = false;  // biases start at zero instead of fan-scaled uniform
};

enum class Activation { identity, relu, tanh };

/// Fully connected layer y = act(x W + b). Caches the input and
/// pre-activation of the latest forward call for the backward pass.
class Dense {
public:
  Dense() = default;
  Dense(std::string name, int in_dim, int out_dim, Activation act);

  const Tensor2& forward(const Tensor2& x);
  /// Returns grad wrt x; accumulates into the weight/bias grads.
  Tensor2 backward(const Tensor2& grad_y);

  void collect_params(std::vector<ParamRef>& out);
  void zero_grads();

  Tensor2 weight, bias;
  Tensor2 weight_grad, bias_grad;

private:
  std::string name_;
  Activation act_ = Activation::identity;
  Tensor2 input_, pre_act_, output_;
};

/// Standard LSTM over a sequence, batch-major: step t input is [B x in_dim].
/// Gates are four identically shaped weight matrices over [x_t | h_{t-1}].
/// backward() propagates through the whole sequence from a gradient on the
/// final hidden state and accumulates parameter gradients.
class LstmLayer {
public:
  LstmLayer() = default;
  LstmLayer(std::string name, int in_dim, int hidden);

  /// Runs the sequence; returns the final hidden state [B x hidden].
  const Tensor2& forward(const std::vector<Tensor2>& steps);
  /// grad_h_final: [B x hidden]. Returns per-step input grads.
  std::vector<Tensor2> backward(const Tensor2& grad_h_final);

  void collect_params(std::vector<ParamRef>& out);
  void zero_grads();
  int hidden() const { return hidden_; }
  int in_dim() const { return in_dim_; }

  // gate order: input, forget, output, candidate
  Tensor2 w_input, w_forget, w_output, w_cand;
  Tensor2 b_input, b_forget, b_output, b_cand;
  Tensor2 w_input_grad, w_forget_grad, w_output_grad, w_cand_grad;
  Tensor2 b_input_grad, b_forget_grad, b_output_grad, b_cand_grad;

private:
  std::string name_;
  int in_dim_ = 0, hidden_ = 0;
  // per-step caches of the latest forward
  struct StepCache {
    Tensor2 z;  // [B x (in+hidden)]
    Tensor2 gate_in, gate_forget, gate_out, gate_cand;
    Tensor2 cell, cell_tanh;
  };
  std::vector<StepCache> steps_;
  Tensor2 h_final_;
  int batch_ = 0;
};

/// Neighbor lists per node, self position included first. Built once from an
/// edge list; shared by every attention layer over the same graph.
struct Neighborhoods {
  std::vector<std::vector<int>> lists;

  /// adjacency: sorted neighbor positions per node (no self).
  static Neighborhoods from_adjacency(const std::vector<std::vector<int>>& adjacency,
                                      bool include_self = true);
  std::size_t total_links() const;
};

/// Graph attention layer: per-edge scores from a shared linear map and a
/// 2*out_dim attention vector through LeakyReLU, softmax-normalized over each
/// node's neighborhood, ELU on the aggregated output.
class GatLayer {
public:
  GatLayer() = default;
  GatLayer(std::string name, int in_dim, int out_dim, double leaky_slope = 0.2);

  const Tensor2& forward(const Tensor2& h, const Neighborhoods& nbrs);
  Tensor2 backward(const Tensor2& grad_out);

  /// Attention coefficients of the latest forward, aligned with the
  /// neighborhood lists (attention(i)[k] pairs with nbrs.lists[i][k]).
  const std::vector<std::vector<double>>& attention() const { return alpha_; }

  void collect_params(std::vector<ParamRef>& out);
  void zero_grads();
  int out_dim() const { return out_dim_; }

  Tensor2 weight;     // [in_dim x out_dim]
  Tensor2 attn;       // [2*out_dim x 1]
  Tensor2 weight_grad, attn_grad;

private:
  std::string name_;
  int in_dim_ = 0, out_dim_ = 0;
  double leaky_slope_ = 0.2;
  const Neighborhoods* nbrs_ = nullptr;
  Tensor2 input_, projected_, aggregated_, output_;
  std::vector<std::vector<double>> alpha_;
  std::vector<std::vector<double>> score_pre_;  // pre-LeakyReLU edge scores
};

double elu(double x);
double elu_grad_from_input(double x);

}  // namespace quakecast::nn
