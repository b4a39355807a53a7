#pragma once

#include <string>
#include <vector>

#include "quakecast/nn/layers.hpp"

namespace quakecast::nn {

/// Shapes shared by both pattern networks.
struct NetShape {
  int lookback = 52;
  int n_features = 1;
  int hidden = 32;
  int gat_layers = 1;
  int n_streams = 0;
  double leaky_slope = 0.2;
};

/// Encoder -> k graph attention layers -> decoder -> linear head, one value
/// per node. Auxiliary stream values are appended to the encoder input and to
/// the head input, so a linear readout of any stream is always available.
class GnnCoderNet {
public:
  explicit GnnCoderNet(const NetShape& shape);

  std::vector<ParamRef> params();
  void zero_grads();

  /// lookbacks: [N x L*F]; streams: [N x S]. Returns predictions [N x 1].
  const Tensor2& forward(const Tensor2& lookbacks, const Tensor2& streams,
                         const Neighborhoods& nbrs);
  void backward(const Tensor2& grad_pred);

  const std::vector<GatLayer>& attention_layers() const { return gats_; }

  static Tensor2 concat_cols(const Tensor2& a, const Tensor2& b);
  static Tensor2 left_cols(const Tensor2& m, int cols);

private:
  NetShape shape_;
  Dense encoder_;
  std::vector<GatLayer> gats_;
  Dense decoder_;
  Dense head_;
  Tensor2 pred_;
};

/// LSTM over the lookback with a linear head on the final hidden state.
/// Stream values are broadcast into every timestep and appended to the head
/// input.
class LstmNet {
public:
  explicit LstmNet(const NetShape& shape);

  std::vector<ParamRef> params();
  void zero_grads();

  /// steps: L tensors [B x F]; streams: [B x S]. Returns predictions [B x 1].
  const Tensor2& forward(const std::vector<Tensor2>& steps, const Tensor2& streams);
  void backward(const Tensor2& grad_pred);

private:
  NetShape shape_;
  LstmLayer lstm_;
  Dense head_;
  Tensor2 pred_;
};

}  // namespace quakecast::nn
