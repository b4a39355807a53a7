#include "quakecast/nn/nets.hpp"

namespace quakecast::nn {

GnnCoderNet::GnnCoderNet(const NetShape& shape)
    : shape_(shape),
      encoder_("encoder", shape.lookback * shape.n_features + shape.n_streams, shape.hidden,
               Activation::tanh),
      decoder_("decoder", shape.hidden, shape.hidden, Activation::tanh),
      head_("head", shape.hidden + shape.n_streams, 1, Activation::identity) {
  for (int k = 0; k < shape.gat_layers; ++k)
    gats_.emplace_back("gat" + std::to_string(k + 1), shape.hidden, shape.hidden,
                       shape.leaky_slope);
}

std::vector<ParamRef> GnnCoderNet::params() {
  std::vector<ParamRef> p;
  encoder_.collect_params(p);
  for (GatLayer& g : gats_) g.collect_params(p);
  decoder_.collect_params(p);
  head_.collect_params(p);
  return p;
}

void GnnCoderNet::zero_grads() {
  encoder_.zero_grads();
  for (GatLayer& g : gats_) g.zero_grads();
  decoder_.zero_grads();
  head_.zero_grads();
}

const Tensor2& GnnCoderNet::forward(const Tensor2& lookbacks, const Tensor2& streams,
                                    const Neighborhoods& nbrs) {
  Tensor2 in = concat_cols(lookbacks, streams);
  const Tensor2* h = &encoder_.forward(in);
  for (GatLayer& g : gats_) h = &g.forward(*h, nbrs);
  const Tensor2& dec = decoder_.forward(*h);
  pred_ = head_.forward(concat_cols(dec, streams));
  return pred_;
}

void GnnCoderNet::backward(const Tensor2& grad_pred) {
  Tensor2 d_head_in = head_.backward(grad_pred);
  Tensor2 d = decoder_.backward(left_cols(d_head_in, shape_.hidden));
  for (std::size_t k = gats_.size(); k-- > 0;) d = gats_[k].backward(d);
  encoder_.backward(d);
}

Tensor2 GnnCoderNet::concat_cols(const Tensor2& a, const Tensor2& b) {
  if (b.cols == 0) return a;
  Tensor2 out(a.rows, a.cols + b.cols);
  for (int r = 0; r < a.rows; ++r) {
    for (int c = 0; c < a.cols; ++c) out(r, c) = a(r, c);
    for (int c = 0; c < b.cols; ++c) out(r, a.cols + c) = b(r, c);
  }
  return out;
}

Tensor2 GnnCoderNet::left_cols(const Tensor2& m, int cols) {
  Tensor2 out(m.rows, cols);
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < cols; ++c) out(r, c) = m(r, c);
  return out;
}

LstmNet::LstmNet(const NetShape& shape)
    : shape_(shape),
      lstm_("lstm", shape.n_features + shape.n_streams, shape.hidden),
      head_("head", shape.hidden + shape.n_streams, 1, Activation::identity) {}

std::vector<ParamRef> LstmNet::params() {
  std::vector<ParamRef> p;
  lstm_.collect_params(p);
  head_.collect_params(p);
  return p;
}

void LstmNet::zero_grads() {
  lstm_.zero_grads();
  head_.zero_grads();
}

const Tensor2& LstmNet::forward(const std::vector<Tensor2>& steps, const Tensor2& streams) {
  std::vector<Tensor2> joined;
  joined.reserve(steps.size());
  for (const Tensor2& s : steps) joined.push_back(GnnCoderNet::concat_cols(s, streams));
  const Tensor2& h = lstm_.forward(joined);
  pred_ = head_.forward(GnnCoderNet::concat_cols(h, streams));
  return pred_;
}

void LstmNet::backward(const Tensor2& grad_pred) {
  Tensor2 d_head_in = head_.backward(grad_pred);
  lstm_.backward(GnnCoderNet::left_cols(d_head_in, shape_.hidden));
}

}  // namespace quakecast::nn
