#include "quakecast/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace quakecast::nn {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double apply_act(Activation a, double z) {
  switch (a) {
    case Activation::identity: return z;
    case Activation::relu: return z > 0.0 ? z : 0.0;
    case Activation::tanh: return std::tanh(z);
  }
  return z;
}

// derivative as a function of the pre-activation; relu at exactly 0 uses
// subgradient 0
double act_grad(Activation a, double z) {
  switch (a) {
    case Activation::identity: return 1.0;
    case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::tanh: {
      double t = std::tanh(z);
      return 1.0 - t * t;
    }
  }
  return 1.0;
}

}  // namespace

double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
double elu_grad_from_input(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

// ---- Dense ------------------------------------------------------------------

Dense::Dense(std::string name, int in_dim, int out_dim, Activation act)
    : weight(in_dim, out_dim),
      bias(1, out_dim),
      weight_grad(in_dim, out_dim),
      bias_grad(1, out_dim),
      name_(std::move(name)),
      act_(act) {}

const Tensor2& Dense::forward(const Tensor2& x) {
  if (x.cols != weight.rows) throw std::invalid_argument("dense " + name_ + ": input width mismatch");
  input_ = x;
  matmul(x, weight, pre_act_);
  add_row_bias(pre_act_, bias);
  output_ = pre_act_;
  if (act_ != Activation::identity)
    for (double& v : output_.data) v = apply_act(act_, v);
  return output_;
}

Tensor2 Dense::backward(const Tensor2& grad_y) {
  if (!grad_y.same_shape(pre_act_)) throw std::invalid_argument("dense " + name_ + ": grad shape mismatch");
  Tensor2 grad_z = grad_y;
  if (act_ != Activation::identity)
    for (std::size_t i = 0; i < grad_z.data.size(); ++i)
      grad_z.data[i] *= act_grad(act_, pre_act_.data[i]);
  matmul_tn(input_, grad_z, weight_grad, /*accumulate=*/true);
  accumulate_row_bias_grad(grad_z, bias_grad);
  Tensor2 grad_x;
  matmul_nt(grad_z, weight, grad_x);
  return grad_x;
}

void Dense::collect_params(std::vector<ParamRef>& out) {
  out.push_back({name_ + ".weight", &weight, &weight_grad});
  out.push_back({name_ + ".bias", &bias, &bias_grad, true});
}

void Dense::zero_grads() {
  weight_grad.zero();
  bias_grad.zero();
}

// ---- LSTM -------------------------------------------------------------------

LstmLayer::LstmLayer(std::string name, int in_dim, int hidden)
    : w_input(in_dim + hidden, hidden),
      w_forget(in_dim + hidden, hidden),
      w_output(in_dim + hidden, hidden),
      w_cand(in_dim + hidden, hidden),
      b_input(1, hidden),
      b_forget(1, hidden),
      b_output(1, hidden),
      b_cand(1, hidden),
      w_input_grad(in_dim + hidden, hidden),
      w_forget_grad(in_dim + hidden, hidden),
      w_output_grad(in_dim + hidden, hidden),
      w_cand_grad(in_dim + hidden, hidden),
      b_input_grad(1, hidden),
      b_forget_grad(1, hidden),
      b_output_grad(1, hidden),
      b_cand_grad(1, hidden),
      name_(std::move(name)),
      in_dim_(in_dim),
      hidden_(hidden) {}

const Tensor2& LstmLayer::forward(const std::vector<Tensor2>& xs) {
  if (xs.empty()) throw std::invalid_argument("lstm " + name_ + ": empty sequence");
  batch_ = xs[0].rows;
  steps_.clear();
  steps_.resize(xs.size());

  Tensor2 h(batch_, hidden_), c(batch_, hidden_);
  for (std::size_t t = 0; t < xs.size(); ++t) {
    const Tensor2& x = xs[t];
    if (x.rows != batch_ || x.cols != in_dim_)
      throw std::invalid_argument("lstm " + name_ + ": step shape mismatch");
    StepCache& sc = steps_[t];
    sc.z = Tensor2(batch_, in_dim_ + hidden_);
    for (int r = 0; r < batch_; ++r) {
      for (int j = 0; j < in_dim_; ++j) sc.z(r, j) = x(r, j);
      for (int j = 0; j < hidden_; ++j) sc.z(r, in_dim_ + j) = h(r, j);
    }
    matmul(sc.z, w_input, sc.gate_in);
    add_row_bias(sc.gate_in, b_input);
    matmul(sc.z, w_forget, sc.gate_forget);
    add_row_bias(sc.gate_forget, b_forget);
    matmul(sc.z, w_output, sc.gate_out);
    add_row_bias(sc.gate_out, b_output);
    matmul(sc.z, w_cand, sc.gate_cand);
    add_row_bias(sc.gate_cand, b_cand);
    for (double& v : sc.gate_in.data) v = sigmoid(v);
    for (double& v : sc.gate_forget.data) v = sigmoid(v);
    for (double& v : sc.gate_out.data) v = sigmoid(v);
    for (double& v : sc.gate_cand.data) v = std::tanh(v);

    sc.cell = Tensor2(batch_, hidden_);
    sc.cell_tanh = Tensor2(batch_, hidden_);
    for (std::size_t i = 0; i < sc.cell.data.size(); ++i) {
      sc.cell.data[i] = sc.gate_forget.data[i] * c.data[i] + sc.gate_in.data[i] * sc.gate_cand.data[i];
      sc.cell_tanh.data[i] = std::tanh(sc.cell.data[i]);
    }
    c = sc.cell;
    for (std::size_t i = 0; i < h.data.size(); ++i)
      h.data[i] = sc.gate_out.data[i] * sc.cell_tanh.data[i];
  }
  h_final_ = h;
  return h_final_;
}

std::vector<Tensor2> LstmLayer::backward(const Tensor2& grad_h_final) {
  if (steps_.empty()) throw std::logic_error("lstm " + name_ + ": backward before forward");
  std::vector<Tensor2> grad_x(steps_.size());
  Tensor2 dh = grad_h_final;
  Tensor2 dc(batch_, hidden_);

  for (std::size_t ti = steps_.size(); ti-- > 0;) {
    const StepCache& sc = steps_[ti];
    // prior cell state: from the previous step's cache, zeros at t = 0
    const Tensor2* c_prev = ti > 0 ? &steps_[ti - 1].cell : nullptr;

    Tensor2 d_gate_in(batch_, hidden_), d_gate_forget(batch_, hidden_);
    Tensor2 d_gate_out(batch_, hidden_), d_gate_cand(batch_, hidden_);
    for (std::size_t i = 0; i < dh.data.size(); ++i) {
      double tanh_c = sc.cell_tanh.data[i];
      double d_out = dh.data[i] * tanh_c;
      double dci = dc.data[i] + dh.data[i] * sc.gate_out.data[i] * (1.0 - tanh_c * tanh_c);
      double cp = c_prev ? c_prev->data[i] : 0.0;
      double gi = sc.gate_in.data[i], gf = sc.gate_forget.data[i];
      double go = sc.gate_out.data[i], gc = sc.gate_cand.data[i];
      d_gate_in.data[i] = dci * gc * gi * (1.0 - gi);
      d_gate_forget.data[i] = dci * cp * gf * (1.0 - gf);
      d_gate_out.data[i] = d_out * go * (1.0 - go);
      d_gate_cand.data[i] = dci * gi * (1.0 - gc * gc);
      dc.data[i] = dci * gf;
    }

    matmul_tn(sc.z, d_gate_in, w_input_grad, true);
    matmul_tn(sc.z, d_gate_forget, w_forget_grad, true);
    matmul_tn(sc.z, d_gate_out, w_output_grad, true);
    matmul_tn(sc.z, d_gate_cand, w_cand_grad, true);
    accumulate_row_bias_grad(d_gate_in, b_input_grad);
    accumulate_row_bias_grad(d_gate_forget, b_forget_grad);
    accumulate_row_bias_grad(d_gate_out, b_output_grad);
    accumulate_row_bias_grad(d_gate_cand, b_cand_grad);

    Tensor2 dz;
    matmul_nt(d_gate_in, w_input, dz);
    matmul_nt(d_gate_forget, w_forget, dz, true);
    matmul_nt(d_gate_out, w_output, dz, true);
    matmul_nt(d_gate_cand, w_cand, dz, true);

    grad_x[ti] = Tensor2(batch_, in_dim_);
    Tensor2 dh_prev(batch_, hidden_);
    for (int r = 0; r < batch_; ++r) {
      for (int j = 0; j < in_dim_; ++j) grad_x[ti](r, j) = dz(r, j);
      for (int j = 0; j < hidden_; ++j) dh_prev(r, j) = dz(r, in_dim_ + j);
    }
    dh = dh_prev;
  }
  return grad_x;
}

void LstmLayer::collect_params(std::vector<ParamRef>& out) {
  out.push_back({name_ + ".w_input", &w_input, &w_input_grad});
  out.push_back({name_ + ".w_forget", &w_forget, &w_forget_grad});
  out.push_back({name_ + ".w_output", &w_output, &w_output_grad});
  out.push_back({name_ + ".w_cand", &w_cand, &w_cand_grad});
  out.push_back({name_ + ".b_input", &b_input, &b_input_grad, true});
  out.push_back({name_ + ".b_forget", &b_forget, &b_forget_grad, true});
  out.push_back({name_ + ".b_output", &b_output, &b_output_grad, true});
  out.push_back({name_ + ".b_cand", &b_cand, &b_cand_grad, true});
}

void LstmLayer::zero_grads() {
  for (Tensor2* g : {&w_input_grad, &w_forget_grad, &w_output_grad, &w_cand_grad, &b_input_grad,
                     &b_forget_grad, &b_output_grad, &b_cand_grad})
    g->zero();
}

// ---- GAT --------------------------------------------------------------------

Neighborhoods Neighborhoods::from_adjacency(const std::vector<std::vector<int>>& adjacency,
                                            bool include_self) {
  Neighborhoods n;
  n.lists.resize(adjacency.size());
  for (std::size_t i = 0; i < adjacency.size(); ++i) {
    if (include_self) n.lists[i].push_back(static_cast<int>(i));
    for (int j : adjacency[i]) n.lists[i].push_back(j);
    if (n.lists[i].empty())
      throw std::invalid_argument("graph attention: node " + std::to_string(i) +
                                  " has an empty neighborhood (isolated node without self-inclusion)");
  }
  return n;
}

std::size_t Neighborhoods::total_links() const {
  std::size_t n = 0;
  for (const auto& l : lists) n += l.size();
  return n;
}

GatLayer::GatLayer(std::string name, int in_dim, int out_dim, double leaky_slope)
    : weight(in_dim, out_dim),
      attn(2 * out_dim, 1),
      weight_grad(in_dim, out_dim),
      attn_grad(2 * out_dim, 1),
      name_(std::move(name)),
      in_dim_(in_dim),
      out_dim_(out_dim),
      leaky_slope_(leaky_slope) {
  if (!(leaky_slope > 0.0 && leaky_slope < 1.0))
    throw std::invalid_argument("gat " + name_ + ": leaky slope must be in (0,1)");
}

const Tensor2& GatLayer::forward(const Tensor2& h, const Neighborhoods& nbrs) {
  if (h.cols != in_dim_) throw std::invalid_argument("gat " + name_ + ": input width mismatch");
  if (static_cast<std::size_t>(h.rows) != nbrs.lists.size())
    throw std::invalid_argument("gat " + name_ + ": node count mismatch");
  input_ = h;
  nbrs_ = &nbrs;
  const int n = h.rows;

  matmul(h, weight, projected_);  // u_i = h_i W, rows are node embeddings

  // per-node attention inputs: s1_i = a[:out] . u_i, s2_i = a[out:] . u_i
  std::vector<double> s_self(n, 0.0), s_peer(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double* u = &projected_.data[static_cast<std::size_t>(i) * out_dim_];
    double a1 = 0.0, a2 = 0.0;
    for (int d = 0; d < out_dim_; ++d) {
      a1 += attn.data[d] * u[d];
      a2 += attn.data[out_dim_ + d] * u[d];
    }
    s_self[i] = a1;
    s_peer[i] = a2;
  }

  alpha_.assign(n, {});
  score_pre_.assign(n, {});
  aggregated_ = Tensor2(n, out_dim_);
  for (int i = 0; i < n; ++i) {
    const std::vector<int>& list = nbrs.lists[i];
    std::vector<double>& pre = score_pre_[i];
    std::vector<double>& alpha = alpha_[i];
    pre.resize(list.size());
    alpha.resize(list.size());
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < list.size(); ++k) {
      double raw = s_self[i] + s_peer[list[k]];
      pre[k] = raw;
      double e = raw > 0.0 ? raw : leaky_slope_ * raw;
      alpha[k] = e;
      peak = std::max(peak, e);
    }
    double denom = 0.0;
    for (double& a : alpha) {
      a = std::exp(a - peak);
      denom += a;
    }
    for (double& a : alpha) a /= denom;

    double* agg = &aggregated_.data[static_cast<std::size_t>(i) * out_dim_];
    for (std::size_t k = 0; k < list.size(); ++k) {
      const double* u = &projected_.data[static_cast<std::size_t>(list[k]) * out_dim_];
      for (int d = 0; d < out_dim_; ++d) agg[d] += alpha[k] * u[d];
    }
  }

  output_ = aggregated_;
  for (double& v : output_.data) v = elu(v);
  return output_;
}

Tensor2 GatLayer::backward(const Tensor2& grad_out) {
  if (!grad_out.same_shape(output_)) throw std::invalid_argument("gat " + name_ + ": grad shape mismatch");
  const int n = input_.rows;
  const Neighborhoods& nbrs = *nbrs_;

  // through the ELU
  Tensor2 d_agg = grad_out;
  for (std::size_t i = 0; i < d_agg.data.size(); ++i)
    d_agg.data[i] *= elu_grad_from_input(aggregated_.data[i]);

  Tensor2 d_proj(n, out_dim_);           // dL/du_j
  std::vector<double> d_s_self(n, 0.0);  // dL/ds1_i
  std::vector<double> d_s_peer(n, 0.0);  // dL/ds2_j

  for (int i = 0; i < n; ++i) {
    const std::vector<int>& list = nbrs.lists[i];
    const std::vector<double>& alpha = alpha_[i];
    const double* dm = &d_agg.data[static_cast<std::size_t>(i) * out_dim_];

    // dL/dalpha_ik and aggregation contribution to u
    std::vector<double> d_alpha(list.size());
    for (std::size_t k = 0; k < list.size(); ++k) {
      const double* u = &projected_.data[static_cast<std::size_t>(list[k]) * out_dim_];
      double s = 0.0;
      for (int d = 0; d < out_dim_; ++d) s += dm[d] * u[d];
      d_alpha[k] = s;
      double* du = &d_proj.data[static_cast<std::size_t>(list[k]) * out_dim_];
      for (int d = 0; d < out_dim_; ++d) du[d] += alpha[k] * dm[d];
    }

    // softmax backward, then LeakyReLU
    double dot = 0.0;
    for (std::size_t k = 0; k < list.size(); ++k) dot += alpha[k] * d_alpha[k];
    for (std::size_t k = 0; k < list.size(); ++k) {
      double d_e = alpha[k] * (d_alpha[k] - dot);
      double d_pre = d_e * (score_pre_[i][k] > 0.0 ? 1.0 : leaky_slope_);
      d_s_self[i] += d_pre;
      d_s_peer[list[k]] += d_pre;
    }
  }

  // scores are linear in the attention vector and the projections
  for (int i = 0; i < n; ++i) {
    const double* u = &projected_.data[static_cast<std::size_t>(i) * out_dim_];
    double* du = &d_proj.data[static_cast<std::size_t>(i) * out_dim_];
    for (int d = 0; d < out_dim_; ++d) {
      attn_grad.data[d] += d_s_self[i] * u[d];
      attn_grad.data[out_dim_ + d] += d_s_peer[i] * u[d];
      du[d] += d_s_self[i] * attn.data[d] + d_s_peer[i] * attn.data[out_dim_ + d];
    }
  }

  matmul_tn(input_, d_proj, weight_grad, true);
  Tensor2 grad_in;
  matmul_nt(d_proj, weight, grad_in);
  return grad_in;
}

void GatLayer::collect_params(std::vector<ParamRef>& out) {
  out.push_back({name_ + ".weight", &weight, &weight_grad});
  out.push_back({name_ + ".attn", &attn, &attn_grad});
}

void GatLayer::zero_grads() {
  weight_grad.zero();
  attn_grad.zero();
}

}  // namespace quakecast::nn
