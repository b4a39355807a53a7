#pragma once

#include <cstddef>
#include <vector>

namespace quakecast::nn {

/// Dense row-major matrix of doubles. The only tensor shape the kernels need.
struct Tensor2 {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor2() = default;
  Tensor2(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  std::size_t size() const { return data.size(); }
  void zero() { data.assign(data.size(), 0.0); }
  bool same_shape(const Tensor2& o) const { return rows == o.rows && cols == o.cols; }
  bool all_finite() const;
};

/// C += or = A * B. Shapes: [m x k] * [k x n] -> [m x n].
void matmul(const Tensor2& a, const Tensor2& b, Tensor2& out, bool accumulate = false);
/// C += or = A^T * B. Shapes: [k x m]^T * [k x n] -> [m x n].
void matmul_tn(const Tensor2& a, const Tensor2& b, Tensor2& out, bool accumulate = false);
/// C += or = A * B^T. Shapes: [m x k] * [n x k]^T -> [m x n].
void matmul_nt(const Tensor2& a, const Tensor2& b, Tensor2& out, bool accumulate = false);

/// out[r] = a[r] + bias row (bias is [1 x n]).
void add_row_bias(Tensor2& a, const Tensor2& bias);
/// bias_grad[1 x n] += column sums of g.
void accumulate_row_bias_grad(const Tensor2& g, Tensor2& bias_grad);

}  // namespace quakecast::nn
