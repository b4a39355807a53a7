#include "quakecast/nn/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace quakecast::nn {

bool Tensor2::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

namespace {

void check(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("tensor shape mismatch: ") + what);
}

}  // namespace

void matmul(const Tensor2& a, const Tensor2& b, Tensor2& out, bool accumulate) {
  check(a.cols == b.rows, "matmul inner");
  if (!accumulate) {
    out.rows = a.rows;
    out.cols = b.cols;
    out.data.assign(static_cast<std::size_t>(a.rows) * b.cols, 0.0);
  } else {
    check(out.rows == a.rows && out.cols == b.cols, "matmul out");
  }
  // i-k-j order streams along rows of b and out
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = &a.data[static_cast<std::size_t>(i) * a.cols];
    double* orow = &out.data[static_cast<std::size_t>(i) * out.cols];
    for (int k = 0; k < a.cols; ++k) {
      double av = arow[k];
      const double* brow = &b.data[static_cast<std::size_t>(k) * b.cols];
      for (int j = 0; j < b.cols; ++j) orow[j] += av * brow[j];
    }
  }
}

void matmul_tn(const Tensor2& a, const Tensor2& b, Tensor2& out, bool accumulate) {
  check(a.rows == b.rows, "matmul_tn inner");
  if (!accumulate) {
    out.rows = a.cols;
    out.cols = b.cols;
    out.data.assign(static_cast<std::size_t>(a.cols) * b.cols, 0.0);
  } else {
    check(out.rows == a.cols && out.cols == b.cols, "matmul_tn out");
  }
  for (int k = 0; k < a.rows; ++k) {
    const double* arow = &a.data[static_cast<std::size_t>(k) * a.cols];
    const double* brow = &b.data[static_cast<std::size_t>(k) * b.cols];
    for (int i = 0; i < a.cols; ++i) {
      double av = arow[i];
      double* orow = &out.data[static_cast<std::size_t>(i) * out.cols];
      for (int j = 0; j < b.cols; ++j) orow[j] += av * brow[j];
    }
  }
}

void matmul_nt(const Tensor2& a, const Tensor2& b, Tensor2& out, bool accumulate) {
  check(a.cols == b.cols, "matmul_nt inner");
  if (!accumulate) {
    out.rows = a.rows;
    out.cols = b.rows;
    out.data.assign(static_cast<std::size_t>(a.rows) * b.rows, 0.0);
  } else {
    check(out.rows == a.rows && out.cols == b.rows, "matmul_nt out");
  }
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = &a.data[static_cast<std::size_t>(i) * a.cols];
    double* orow = &out.data[static_cast<std::size_t>(i) * out.cols];
    for (int j = 0; j < b.rows; ++j) {
      const double* brow = &b.data[static_cast<std::size_t>(j) * b.cols];
      double s = 0.0;
      for (int k = 0; k < a.cols; ++k) s += arow[k] * brow[k];
      orow[j] += s;
    }
  }
}

void add_row_bias(Tensor2& a, const Tensor2& bias) {
  check(bias.rows == 1 && bias.cols == a.cols, "row bias");
  for (int i = 0; i < a.rows; ++i) {
    double* arow = &a.data[static_cast<std::size_t>(i) * a.cols];
    for (int j = 0; j < a.cols; ++j) arow[j] += bias.data[j];
  }
}

void accumulate_row_bias_grad(const Tensor2& g, Tensor2& bias_grad) {
  check(bias_grad.rows == 1 && bias_grad.cols == g.cols, "row bias grad");
  for (int i = 0; i < g.rows; ++i) {
    const double* grow = &g.data[static_cast<std::size_t>(i) * g.cols];
    for (int j = 0; j < g.cols; ++j) bias_grad.data[j] += grow[j];
  }
}

}  // namespace quakecast::nn
