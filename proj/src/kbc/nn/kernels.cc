#include "kbc/nn/kernels.h"

#include <stdexcept>

namespace kbc::nn {
namespace {

struct Shape {
  int m, k, n;
};

Shape CheckShapes(const Matrix &a, bool trans_a, const Matrix &b, bool trans_b,
                  const Matrix &c) {
  int m = trans_a ? a.cols() : a.rows();
  int k = trans_a ? a.rows() : a.cols();
  int kb = trans_b ? b.cols() : b.rows();
  int n = trans_b ? b.rows() : b.cols();
  if (k != kb || c.rows() != m || c.cols() != n) {
    throw std::invalid_argument("Gemm: incompatible shapes");
  }
  return {m, k, n};
}

}  // namespace

void Gemm(const Matrix &a, bool trans_a, const Matrix &b, bool trans_b,
          double beta, Matrix *c) {
  const Shape s = CheckShapes(a, trans_a, b, trans_b, *c);
  const long work = static_cast<long>(s.m) * s.k * s.n;
#pragma omp parallel for schedule(static) if (work >= kParallelGemmThreshold)
  for (int i = 0; i < s.m; ++i) {
    double *ci = c->row_data(i);
    if (beta == 0.0) {
      for (int j = 0; j < s.n; ++j) ci[j] = 0.0;
    } else if (beta != 1.0) {
      for (int j = 0; j < s.n; ++j) ci[j] *= beta;
    }
    if (!trans_b) {
      // Row-streaming form: ci += a(i,p) * b[p, :].
      for (int p = 0; p < s.k; ++p) {
        const double aip = trans_a ? a(p, i) : a(i, p);
        if (aip == 0.0) continue;
        const double *bp = b.row_data(p);
        for (int j = 0; j < s.n; ++j) ci[j] += aip * bp[j];
      }
    } else {
      for (int j = 0; j < s.n; ++j) {
        const double *bj = b.row_data(j);
        double sum = 0.0;
        if (!trans_a) {
          const double *ai = a.row_data(i);
          for (int p = 0; p < s.k; ++p) sum += ai[p] * bj[p];
        } else {
          for (int p = 0; p < s.k; ++p) sum += a(p, i) * bj[p];
        }
        ci[j] += sum;
      }
    }
  }
}

void AddRowVector(std::span<const double> bias, Matrix *out) {
  for (int r = 0; r < out->rows(); ++r) {
    double *row = out->row_data(r);
    for (int c = 0; c < out->cols(); ++c) row[c] += bias[c];
  }
}

void AccumulateColumnSums(const Matrix &m, std::span<double> acc) {
  for (int r = 0; r < m.rows(); ++r) {
    const double *row = m.row_data(r);
    for (int c = 0; c < m.cols(); ++c) acc[c] += row[c];
  }
}

namespace serial {

void Gemm(const Matrix &a, bool trans_a, const Matrix &b, bool trans_b,
          double beta, Matrix *c) {
  const Shape s = CheckShapes(a, trans_a, b, trans_b, *c);
  for (int i = 0; i < s.m; ++i) {
    for (int j = 0; j < s.n; ++j) {
      double sum = 0.0;
      for (int p = 0; p < s.k; ++p) {
        double x = trans_a ? a(p, i) : a(i, p);
        double y = trans_b ? b(j, p) : b(p, j);
        sum += x * y;
      }
      (*c)(i, j) = (beta == 0.0 ? 0.0 : beta * (*c)(i, j)) + sum;
    }
  }
}

}  // namespace serial
}  // namespace kbc::nn
