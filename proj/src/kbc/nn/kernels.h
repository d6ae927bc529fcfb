#ifndef KBC_NN_KERNELS_H_
#define KBC_NN_KERNELS_H_

#include <span>

#include "kbc/nn/matrix.h"

namespace kbc::nn {

// c = beta * c + op(a) * op(b), where op transposes when requested.
// `c` must already have the result shape. Rows of `c` are distributed over
// OpenMP threads once the product is large enough to amortise the fork.
void Gemm(const Matrix &a, bool trans_a, const Matrix &b, bool trans_b,
          double beta, Matrix *c);

// out[r] += bias for every row.
void AddRowVector(std::span<const double> bias, Matrix *out);

// acc += column sums of m.
void AccumulateColumnSums(const Matrix &m, std::span<double> acc);

// Straightforward triple loops with no threading, kept as the reference
// the parallel kernels are tested and benchmarked against.
namespace serial {
void Gemm(const Matrix &a, bool trans_a, const Matrix &b, bool trans_b,
          double beta, Matrix *c);
}  // namespace serial

// Products below this many multiply-adds stay on one thread.
inline constexpr long kParallelGemmThreshold = 1L << 15;

}  // namespace kbc::nn

#endif  // KBC_NN_KERNELS_H_
