#pragma once

#include <cstddef>

// Low-level dense kernels shared by the convolution and linear operators.
// Exposed so benchmarks can time them directly.
namespace shadowkit::tensorcore::kernels {

/// C[m x n] += A[m x k] * B[k x n], all row-major with leading dimensions
/// lda/ldb/ldc.
///
/// Every output element is accumulated as a separate sum over k in
/// ascending order, starting from zero, and only then added to C. The result
/// does not depend on tiling, so edge tiles and full tiles agree bit for bit.
void gemm_acc(std::size_t m, std::size_t n, std::size_t k,
              const double* a, std::size_t lda,
              const double* b, std::size_t ldb,
              double* c, std::size_t ldc);

/// dst[cols x rows] = transpose(src[rows x cols]).
void transpose(std::size_t rows, std::size_t cols, const double* src, double* dst);

}  // namespace shadowkit::tensorcore::kernels
