#include "shadowkit/tensorcore/kernels.hpp"

#include <algorithm>
#include <cstring>
#include <vector>

namespace shadowkit::tensorcore::kernels {

namespace {

// Eight doubles per register on AVX-512; the compiler lowers this to narrower
// registers elsewhere with identical per-lane arithmetic.
typedef double v8d __attribute__((vector_size(64)));

constexpr std::size_t kMR = 8;
constexpr std::size_t kNR = 16;

inline v8d load(const double* p) {
  v8d v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

inline void store(double* p, v8d v) { std::memcpy(p, &v, sizeof v); }

// Full MR x NR tile against a packed B panel (k rows of NR contiguous values).
inline void micro_full(std::size_t k, const double* a, std::size_t lda, const double* bp,
                       double* c, std::size_t ldc) {
  v8d acc[kMR][2] = {};
  for (std::size_t p = 0; p < k; ++p) {
    const v8d b0 = load(bp + p * kNR);
    const v8d b1 = load(bp + p * kNR + 8);
#pragma GCC unroll 8
    for (std::size_t r = 0; r < kMR; ++r) {
      const double x = a[r * lda + p];
      acc[r][0] += x * b0;
      acc[r][1] += x * b1;
    }
  }
#pragma GCC unroll 8
  for (std::size_t r = 0; r < kMR; ++r) {
    store(c + r * ldc, load(c + r * ldc) + acc[r][0]);
    store(c + r * ldc + 8, load(c + r * ldc + 8) + acc[r][1]);
  }
}

// Ragged tile (rows < MR or cols < NR). Same accumulation order as micro_full.
inline void micro_edge(std::size_t rows, std::size_t cols, std::size_t k, const double* a,
                       std::size_t lda, const double* bp, double* c, std::size_t ldc) {
  double acc[kMR][kNR] = {};
  for (std::size_t p = 0; p < k; ++p) {
    const double* b = bp + p * kNR;
    for (std::size_t r = 0; r < rows; ++r) {
      const double x = a[r * lda + p];
      for (std::size_t j = 0; j < cols; ++j) acc[r][j] += x * b[j];
    }
  }
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < cols; ++j) c[r * ldc + j] += acc[r][j];
}

}  // namespace

void gemm_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
              const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  if (m == 0 || n == 0 || k == 0) return;
  thread_local std::vector<double> panel;
  panel.resize(k * kNR);

  for (std::size_t j0 = 0; j0 < n; j0 += kNR) {
    const std::size_t cols = std::min(kNR, n - j0);
    for (std::size_t p = 0; p < k; ++p) {
      const double* src = b + p * ldb + j0;
      std::copy(src, src + cols, panel.data() + p * kNR);
    }
    std::size_t i0 = 0;
    if (cols == kNR) {
      for (; i0 + kMR <= m; i0 += kMR)
        micro_full(k, a + i0 * lda, lda, panel.data(), c + i0 * ldc + j0, ldc);
    }
    for (; i0 < m; i0 += kMR) {
      const std::size_t rows = std::min(kMR, m - i0);
      micro_edge(rows, cols, k, a + i0 * lda, lda, panel.data(), c + i0 * ldc + j0, ldc);
    }
  }
}

void transpose(std::size_t rows, std::size_t cols, const double* src, double* dst) {
  constexpr std::size_t kBlock = 32;
  for (std::size_t i0 = 0; i0 < rows; i0 += kBlock) {
    const std::size_t i1 = std::min(rows, i0 + kBlock);
    for (std::size_t j0 = 0; j0 < cols; j0 += kBlock) {
      const std::size_t j1 = std::min(cols, j0 + kBlock);
      for (std::size_t i = i0; i < i1; ++i)
        for (std::size_t j = j0; j < j1; ++j) dst[j * rows + i] = src[i * cols + j];
    }
  }
}

}  // namespace shadowkit::tensorcore::kernels
