#ifndef ADENET_CORE_MATMUL_HPP
#define ADENET_CORE_MATMUL_HPP

#include <algorithm>
#include <cstdint>

namespace adenet {

// C[m,n] = A[m,k] * B[k,n], row-major. Streaming "ikj" kernel: the inner two
// loops walk C and B rows contiguously so the compiler vectorizes them. Rows
// of C are each written by exactly one thread, which keeps results bit-equal
// regardless of thread count.
template <class S>
void matmul_nn(const S* a, const S* b, S* c, int64_t m, int64_t k, int64_t n,
               bool accumulate = false) {
#pragma omp parallel for schedule(static) if (m >= 8)
  for (int64_t i = 0; i < m; ++i) {
    S* crow = c + i * n;
    if (!accumulate)
      for (int64_t j = 0; j < n; ++j) crow[j] = S(0);
    const S* arow = a + i * k;
    for (int64_t l = 0; l < k; ++l) {
      const S al = arow[l];
      const S* brow = b + l * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += al * brow[j];
    }
  }
}

template <class S>
void transpose_mat(const S* x, S* xt, int64_t rows, int64_t cols) {
  constexpr int64_t kBlock = 32;
  for (int64_t i0 = 0; i0 < rows; i0 += kBlock)
    for (int64_t j0 = 0; j0 < cols; j0 += kBlock) {
      const int64_t i1 = std::min(i0 + kBlock, rows);
      const int64_t j1 = std::min(j0 + kBlock, cols);
      for (int64_t i = i0; i < i1; ++i)
        for (int64_t j = j0; j < j1; ++j) xt[j * rows + i] = x[i * cols + j];
    }
}

}  // namespace adenet

#endif  // ADENET_CORE_MATMUL_HPP
