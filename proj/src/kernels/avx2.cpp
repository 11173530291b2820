// AVX2 variants: four diamonds per register. Only mul/add are used (no FMA)
// and the accumulation order matches the scalar reference.

#include <immintrin.h>

#include "diamond/kernels.hpp"

namespace diamond::kernels::avx2 {

void block_apply(const BlockMap& m, std::size_t n, const double* zb, const double* zl, const double* zr,
                 std::ptrdiff_t stride, double* out, std::ptrdiff_t out_stride) {
  const int d = m.d;
  const __m256i idx = _mm256_set_epi64x(3 * stride, 2 * stride, stride, 0);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const double* b = zb + k * stride;
    const double* l = zl + k * stride;
    const double* r = zr + k * stride;
    for (int i = 0; i < d; ++i) {
      __m256d acc = _mm256_setzero_pd();
      for (int j = 0; j < d; ++j)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(m.B[i * d + j]), _mm256_i64gather_pd(b + j, idx, 8)));
      for (int j = 0; j < d; ++j)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(m.Am[i * d + j]), _mm256_i64gather_pd(l + j, idx, 8)));
      for (int j = 0; j < d; ++j)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(m.Ap[i * d + j]), _mm256_i64gather_pd(r + j, idx, 8)));
      alignas(32) double lanes[4];
      _mm256_store_pd(lanes, acc);
      for (int q = 0; q < 4; ++q) out[(k + q) * out_stride + i] = lanes[q];
    }
  }
  if (k < n) scalar::block_apply(m, n - k, zb + k * stride, zl + k * stride, zr + k * stride, stride,
                                 out + k * out_stride, out_stride);
}

void poly_eval(const PolyField& f, std::size_t n, const double* z, double* grad, double* jac) {
  const int d = f.d;
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    __m256d zv[16];
    for (int j = 0; j < d; ++j) zv[j] = _mm256_loadu_pd(z + j * n + k);
    for (int i = 0; i < d; ++i) {
      __m256d acc = _mm256_setzero_pd();
      for (int j = 0; j < d; ++j) acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(f.P[i * d + j]), zv[j]));
      _mm256_storeu_pd(grad + i * n + k, acc);
      for (int j = 0; j < d; ++j) _mm256_storeu_pd(jac + (i * d + j) * n + k, _mm256_set1_pd(f.P[i * d + j]));
    }
    for (std::size_t t = 0; t < f.n_terms(); ++t) {
      const int* e = &f.exps[t * d];
      const int row = f.row[t];
      __m256d mono = _mm256_set1_pd(f.coeff[t]);
      for (int j = 0; j < d; ++j)
        for (int p = 0; p < e[j]; ++p) mono = _mm256_mul_pd(mono, zv[j]);
      double* g = grad + row * n + k;
      _mm256_storeu_pd(g, _mm256_add_pd(_mm256_loadu_pd(g), mono));
      for (int j = 0; j < d; ++j) {
        if (e[j] == 0) continue;
        __m256d dm = _mm256_set1_pd(f.coeff[t] * e[j]);
        for (int q = 0; q < d; ++q) {
          const int pw = q == j ? e[q] - 1 : e[q];
          for (int p = 0; p < pw; ++p) dm = _mm256_mul_pd(dm, zv[q]);
        }
        double* o = jac + (row * d + j) * n + k;
        _mm256_storeu_pd(o, _mm256_add_pd(_mm256_loadu_pd(o), dm));
      }
    }
  }
  if (k < n) scalar::poly_eval(f, k, n, n, z, grad, jac);
}

}  // namespace diamond::kernels::avx2
