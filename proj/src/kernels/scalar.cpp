#include "diamond/kernels.hpp"

namespace diamond::kernels::scalar {

void block_apply(const BlockMap& m, std::size_t n, const double* zb, const double* zl, const double* zr,
                 std::ptrdiff_t stride, double* out, std::ptrdiff_t out_stride) {
  const int d = m.d;
  for (std::size_t k = 0; k < n; ++k) {
    const double* b = zb + k * stride;
    const double* l = zl + k * stride;
    const double* r = zr + k * stride;
    double* o = out + k * out_stride;
    for (int i = 0; i < d; ++i) {
      double acc = 0.0;
      for (int j = 0; j < d; ++j) acc += m.B[i * d + j] * b[j];
      for (int j = 0; j < d; ++j) acc += m.Am[i * d + j] * l[j];
      for (int j = 0; j < d; ++j) acc += m.Ap[i * d + j] * r[j];
      o[i] = acc;
    }
  }
}

void poly_eval(const PolyField& f, std::size_t begin, std::size_t end, std::size_t n, const double* z,
               double* grad, double* jac) {
  const int d = f.d;
  for (std::size_t k = begin; k < end; ++k) {
    for (int i = 0; i < d; ++i) {
      double acc = 0.0;
      for (int j = 0; j < d; ++j) acc += f.P[i * d + j] * z[j * n + k];
      grad[i * n + k] = acc;
      for (int j = 0; j < d; ++j) jac[(i * d + j) * n + k] = f.P[i * d + j];
    }
    for (std::size_t t = 0; t < f.n_terms(); ++t) {
      const int* e = &f.exps[t * d];
      const int row = f.row[t];
      double mono = f.coeff[t];
      for (int j = 0; j < d; ++j)
        for (int p = 0; p < e[j]; ++p) mono *= z[j * n + k];
      grad[row * n + k] += mono;
      for (int j = 0; j < d; ++j) {
        if (e[j] == 0) continue;
        double dm = f.coeff[t] * e[j];
        for (int q = 0; q < d; ++q) {
          const int pw = q == j ? e[q] - 1 : e[q];
          for (int p = 0; p < pw; ++p) dm *= z[q * n + k];
        }
        jac[(row * d + j) * n + k] += dm;
      }
    }
  }
}

}  // namespace diamond::kernels::scalar
