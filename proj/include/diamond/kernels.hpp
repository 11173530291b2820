#pragma once

#include <cstddef>
#include <vector>

namespace diamond::kernels {

enum class Isa { scalar, avx2 };

const char* isa_name(Isa isa);
/// Best instruction set supported by both the build and the running CPU.
Isa detected_isa();
/// Instruction set used by the dispatching entry points (defaults to detected).
Isa active_isa();
/// Overrides dispatch; requesting an unsupported ISA falls back to scalar.
void set_active_isa(Isa isa);

/// Linear diamond map over a batch of n diamonds:
///   out_k = B zb_k + Am zl_k + Ap zr_k,  x_k = x + k*stride.
/// Matrices are d x d row-major. Accumulation order is fixed (B, Am, Ap, each
/// left to right), so all variants agree bitwise.
struct BlockMap {
  int d = 0;
  const double* B = nullptr;
  const double* Am = nullptr;
  const double* Ap = nullptr;
};
void block_apply(const BlockMap& m, std::size_t n, const double* zb, const double* zl, const double* zr,
                 std::ptrdiff_t stride, double* out, std::ptrdiff_t out_stride);

/// Polynomial gradient field grad S(z) = P z + sum_t coeff_t z^{e_t} e_{row_t}
/// with its Jacobian, evaluated at n points stored structure-of-arrays:
/// z[j*n + k], grad[i*n + k], jac[(i*d + j)*n + k].
struct PolyField {
  int d = 0;
  std::vector<double> P;  // d x d row-major
  std::vector<int> row;
  std::vector<double> coeff;
  std::vector<int> exps;  // n_terms x d
  std::size_t n_terms() const { return row.size(); }
};
void poly_eval(const PolyField& f, std::size_t n, const double* z, double* grad, double* jac);

namespace scalar {
void block_apply(const BlockMap& m, std::size_t n, const double* zb, const double* zl, const double* zr,
                 std::ptrdiff_t stride, double* out, std::ptrdiff_t out_stride);
void poly_eval(const PolyField& f, std::size_t begin, std::size_t end, std::size_t n, const double* z,
               double* grad, double* jac);
}  // namespace scalar

namespace avx2 {
void block_apply(const BlockMap& m, std::size_t n, const double* zb, const double* zl, const double* zr,
                 std::ptrdiff_t stride, double* out, std::ptrdiff_t out_stride);
void poly_eval(const PolyField& f, std::size_t n, const double* z, double* grad, double* jac);
}  // namespace avx2

}  // namespace diamond::kernels
