#include <atomic>
#include <cstdlib>
#include <cstring>

#include "diamond/kernels.hpp"

namespace diamond::kernels {

namespace {

Isa initial_isa() {
  if (const char* env = std::getenv("DIAMOND_ISA"); env && std::strcmp(env, "scalar") == 0) return Isa::scalar;
  return detected_isa();
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

Isa detected_isa() {
#if defined(DIAMOND_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool ok = __builtin_cpu_supports("avx2");
  return ok ? Isa::avx2 : Isa::scalar;
#else
  return Isa::scalar;
#endif
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (isa == Isa::avx2 && detected_isa() != Isa::avx2) isa = Isa::scalar;
  current().store(isa, std::memory_order_relaxed);
}

void block_apply(const BlockMap& m, std::size_t n, const double* zb, const double* zl, const double* zr,
                 std::ptrdiff_t stride, double* out, std::ptrdiff_t out_stride) {
#ifdef DIAMOND_HAVE_AVX2
  if (active_isa() == Isa::avx2) return avx2::block_apply(m, n, zb, zl, zr, stride, out, out_stride);
#endif
  scalar::block_apply(m, n, zb, zl, zr, stride, out, out_stride);
}

void poly_eval(const PolyField& f, std::size_t n, const double* z, double* grad, double* jac) {
#ifdef DIAMOND_HAVE_AVX2
  if (active_isa() == Isa::avx2 && f.d <= 16) return avx2::poly_eval(f, n, z, grad, jac);
#endif
  scalar::poly_eval(f, 0, n, n, z, grad, jac);
}

}  // namespace diamond::kernels
