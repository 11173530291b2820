#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "diamond/msform.hpp"
#include "diamond/tableau.hpp"

namespace diamond {

/// Raised when a local update matrix is singular (structural inconsistency).
class SingularError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// z_t = B z_b + Am z_l + Ap z_r for the simple diamond.
struct SimpleBlocks {
  Mat B, Am, Ap;
};

/// Edge maps of the collocation diamond: zt = Clt zl + Cbt zb, zr = Clr zl + Cbr zb.
struct RkBlocks {
  Mat Clt, Cbt, Clr, Cbr;
};

/// Block-circulant full-step symbol: Lambda_k = C0 + zeta^k Cp + zeta^-k Cm.
struct SymbolFamily {
  using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  Mat C0, Cp, Cm;
  int N = 0;
  /// Extended-precision copies used by the eigen-solves when filled.
  MatL C0l, Cpl, Cml;

  Eigen::MatrixXcd symbol(int k) const;
};

SimpleBlocks build_blocks_simple(const LinearizedForm& lf, double dt, double dx);
SymbolFamily assemble_symbol_family_simple(const SimpleBlocks& blocks, int N);
/// Half-step matrices (M1, M2) on the zig-zag vector.
std::pair<Mat, Mat> assemble_half_step_matrices(const SimpleBlocks& blocks, int N);
/// Explicit M = M2 M1 on the zig-zag vector (cell i holds z_i, z_{i+1/2}).
Mat assemble_full_update_matrix(const LinearizedForm& lf, double dt, double dx, int N);
Mat assemble_full_update_matrix(const SimpleBlocks& blocks, int N);

RkBlocks build_blocks_rk(const LinearizedForm& lf, const RKTableau& tab, double dt, double dx);
SymbolFamily assemble_symbol_family_rk(const RkBlocks& blocks, int N);
/// Explicit full-step matrix of the collocation diamond (cell i holds its
/// up-edge and down-edge stacks).
Mat assemble_full_update_matrix_rk(const RkBlocks& blocks, int N);

struct Criterion {
  enum Kind { strict, nozero, growth };
  Kind kind = strict;
  double theta = 1.1;  // growth only
  double dt = 0.0;     // growth only; filled in by sweeps
  double tol = 1e-9;

  /// "strict", "nozero" or "growth:THETA".
  static Criterion parse(const std::string& text);
  std::string str() const;
};

struct SpectralVerdict {
  double dominant_all = 0.0;
  double dominant_nonzero = 0.0;  // max over k >= 1
  int dominant_k = 0;
  bool stable = false;
  std::string criterion;
  std::vector<std::vector<std::complex<double>>> spectra;  // per k, when requested
};

SpectralVerdict spectral_verdict(const SymbolFamily& family, const Criterion& criterion, bool keep_spectra = false);

/// Eigenvalues of a real matrix, computed in extended precision.
std::vector<std::complex<double>> eigenvalues(const Mat& M);
std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXcd& M);

struct SchemeSpec {
  int r = 0;  // 0 = simple diamond, r >= 1 = Gauss collocation with r stages

  static SchemeSpec parse(const std::string& text);  // "simple" or "rk:R"
  std::string str() const;
  bool simple() const { return r == 0; }
};

/// Symbol family of a scheme at (dt, dx) with N cells.
SymbolFamily symbol_family(const LinearizedForm& lf, const SchemeSpec& scheme, double dt, double dx, int N);

struct SweepPoint {
  double dx = 0.0;
  int N = 0;
  std::optional<double> dt_max;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  double slope = 0.0;      // least-squares slope of log dt_max against log dx
  double intercept = 0.0;  // fitted c = exp(intercept)
  /// Geometric-mean constant with the exponent fixed: dt_max ~ c dx^s.
  double c_at(double s) const;
};

/// Bisection (40 iterations on [1e-12, dx]) for the largest stable dt per dx,
/// with N = round(length / dx).
SweepResult stability_boundary_sweep(const LinearizedForm& lf, const SchemeSpec& scheme, double length,
                                     const std::vector<double>& dx_list, const Criterion& criterion);

}  // namespace diamond
