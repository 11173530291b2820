#include "diamond/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "diamond/structure.hpp"

namespace diamond {

namespace {

using CMatL = Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, Eigen::Dynamic>;

void require_nonsingular(const Mat& A, const std::string& what) {
  if (is_numerically_singular(A))
    throw SingularError(what + ": local update matrix is singular (structurally inconsistent form)");
}

// Parlett-Reinsch balancing: diagonal similarity by powers of two until row
// and column norms agree within a factor of 2 (exact, so eigenvalues unchanged).
CMatL balance(CMatL A) {
  const Eigen::Index n = A.rows();
  for (bool done = false; !done;) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      long double c = 0, r = 0;
      for (Eigen::Index j = 0; j < n; ++j)
        if (j != i) c += std::abs(A(j, i)), r += std::abs(A(i, j));
      if (c == 0 || r == 0) continue;
      long double f = 1, g = r / 2;
      const long double s = c + r;
      while (c < g) f *= 2, c *= 4, g /= 2;
      g = r * 2;
      while (c >= g) f /= 2, c /= 4, g *= 2;
      if ((c + r) / f < 0.95L * s) {
        done = false;
        A.col(i) *= f;
        A.row(i) /= f;
      }
    }
  }
  return A;
}

std::vector<std::complex<double>> eig_long(const CMatL& M) {
  Eigen::ComplexEigenSolver<CMatL> es(balance(M), false);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigenvalue solver did not converge");
  std::vector<std::complex<double>> out;
  out.reserve(M.rows());
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    out.emplace_back(static_cast<double>(es.eigenvalues()(i).real()), static_cast<double>(es.eigenvalues()(i).imag()));
  return out;
}

double max_modulus(const std::vector<std::complex<double>>& ev) {
  double m = 0.0;
  for (const auto& z : ev) m = std::max(m, std::abs(z));
  return m;
}

CMatL symbol_long(const SymbolFamily& f, int k) {
  using MatL = SymbolFamily::MatL;
  const long double th = 2.0L * std::numbers::pi_v<long double> * k / f.N;
  const std::complex<long double> z(std::cos(th), std::sin(th));
  const bool ext = f.C0l.size() > 0;
  const MatL C0 = ext ? f.C0l : f.C0.cast<long double>();
  const MatL Cp = ext ? f.Cpl : f.Cp.cast<long double>();
  const MatL Cm = ext ? f.Cml : f.Cm.cast<long double>();
  CMatL out = C0.cast<std::complex<long double>>();
  out += z * Cp.cast<std::complex<long double>>();
  out += std::conj(z) * Cm.cast<std::complex<long double>>();
  return out;
}

// Blocks and symbol family in long double. Defective unit-modulus eigenvalues
// split by sqrt of the entry error, so double-precision entries are too coarse.
template <class M>
SymbolFamily family_simple(const M& K, const M& L, const M& P, typename M::Scalar dt, typename M::Scalar dx, int N) {
  const Eigen::Index d = K.rows();
  Eigen::PartialPivLU<M> lu(M(K / dt - P / 4));
  const M B = lu.solve(M(K / dt + P / 4)), Am = lu.solve(M(L / dx + P / 4)), Ap = lu.solve(M(-L / dx + P / 4));
  const M I = M::Identity(d, d), O = M::Zero(d, d);
  M X1(2 * d, 2 * d), Y1(2 * d, 2 * d), X2(2 * d, 2 * d), Y2(2 * d, 2 * d);
  X1 << B, Ap, O, I;
  Y1 << O, Am, O, O;
  X2 << I, O, Am, B;
  Y2 << O, O, Ap, O;
  SymbolFamily f;
  f.N = N;
  f.C0l = X2 * X1 + Y2 * Y1;
  f.Cpl = Y2 * X1;
  f.Cml = X2 * Y1;
  f.C0 = f.C0l.template cast<double>();
  f.Cp = f.Cpl.template cast<double>();
  f.Cm = f.Cml.template cast<double>();
  return f;
}

}  // namespace

Eigen::MatrixXcd SymbolFamily::symbol(int k) const {
  const double th = 2.0 * std::numbers::pi * k / N;
  const std::complex<double> z(std::cos(th), std::sin(th));
  return C0.cast<std::complex<double>>() + z * Cp.cast<std::complex<double>>() +
         std::conj(z) * Cm.cast<std::complex<double>>();
}

SimpleBlocks build_blocks_simple(const LinearizedForm& lf, double dt, double dx) {
  const Mat lhs = lf.K / dt - lf.Peff / 4.0;
  require_nonsingular(lhs, "build_blocks_simple");
  Eigen::PartialPivLU<Mat> lu(lhs);
  return {lu.solve(lf.K / dt + lf.Peff / 4.0), lu.solve(lf.L / dx + lf.Peff / 4.0),
          lu.solve(-lf.L / dx + lf.Peff / 4.0)};
}

SymbolFamily assemble_symbol_family_simple(const SimpleBlocks& b, int N) {
  const int d = static_cast<int>(b.B.rows());
  const Mat I = Mat::Identity(d, d), O = Mat::Zero(d, d);
  Mat X1(2 * d, 2 * d), Y1(2 * d, 2 * d), X2(2 * d, 2 * d), Y2(2 * d, 2 * d);
  X1 << b.B, b.Ap, O, I;
  Y1 << O, b.Am, O, O;
  X2 << I, O, b.Am, b.B;
  Y2 << O, O, b.Ap, O;
  return {X2 * X1 + Y2 * Y1, Y2 * X1, X2 * Y1, N};
}

std::pair<Mat, Mat> assemble_half_step_matrices(const SimpleBlocks& b, int N) {
  const int d = static_cast<int>(b.B.rows());
  const int n = 2 * N * d;
  auto at = [&](int cell, int half) { return (2 * ((cell % N + N) % N) + half) * d; };
  Mat M1 = Mat::Zero(n, n), M2 = Mat::Zero(n, n);
  for (int i = 0; i < N; ++i) {
    // First half-step: z_i^1 = B z_i^0 + Am z_{i-1}^{1/2} + Ap z_i^{1/2}.
    M1.block(at(i, 0), at(i, 0), d, d) += b.B;
    M1.block(at(i, 0), at(i - 1, 1), d, d) += b.Am;
    M1.block(at(i, 0), at(i, 1), d, d) += b.Ap;
    M1.block(at(i, 1), at(i, 1), d, d) += Mat::Identity(d, d);
    // Second: z_i^{3/2} = B z_i^{1/2} + Am z_i^1 + Ap z_{i+1}^1.
    M2.block(at(i, 0), at(i, 0), d, d) += Mat::Identity(d, d);
    M2.block(at(i, 1), at(i, 1), d, d) += b.B;
    M2.block(at(i, 1), at(i, 0), d, d) += b.Am;
    M2.block(at(i, 1), at(i + 1, 0), d, d) += b.Ap;
  }
  return {M1, M2};
}

Mat assemble_full_update_matrix(const SimpleBlocks& b, int N) {
  const auto [M1, M2] = assemble_half_step_matrices(b, N);
  return M2 * M1;
}

Mat assemble_full_update_matrix(const LinearizedForm& lf, double dt, double dx, int N) {
  return assemble_full_update_matrix(build_blocks_simple(lf, dt, dx), N);
}

RkBlocks build_blocks_rk(const LinearizedForm& lf, const RKTableau& tab, double dt, double dx) {
  const int d = lf.d(), r = tab.r;
  const auto sys = assemble_stage_system(lf.K, lf.L, lf.Peff, tab, dt, dx);
  require_nonsingular(sys.Q, "build_blocks_rk");
  Eigen::PartialPivLU<Mat> lu(sys.Q);
  const Mat Sb = lu.solve(sys.Db), Sl = lu.solve(sys.Dl);
  // Top edge weights (I_r (x) beta (x) I_d), right edge weights (beta (x) I_{dr}).
  const Mat Id = Mat::Identity(d, d);
  Mat Wt = Mat::Zero(r * d, r * r * d), Wr = Mat::Zero(r * d, r * r * d);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      Wt.block(i * d, (i * r + j) * d, d, d) = tab.beta(j) * Id;
      Wr.block(j * d, (i * r + j) * d, d, d) = tab.beta(i) * Id;
    }
  const Mat Ie = Mat::Identity(r * d, r * d);
  RkBlocks out;
  out.Clt = Wt * Sl;
  out.Cbt = (1.0 - tab.alpha) * Ie + Wt * Sb;
  out.Clr = (1.0 - tab.alpha) * Ie + Wr * Sl;
  out.Cbr = Wr * Sb;
  return out;
}

SymbolFamily assemble_symbol_family_rk(const RkBlocks& b, int N) {
  const Eigen::Index m = b.Clt.rows();
  const Mat O = Mat::Zero(m, m);
  Mat C0(2 * m, 2 * m), Cp(2 * m, 2 * m), Cm(2 * m, 2 * m);
  C0 << b.Clt * b.Cbr, b.Cbt * b.Clt, b.Clr * b.Cbr, b.Cbr * b.Clt;
  Cp << b.Cbt * b.Cbt, O, b.Cbr * b.Cbt, O;
  Cm << O, b.Clt * b.Clr, O, b.Clr * b.Clr;
  return {C0, Cp, Cm, N};
}

Mat assemble_full_update_matrix_rk(const RkBlocks& b, int N) {
  const int m = static_cast<int>(b.Clt.rows());
  const int n = 2 * N * m;
  auto up = [&](int cell) { return 2 * ((cell % N + N) % N) * m; };
  auto down = [&](int cell) { return up(cell) + m; };
  // First half-step: diamond i reads up-edge i (bottom) and down-edge i-1
  // (left); its top edge t_i and right edge r_i are stored as (up i, down i).
  Mat M1 = Mat::Zero(n, n), M2 = Mat::Zero(n, n);
  for (int i = 0; i < N; ++i) {
    M1.block(up(i), down(i - 1), m, m) += b.Clt;
    M1.block(up(i), up(i), m, m) += b.Cbt;
    M1.block(down(i), down(i - 1), m, m) += b.Clr;
    M1.block(down(i), up(i), m, m) += b.Cbr;
    // Second half-step: diamond at half point i reads r_i (left) and t_{i+1} (bottom).
    M2.block(up(i), down(i), m, m) += b.Clt;
    M2.block(up(i), up(i + 1), m, m) += b.Cbt;
    M2.block(down(i), down(i), m, m) += b.Clr;
    M2.block(down(i), up(i + 1), m, m) += b.Cbr;
  }
  return M2 * M1;
}

std::vector<std::complex<double>> eigenvalues(const Mat& M) {
  return eig_long(M.cast<long double>().cast<std::complex<long double>>());
}

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXcd& M) {
  return eig_long(M.cast<std::complex<long double>>());
}

Criterion Criterion::parse(const std::string& text) {
  Criterion c;
  if (text == "strict") {
    c.kind = strict;
  } else if (text == "nozero") {
    c.kind = nozero;
  } else if (text.rfind("growth", 0) == 0) {
    c.kind = growth;
    if (text.size() > 6) {
      if (text[6] != ':') throw std::invalid_argument("criterion: expected growth:THETA, got " + text);
      c.theta = std::stod(text.substr(7));
    }
    if (!(c.theta > 0.0)) throw std::invalid_argument("criterion: growth threshold must be positive");
  } else {
    throw std::invalid_argument("criterion: unknown '" + text + "' (strict, nozero, growth:THETA)");
  }
  return c;
}

std::string Criterion::str() const {
  switch (kind) {
    case strict: return "strict";
    case nozero: return "nozero";
    case growth: {
      std::string t = std::to_string(theta);
      t.erase(t.find_last_not_of('0') + 1);
      if (t.back() == '.') t.pop_back();
      return "growth:" + t;
    }
  }
  return "strict";
}

SpectralVerdict spectral_verdict(const SymbolFamily& family, const Criterion& criterion, bool keep_spectra) {
  SpectralVerdict v;
  v.criterion = criterion.str();
  for (int k = 0; k < family.N; ++k) {
    std::vector<std::complex<double>> ev;
    try {
      ev = eig_long(symbol_long(family, k));
    } catch (const std::runtime_error&) {
      throw std::runtime_error("spectral_verdict: eigenvalue solver failed at k=" + std::to_string(k));
    }
    const double m = max_modulus(ev);
    if (m > v.dominant_all) {
      v.dominant_all = m;
      v.dominant_k = k;
    }
    if (k >= 1) v.dominant_nonzero = std::max(v.dominant_nonzero, m);
    if (keep_spectra) v.spectra.push_back(std::move(ev));
  }
  switch (criterion.kind) {
    case Criterion::strict: v.stable = v.dominant_all <= 1.0 + criterion.tol; break;
    case Criterion::nozero: v.stable = v.dominant_nonzero <= 1.0 + criterion.tol; break;
    case Criterion::growth:
      if (!(criterion.dt > 0.0)) throw std::invalid_argument("spectral_verdict: growth criterion needs dt > 0");
      v.stable = std::log(v.dominant_all) / criterion.dt <= std::log(criterion.theta);
      break;
  }
  return v;
}

SchemeSpec SchemeSpec::parse(const std::string& text) {
  if (text == "simple") return {0};
  if (text.rfind("rk:", 0) == 0) {
    const int r = std::stoi(text.substr(3));
    if (r < 1 || r > 4) throw std::invalid_argument("scheme: rk stages must be in 1..4");
    return {r};
  }
  throw std::invalid_argument("scheme: expected 'simple' or 'rk:R', got '" + text + "'");
}

std::string SchemeSpec::str() const { return r == 0 ? "simple" : "rk:" + std::to_string(r); }

SymbolFamily symbol_family(const LinearizedForm& lf, const SchemeSpec& scheme, double dt, double dx, int N) {
  if (scheme.simple()) {
    require_nonsingular(lf.K / dt - lf.Peff / 4.0, "build_blocks_simple");
    using MatL = SymbolFamily::MatL;
    return family_simple<MatL>(lf.K.cast<long double>(), lf.L.cast<long double>(), lf.Peff.cast<long double>(), dt,
                               dx, N);
  }
  return assemble_symbol_family_rk(build_blocks_rk(lf, gauss_tableau(scheme.r), dt, dx), N);
}

double SweepResult::c_at(double s) const {
  double acc = 0.0;
  int n = 0;
  for (const auto& p : points) {
    if (!p.dt_max) continue;
    acc += std::log(*p.dt_max) - s * std::log(p.dx);
    ++n;
  }
  return n ? std::exp(acc / n) : 0.0;
}

SweepResult stability_boundary_sweep(const LinearizedForm& lf, const SchemeSpec& scheme, double length,
                                     const std::vector<double>& dx_list, const Criterion& criterion) {
  for (size_t i = 0; i < dx_list.size(); ++i) {
    if (!(dx_list[i] > 0.0)) throw std::invalid_argument("sweep: dx values must be positive");
    if (i && dx_list[i] >= dx_list[i - 1]) throw std::invalid_argument("sweep: dx list must be descending");
  }
  SweepResult res;
  for (double dx : dx_list) {
    SweepPoint p;
    p.dx = dx;
    p.N = static_cast<int>(std::lround(length / dx));
    auto stable = [&](double dt) {
      Criterion c = criterion;
      c.dt = dt;
      try {
        return spectral_verdict(symbol_family(lf, scheme, dt, dx, p.N), c).stable;
      } catch (const SingularError&) {
        return false;
      }
    };
    double lo = 1e-12, hi = dx;
    if (stable(hi)) {
      p.dt_max = hi;
    } else if (stable(lo)) {
      // Bisection in log(dt): the bracket spans eleven decades.
      for (int it = 0; it < 40; ++it) {
        const double mid = std::sqrt(lo * hi);
        (stable(mid) ? lo : hi) = mid;
      }
      p.dt_max = lo;
    }
    res.points.push_back(p);
  }
  std::vector<double> xs, ys;
  for (const auto& p : res.points)
    if (p.dt_max) {
      xs.push_back(std::log(p.dx));
      ys.push_back(std::log(*p.dt_max));
    }
  if (xs.size() >= 2) {
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    res.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    res.intercept = (sy - res.slope * sx) / n;
  }
  return res;
}

}  // namespace diamond
