#include <doctest.h>

#include <algorithm>
#include <random>

#include "diamond/integrator.hpp"
#include "diamond/spectral.hpp"

using namespace diamond;
using cplx = std::complex<double>;

namespace {

double spectrum_distance(std::vector<cplx> a, std::vector<cplx> b) {
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  std::vector<bool> used(b.size(), false);
  for (const auto& x : a) {
    size_t best = 0;
    double bd = 1e300;
    for (size_t j = 0; j < b.size(); ++j)
      if (!used[j] && std::abs(x - b[j]) < bd) bd = std::abs(x - b[j]), best = j;
    used[best] = true;
    worst = std::max(worst, bd);
  }
  return worst;
}

std::vector<cplx> union_of_symbols(const SymbolFamily& f) {
  std::vector<cplx> out;
  for (int k = 0; k < f.N; ++k) {
    const auto ev = eigenvalues(Eigen::MatrixXcd(f.symbol(k)));
    out.insert(out.end(), ev.begin(), ev.end());
  }
  return out;
}

// Two-variable form with invertible K and no potential.
LinearizedForm rotation_form() {
  LinearizedForm lf;
  lf.names = {"a", "b"};
  lf.K = Mat{{0, 1}, {-1, 0}};
  lf.L = Mat{{0, 2}, {-2, 0}};
  lf.Peff = Mat::Zero(2, 2);
  lf.z_ref = Vec::Zero(2);
  return lf;
}

}  // namespace

TEST_CASE("blocks without potential reduce to the transport map") {
  const auto lf = rotation_form();
  const double dt = 0.03, dx = 0.1;
  const auto b = build_blocks_simple(lf, dt, dx);
  const Mat T = (dt / dx) * lf.K.inverse() * lf.L;
  CHECK((b.B - Mat::Identity(2, 2)).norm() < 1e-14);
  CHECK((b.Am - T).norm() < 1e-14);
  CHECK((b.Ap + T).norm() < 1e-14);
}

TEST_CASE("half-step matrices place the periodic corners") {
  const auto lf = linearize(registry_get("wave"));
  const auto b = build_blocks_simple(lf, 0.05, 0.1);
  const int N = 5, d = 3;
  const auto [M1, M2] = assemble_half_step_matrices(b, N);
  auto blk = [&](const Mat& M, int ci, int hi, int cj, int hj) {
    return M.block((2 * ci + hi) * d, (2 * cj + hj) * d, d, d);
  };
  CHECK((blk(M1, 0, 0, N - 1, 1) - b.Am).norm() == 0.0);
  CHECK((blk(M1, 0, 0, 0, 1) - b.Ap).norm() == 0.0);
  CHECK((blk(M2, N - 1, 1, 0, 0) - b.Ap).norm() == 0.0);
  CHECK((blk(M2, 2, 1, 2, 0) - b.Am).norm() == 0.0);
  CHECK((assemble_full_update_matrix(b, N) - M2 * M1).norm() == 0.0);
}

TEST_CASE("block-circulant similarity for the simple and collocation diamonds") {
  for (const std::string name : {"wave", "linear_kg", "dirac", "good_boussinesq"}) {
    const auto lf = linearize(registry_get(name));
    const double dt = name == "good_boussinesq" ? 1e-3 : 0.05, dx = 0.1;
    for (int N : {3, 6}) {
      const auto b = build_blocks_simple(lf, dt, dx);
      CHECK_MESSAGE(spectrum_distance(eigenvalues(assemble_full_update_matrix(b, N)),
                                      union_of_symbols(assemble_symbol_family_simple(b, N))) < 1e-8,
                    name);
      for (int r : {1, 2}) {
        const auto rb = build_blocks_rk(lf, gauss_tableau(r), dt, dx);
        CHECK_MESSAGE(spectrum_distance(eigenvalues(assemble_full_update_matrix_rk(rb, N)),
                                        union_of_symbols(assemble_symbol_family_rk(rb, N))) < 1e-8,
                      name << " r=" << r);
      }
    }
  }
}

TEST_CASE("symbols at k and N-k are conjugate") {
  const auto lf = linearize(registry_get("dirac"));
  const auto f = symbol_family(lf, SchemeSpec{}, 0.05, 0.1, 12);
  for (int k = 1; k < 12; ++k) CHECK((f.symbol(k) - f.symbol(12 - k).conjugate()).norm() < 1e-12);
  const auto fr = symbol_family(lf, SchemeSpec{2}, 0.05, 0.1, 12);
  for (int k = 1; k < 12; ++k) CHECK((fr.symbol(k) - fr.symbol(12 - k).conjugate()).norm() < 1e-12);
}

TEST_CASE("collocation blocks reproduce a single-diamond solve") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  const Form f = registry_get("linear_kg");
  for (int r : {1, 2, 3}) {
    const auto tab = gauss_tableau(r);
    const auto b = build_blocks_rk(linearize(f), tab, 0.04, 0.1);
    Vec zb(r * 3), zl(r * 3);
    for (int i = 0; i < r * 3; ++i) zb(i) = g(rng), zl(i) = g(rng);
    const auto e = solve_diamond_rk(f, tab, zb, zl, 0.04, 0.1);
    CHECK((e.zt - (b.Clt * zl + b.Cbt * zb)).norm() < 1e-12);
    CHECK((e.zr - (b.Clr * zl + b.Cbr * zb)).norm() < 1e-12);
  }
}

TEST_CASE("structurally inconsistent forms raise SingularError") {
  CHECK_THROWS_AS(build_blocks_simple(linearize(registry_get("advection")), 0.01, 0.1), SingularError);
  CHECK_THROWS_AS(build_blocks_rk(linearize(registry_get("kdv")), gauss_tableau(2), 0.01, 0.1), SingularError);
  CHECK_THROWS_AS(symbol_family(linearize(registry_get("bbm")), SchemeSpec{}, 0.01, 0.1, 8), SingularError);
}

TEST_CASE("stability verdicts") {
  Criterion nz = Criterion::parse("nozero");
  for (const std::string name : {"linear_kg", "dirac"})
    for (int r : {0, 1, 2}) {
      const auto v = spectral_verdict(symbol_family(linearize(registry_get(name)), SchemeSpec{r}, 0.05, 0.1, 24), nz);
      CHECK_MESSAGE(v.dominant_nonzero <= 1 + 1e-9, name << " r=" << r);
    }
  const auto lf = linearize(registry_get("mixed_kg"));
  for (double dt : {1e-6, 1e-4, 1e-2}) {
    const auto v = spectral_verdict(symbol_family(lf, SchemeSpec{}, dt, 0.05, 40), Criterion{});
    CHECK(v.dominant_all > 1.0);
    CHECK_FALSE(v.stable);
  }
  const auto kept = spectral_verdict(symbol_family(lf, SchemeSpec{}, 1e-3, 0.05, 6), Criterion{}, true);
  CHECK(kept.spectra.size() == 6);
}

TEST_CASE("criterion and scheme parsing") {
  const auto g = Criterion::parse("growth:1.25");
  CHECK(g.kind == Criterion::growth);
  CHECK(g.theta == 1.25);
  CHECK(Criterion::parse("growth").theta == 1.1);
  CHECK_THROWS(Criterion::parse("growth:-1"));
  CHECK_THROWS(Criterion::parse("loose"));
  CHECK(SchemeSpec::parse("rk:3").r == 3);
  CHECK(SchemeSpec::parse("simple").simple());
  CHECK_THROWS(SchemeSpec::parse("rk:7"));
  CHECK_THROWS(SchemeSpec::parse("euler"));
}

TEST_CASE("boundary sweep") {
  const auto lf = linearize(registry_get("linear_kg"));
  CHECK_THROWS(stability_boundary_sweep(lf, SchemeSpec{}, 4.0, {0.1, 0.2}, Criterion{}));
  CHECK_THROWS(stability_boundary_sweep(lf, SchemeSpec{}, 4.0, {0.1, -0.2}, Criterion{}));
  const auto s = stability_boundary_sweep(lf, SchemeSpec{}, 4.0, {0.2, 0.1, 0.05}, Criterion::parse("nozero"));
  REQUIRE(s.points.size() == 3);
  for (const auto& p : s.points) {
    REQUIRE(p.dt_max);
    CHECK(*p.dt_max > 0.0);
    CHECK(p.N == static_cast<int>(std::lround(4.0 / p.dx)));
  }
  CHECK(s.slope == doctest::Approx(1.0).epsilon(0.1));
}
