// Acceptance checks, one per criterion: `acceptance <n>` prints a single
// "criterion <n>: PASS|FAIL ..." line and exits non-zero on failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "diamond/integrator.hpp"
#include "diamond/pipeline.hpp"
#include "diamond/propagation.hpp"
#include "diamond/spectral.hpp"
#include "diamond/structure.hpp"
#include "diamond/tableau.hpp"

using namespace diamond;

namespace {

using cplx = std::complex<double>;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "!") + what;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Greedy nearest-neighbour pairing of two spectra; returns the worst distance.
double greedy_residual(std::vector<cplx> a, std::vector<cplx> b) {
  if (a.size() != b.size()) return INFINITY;
  double worst = 0.0;
  std::vector<bool> used(b.size(), false);
  for (const cplx& x : a) {
    size_t best = 0;
    double bd = INFINITY;
    for (size_t j = 0; j < b.size(); ++j)
      if (!used[j] && std::abs(x - b[j]) < bd) bd = std::abs(x - b[j]), best = j;
    used[best] = true;
    worst = std::max(worst, bd);
  }
  return worst;
}

// Dense Newton with central-difference Jacobian on the diamond residual.
Vec oracle_diamond(const Form& f, const Vec& zb, const Vec& zl, const Vec& zr, double dt, double dx) {
  const int d = f.d();
  auto F = [&](const Vec& zt) -> Vec {
    return f.K * (zt - zb) / dt + f.L * (zr - zl) / dx - eval_grad_S(f, (zt + zb + zl + zr) / 4.0);
  };
  Vec z = zb;
  for (int it = 0; it < 100; ++it) {
    Mat J(d, d);
    for (int j = 0; j < d; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(z(j)));
      Vec zp = z, zm = z;
      zp(j) += h;
      zm(j) -= h;
      J.col(j) = (F(zp) - F(zm)) / (2 * h);
    }
    const Vec step = J.fullPivLu().solve(-F(z));
    z += step;
    if (step.lpNorm<Eigen::Infinity>() < 1e-15 * std::max(1.0, z.lpNorm<Eigen::Infinity>())) break;
  }
  return z;
}

// ---------------------------------------------------------------------------

Outcome c1() {
  Outcome o;
  const std::map<std::string, Classification> want = {
      {"advection", Classification::structurally_inconsistent},
      {"kdv", Classification::structurally_inconsistent},
      {"camassa_holm", Classification::structurally_inconsistent},
      {"bbm", Classification::structurally_inconsistent},
      {"hunter_saxton_1", Classification::structurally_inconsistent},
      {"hunter_saxton_2", Classification::structurally_inconsistent},
      {"mixed_kg", Classification::unconditionally_unstable},
      {"improved_boussinesq", Classification::unconditionally_unstable},
      {"ostrovsky", Classification::unconditionally_unstable},
      {"wave", Classification::conditionally_stable},
      {"linear_kg", Classification::conditionally_stable},
      {"dirac", Classification::conditionally_stable},
      {"good_boussinesq", Classification::conditionally_stable},
      {"nls", Classification::conditionally_stable},
  };
  const auto rows = classify_registry();
  o.check(rows.size() == want.size(), std::to_string(rows.size()) + " forms");
  std::map<Classification, std::set<std::string>> pdes;
  int mismatches = 0;
  for (const auto& r : rows) {
    auto it = want.find(r.pde);
    if (it == want.end() || it->second != r.classification) {
      ++mismatches;
      o.check(false, r.pde + "=" + to_string(r.classification));
    }
    pdes[r.classification].insert(r.table_row);
  }
  o.check(mismatches == 0, "per-form mismatches " + std::to_string(mismatches));
  const size_t n_in = pdes[Classification::structurally_inconsistent].size();
  const size_t n_un = pdes[Classification::unconditionally_unstable].size();
  const size_t n_st = pdes[Classification::conditionally_stable].size();
  o.check(n_in == 5 && n_un == 3 && n_st == 4,
          "table rows " + std::to_string(n_in) + "/" + std::to_string(n_un) + "/" + std::to_string(n_st));
  return o;
}

Outcome c2() {
  Outcome o;
  const std::vector<std::pair<std::string, std::string>> stable = {
      {"wave", "1"}, {"linear_kg", "2/3"}, {"dirac", "1/2"}, {"good_boussinesq", "2"}, {"nls", "2"}};
  AnalyzeOptions opt;
  opt.step3 = false;
  for (const auto& [name, s_lo] : stable) {
    const auto v = analyze(registry_get(name), opt);
    const bool feasible = v.step2 && !v.step2->unconditionally_unstable;
    const std::string got = feasible ? format_rational(v.step2->s_lo) : "empty";
    o.check(got == s_lo, name + " s_lo=" + got + " (want " + s_lo + ")");
  }
  for (const std::string name : {"mixed_kg", "ostrovsky", "improved_boussinesq"}) {
    const auto v = analyze(registry_get(name), opt);
    const bool empty = v.step2 && v.step2->unconditionally_unstable;
    o.check(empty, name + (empty ? " empty" : " feasible"));
  }
  return o;
}

Outcome c3() {
  Outcome o;
  constexpr double tol = 1e-12;
  const LinearizedForm lf = linearize(registry_get("wave"));
  for (auto [dt, dx] : {std::pair{0.2, 0.1}, std::pair{0.01, 0.05}}) {
    Mat B = Mat::Zero(3, 3), Am = Mat::Zero(3, 3), Ap = Mat::Zero(3, 3);
    B << 1, dt / 2, 0, 0, 1, 0, 0, 0, -1;
    Am << 0, dt / 4, -dt * dt / (4 * dx), 0, 0, -dt / dx, -4 / dx, 0, -1;
    Ap << 0, dt / 4, dt * dt / (4 * dx), 0, 0, dt / dx, 4 / dx, 0, -1;
    const auto b = build_blocks_simple(lf, dt, dx);
    const double err = std::max({(b.B - B).lpNorm<Eigen::Infinity>(), (b.Am - Am).lpNorm<Eigen::Infinity>(),
                                 (b.Ap - Ap).lpNorm<Eigen::Infinity>()});
    o.check(err <= tol, "dt=" + fmt("%g", dt) + " dx=" + fmt("%g", dx) + " err " + fmt("%.2e", err));
  }
  return o;
}

Outcome c4() {
  Outcome o;
  constexpr double tol = 1e-8;
  const double dt = 0.05, dx = 0.1;
  for (const std::string name : {"wave", "linear_kg", "dirac"}) {
    const LinearizedForm lf = linearize(registry_get(name));
    const auto blocks = build_blocks_simple(lf, dt, dx);
    double worst = 0.0;
    for (int N : {4, 8, 16}) {
      const auto fam = assemble_symbol_family_simple(blocks, N);
      std::vector<cplx> uni;
      for (int k = 0; k < N; ++k) {
        const auto ev = eigenvalues(Eigen::MatrixXcd(fam.symbol(k)));
        uni.insert(uni.end(), ev.begin(), ev.end());
      }
      worst = std::max(worst, greedy_residual(eigenvalues(assemble_full_update_matrix(blocks, N)), uni));
    }
    o.check(worst <= tol, name + " " + fmt("%.2e", worst));
  }
  return o;
}

Outcome c5() {
  Outcome o;
  constexpr double tol = 1e-9;
  Criterion nz;
  nz.kind = Criterion::nozero;
  for (const std::string name : {"linear_kg", "dirac"}) {
    const LinearizedForm lf = linearize(registry_get(name));
    double worst = 0.0;
    for (auto [dx, dt] : {std::pair{0.1, 0.05}, std::pair{0.3, 0.2}})
      for (int N : {20, 160})
        worst = std::max(worst, spectral_verdict(symbol_family(lf, SchemeSpec{}, dt, dx, N), nz).dominant_nonzero);
    o.check(worst <= 1 + tol, name + " stable side " + fmt("%.12f", worst));
    double least = INFINITY;
    for (double dx : {0.1, 0.3})
      for (int N : {20, 160})
        least = std::min(least, spectral_verdict(symbol_family(lf, SchemeSpec{}, 2 * dx, dx, N), nz).dominant_nonzero);
    o.check(least > 1, name + " dt=2dx " + fmt("%.6f", least));
  }
  return o;
}

Outcome c6() {
  Outcome o;
  const LinearizedForm lf = linearize(registry_get("good_boussinesq"));
  const std::vector<double> dxs = {0.4, 0.2, 0.1, 0.05};
  const auto s4 = stability_boundary_sweep(lf, SchemeSpec{}, 4.0, dxs, Criterion{});
  const auto s8 = stability_boundary_sweep(lf, SchemeSpec{}, 8.0, dxs, Criterion{});
  o.check(s4.slope >= 2.7 && s4.slope <= 3.3, "slope " + fmt("%.3f", s4.slope));
  const double c4 = s4.c_at(3.0), c8 = s8.c_at(3.0);
  const double factor = std::max(c4, c8) / std::min(c4, c8);
  o.check(factor >= 1.5 && factor <= 2.5,
          "c(4)=" + fmt("%.4g", c4) + " c(8)=" + fmt("%.4g", c8) + " factor " + fmt("%.3f", factor));
  return o;
}

Outcome c7() {
  Outcome o;
  const LinearizedForm lf = linearize(registry_get("nls"));
  Criterion g = Criterion::parse("growth:1.1");
  auto growth_ok = [&](double dt, int N) {
    g.dt = dt;
    return spectral_verdict(symbol_family(lf, SchemeSpec{}, dt, 0.1, N), g).stable;
  };
  o.check(growth_ok(2.5e-6, 48), "N=48 dt=2.5e-6 stable");
  o.check(!growth_ok(3.33e-6, 48), "N=48 dt=3.33e-6 unstable");
  // Full-length reference, reported only.
  const bool full = growth_ok(2.5e-6, 480) && !growth_ok(3.33e-6, 480);
  o.detail += std::string("; (N=480 pair ") + (full ? "separated" : "not separated") + ")";
  return o;
}

Outcome c8() {
  Outcome o;
  const Form f = registry_get("mixed_kg");
  MeshParams mesh{-1.0, 1.0, 40, 1e-4, 1e-4};
  const auto ic = make_initial_condition("mixed_kg_cos", f, mesh);
  const auto res = integrate(f, SchemeSpec{}, ic, mesh);
  double dev = 0.0;
  for (int i = 0; i < mesh.N; ++i)
    dev = std::max(dev, std::abs(res.final_nodal(i, 0) - std::cos(std::numbers::pi * (mesh.x(i) + mesh.dt))));
  o.check(dev > 0.1, "deviation " + fmt("%.4g", dev));
  return o;
}

Outcome c9() {
  Outcome o;
  constexpr double tol = 1e-2;
  const Form f = registry_get("dirac");
  MeshParams mesh{-24.0, 24.0, 160, 0.2, 10.0};
  const auto ic = make_initial_condition("dirac_breather", f, mesh);
  Observers obs;
  obs.energy = true;
  obs.cadence = 1;
  const auto res = integrate(f, SchemeSpec{}, ic, mesh, obs);
  o.check(res.status == RunStatus::completed, to_string(res.status));
  const double e0 = res.energy.front().value;
  double drift = 0.0;
  for (const auto& s : res.energy) drift = std::max(drift, std::abs(s.value - e0) / std::abs(e0));
  o.check(drift <= tol, "drift " + fmt("%.3e", drift));
  return o;
}

Outcome c10() {
  Outcome o;
  const Form f = registry_get("nls");
  auto run = [&](double dt) {
    MeshParams mesh{-24.0, 24.0, 480, dt, 0.1};
    return integrate(f, SchemeSpec{}, make_initial_condition("nls_2soliton", f, mesh), mesh);
  };
  const auto bad = run(3.33e-6);
  o.check(bad.status == RunStatus::diverged, "dt=3.33e-6 " + std::string(to_string(bad.status)) + " at t=" +
                                                  fmt("%.4g", bad.t_end));
  const auto good = run(2.5e-6);
  o.check(good.status == RunStatus::completed, "dt=2.5e-6 " + std::string(to_string(good.status)) +
                                                   " max|z|=" + fmt("%.3g", good.max_abs));
  return o;
}

Outcome c11() {
  Outcome o;
  constexpr double tol = 1e-8;
  const double dt = 0.01, dx = 0.1;
  for (int r : {1, 2}) {
    const auto tab = gauss_tableau(r);
    for (const std::string name : {"kdv", "camassa_holm", "bbm"}) {
      const auto rep = check_singularity_rk(linearize(registry_get(name)), tab, dt, dx);
      const bool ok = rep.singular && rep.witness_residual && *rep.witness_residual <= tol;
      o.check(ok, name + " r=" + std::to_string(r) +
                      (rep.witness_residual ? " witness " + fmt("%.1e", *rep.witness_residual) : " no witness"));
    }
    for (const std::string name : {"wave", "dirac"}) {
      const auto rep = check_singularity_rk(linearize(registry_get(name)), tab, dt, dx);
      o.check(!rep.singular, name + " r=" + std::to_string(r) + (rep.singular ? " singular" : " nonsingular"));
    }
  }
  return o;
}

Outcome c12() {
  Outcome o;
  constexpr double tol = 1e-10;
  std::mt19937_64 rng(2024);
  for (const std::string name : {"wave", "linear_kg", "dirac"}) {
    const LinearizedForm lf = linearize(registry_get(name));
    double worst = 0.0;
    for (int k = 0; k < 100; ++k)
      worst = std::max(worst, std::abs(verify_discrete_conservation(lf, 0.01, 0.1, random_tangent_pair(lf, 0.01, 0.1, rng))));
    o.check(worst <= tol, name + " " + fmt("%.2e", worst));
  }
  return o;
}

Outcome c13() {
  Outcome o;
  constexpr double tol = 1e-10;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  for (auto [name, dt, dx] : {std::tuple{"dirac", 0.05, 0.1}, std::tuple{"good_boussinesq", 0.002, 0.1}}) {
    const Form f = registry_get(name);
    const int d = f.d();
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      Vec zb(d), zl(d), zr(d);
      for (int j = 0; j < d; ++j) zb(j) = U(rng), zl(j) = U(rng), zr(j) = U(rng);
      const Vec got = solve_diamond_simple(f, zb, zl, zr, dt, dx);
      const Vec want = oracle_diamond(f, zb, zl, zr, dt, dx);
      worst = std::max(worst, (got - want).lpNorm<Eigen::Infinity>() / std::max(1.0, want.lpNorm<Eigen::Infinity>()));
    }
    o.check(worst <= tol, std::string(name) + " " + fmt("%.2e", worst));
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::function<Outcome()>, double>> all = {
      {c1, 5}, {c2, 1}, {c3, 1}, {c4, 10}, {c5, 10}, {c6, 120}, {c7, 60},
      {c8, 1}, {c9, 30}, {c10, 300}, {c11, 5}, {c12, 5}, {c13, 10}};
  std::vector<int> which;
  if (argc < 2) {
    for (size_t i = 1; i <= all.size(); ++i) which.push_back(static_cast<int>(i));
  } else {
    which.push_back(std::atoi(argv[1]));
  }
  int failed = 0;
  for (int n : which) {
    if (n < 1 || n > static_cast<int>(all.size())) {
      std::fprintf(stderr, "usage: acceptance [1-%zu]\n", all.size());
      return 2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = all[n - 1].first();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.check(secs < all[n - 1].second, fmt("%.2fs", secs) + " (budget " + fmt("%g", all[n - 1].second) + "s)");
    std::printf("criterion %d: %s  %s\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed ? 1 : 0;
}
