#include "diamond/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "detail/newton.hpp"
#include "diamond/kernels.hpp"
#include "diamond/structure.hpp"

namespace diamond {

using detail::inf_norm;
using detail::lu_singular;
using detail::newton;

namespace {

bool is_linear(const Form& form) { return form.terms.empty(); }

LinearizedForm linear_part(const Form& form) { return linearize(form, Vec::Zero(form.d())); }

kernels::PolyField poly_field(const Form& form) {
  const int d = form.d();
  kernels::PolyField f;
  f.d = d;
  f.P.resize(d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) f.P[i * d + j] = form.P(i, j);
  for (const auto& t : form.terms) {
    f.row.push_back(t.row);
    f.coeff.push_back(t.coeff);
    f.exps.insert(f.exps.end(), t.exponents.begin(), t.exponents.end());
  }
  return f;
}

/// Stage residual of the collocation diamond for stacked stages Z (r*r*d).
struct RkResidual {
  const Form& form;
  const RKTableau& tab;
  Mat Kt, Lt;
  Vec zb, zl;

  int d() const { return form.d(); }
  int r() const { return tab.r; }

  // T_i^j = sum_k F_jk (Z_i^k - zb_i), X_i^j = sum_k F_ik (Z_k^j - zl^j).
  void derivatives(const Vec& Z, Vec& T, Vec& X) const {
    const int d = this->d(), r = this->r();
    T = Vec::Zero(r * r * d);
    X = Vec::Zero(r * r * d);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j)
        for (int k = 0; k < r; ++k) {
          T.segment((i * r + j) * d, d) += tab.F(j, k) * (Z.segment((i * r + k) * d, d) - zb.segment(i * d, d));
          X.segment((i * r + j) * d, d) += tab.F(i, k) * (Z.segment((k * r + j) * d, d) - zl.segment(j * d, d));
        }
  }

  Vec operator()(const Vec& Z) const {
    const int d = this->d(), r = this->r();
    Vec T, X;
    derivatives(Z, T, X);
    Vec R(r * r * d);
    for (int s = 0; s < r * r; ++s)
      R.segment(s * d, d) = Kt * T.segment(s * d, d) + Lt * X.segment(s * d, d) -
                            eval_grad_S(form, Z.segment(s * d, d));
    return R;
  }

  Mat jacobian(const Vec& Z) const {
    const int d = this->d(), r = this->r();
    Mat Jm = Mat::Zero(r * r * d, r * r * d);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) {
        const int row = (i * r + j) * d;
        for (int k = 0; k < r; ++k) {
          Jm.block(row, (i * r + k) * d, d, d) += tab.F(j, k) * Kt;
          Jm.block(row, (k * r + j) * d, d, d) += tab.F(i, k) * Lt;
        }
        Jm.block(row, row, d, d) -= eval_jac_S(form, Z.segment(row, d));
      }
    return Jm;
  }

  RkEdges outputs(const Vec& Z) const {
    const int d = this->d(), r = this->r();
    RkEdges out{(1.0 - tab.alpha) * zb, (1.0 - tab.alpha) * zl};
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) {
        out.zt.segment(i * d, d) += tab.beta(j) * Z.segment((i * r + j) * d, d);
        out.zr.segment(j * d, d) += tab.beta(i) * Z.segment((i * r + j) * d, d);
      }
    return out;
  }
};

RkEdges rk_newton(const Form& form, const RKTableau& tab, const Vec& zb, const Vec& zl, double dt, double dx,
                  const NewtonOptions& opt) {
  const int d = form.d(), r = tab.r;
  RkResidual res{form, tab, form.K / dt - form.L / dx, form.K / dt + form.L / dx, zb, zl};
  Vec Z(r * r * d);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) Z.segment((i * r + j) * d, d) = zb.segment(i * d, d);
  Z = newton(std::move(Z), res, [&](const Vec& y) { return res.jacobian(y); }, opt, "solve_diamond_rk");
  return res.outputs(Z);
}

}  // namespace

// MeshParams ---------------------------------------------------------------------

long MeshParams::Nt() const { return std::lround(T / dt); }

void MeshParams::check() const {
  if (N < 2) throw std::invalid_argument("mesh: N must be at least 2");
  if (!(b > a)) throw std::invalid_argument("mesh: domain must satisfy a < b");
  if (!(dt > 0.0)) throw std::invalid_argument("mesh: dt must be positive");
  if (!(T >= 0.0)) throw std::invalid_argument("mesh: T must be non-negative");
}

// Single diamonds ------------------------------------------------------------------

Vec solve_diamond_simple(const Form& form, const Vec& zb, const Vec& zl, const Vec& zr, double dt, double dx,
                         const NewtonOptions& opt) {
  const int d = form.d();
  if (zb.size() != d || zl.size() != d || zr.size() != d)
    throw std::invalid_argument("solve_diamond_simple: input size mismatch");
  if (!zb.allFinite() || !zl.allFinite() || !zr.allFinite())
    throw std::invalid_argument("solve_diamond_simple: non-finite input");
  if (is_linear(form)) {
    const auto bl = build_blocks_simple(linear_part(form), dt, dx);
    return bl.B * zb + bl.Am * zl + bl.Ap * zr;
  }
  const Vec fixed = -form.K * zb / dt + form.L * (zr - zl) / dx;
  const Vec s = zb + zl + zr;
  auto F = [&](const Vec& y) -> Vec { return form.K * y / dt + fixed - eval_grad_S(form, (y + s) / 4.0); };
  auto J = [&](const Vec& y) -> Mat { return form.K / dt - eval_jac_S(form, (y + s) / 4.0) / 4.0; };
  return newton(zb, F, J, opt, "solve_diamond_simple");
}

RkEdges solve_diamond_rk(const Form& form, const RKTableau& tab, const Vec& zb, const Vec& zl, double dt, double dx,
                         const NewtonOptions& opt) {
  const int d = form.d(), r = tab.r;
  if (zb.size() != r * d || zl.size() != r * d) throw std::invalid_argument("solve_diamond_rk: input size mismatch");
  if (!zb.allFinite() || !zl.allFinite()) throw std::invalid_argument("solve_diamond_rk: non-finite input");
  const auto sys = assemble_stage_system(form.K, form.L, form.P, tab, dt, dx);
  if (is_numerically_singular(sys.Q))
    throw SingularError("solve_diamond_rk: stage matrix Q is singular (structurally inconsistent form)");
  if (is_linear(form)) {
    RkResidual res{form, tab, form.K / dt - form.L / dx, form.K / dt + form.L / dx, zb, zl};
    const Vec Z = Eigen::PartialPivLU<Mat>(sys.Q).solve(sys.Db * zb + sys.Dl * zl);
    return res.outputs(Z);
  }
  return rk_newton(form, tab, zb, zl, dt, dx, opt);
}

// Stepper -------------------------------------------------------------------------

struct Stepper::Impl {
  Form form;
  SchemeSpec scheme;
  MeshParams mesh;
  NewtonOptions opt;
  bool linear = false;
  int d = 0;
  double dt = 0, dx = 0;

  // Simple scheme.
  SimpleBlocks blocks;
  std::vector<double> B, Am, Ap;  // row-major copies for the kernels
  kernels::PolyField field;
  std::vector<double> scratch;

  // Collocation scheme.
  RKTableau tab;
  RkBlocks rk;
  Vec extrap;  // Lagrange weights evaluating an edge stack at its lower vertex

  static std::vector<double> row_major(const Mat& m) {
    std::vector<double> out(m.size());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) out[i * m.cols() + j] = m(i, j);
    return out;
  }

  // Linear simple half-step: interior diamonds go through the batched kernel,
  // the one whose neighbour crosses the periodic boundary is done separately.
  void linear_half(MeshState& s, int half) {
    const int N = s.N;
    const std::ptrdiff_t st = 2 * d;
    scratch.resize(static_cast<size_t>(N) * d);
    kernels::BlockMap m{d, B.data(), Am.data(), Ap.data()};
    double* v = s.values.data();
    if (half == 0) {
      // z_i^1 = B z_i^0 + Am z_{i-1}^{1/2} + Ap z_i^{1/2}; diamond 0 wraps left.
      kernels::block_apply(m, N - 1, v + st, v + d, v + st + d, st, scratch.data() + d, d);
      kernels::scalar::block_apply(m, 1, v, s.cell(N - 1, 1), v + d, st, scratch.data(), d);
      for (int i = 0; i < N; ++i) std::copy_n(scratch.data() + i * d, d, s.cell(i, 0));
    } else {
      // z_i^{3/2} = B z_i^{1/2} + Am z_i^1 + Ap z_{i+1}^1; diamond N-1 wraps right.
      kernels::block_apply(m, N - 1, v + d, v, v + st, st, scratch.data(), d);
      kernels::scalar::block_apply(m, 1, s.cell(N - 1, 1), s.cell(N - 1, 0), s.cell(0, 0), st,
                                   scratch.data() + (N - 1) * d, d);
      for (int i = 0; i < N; ++i) std::copy_n(scratch.data() + i * d, d, s.cell(i, 1));
    }
  }

  // Nonlinear simple half-step: all diamonds advance in lockstep Newton.
  void nonlinear_half(MeshState& s, int half) {
    const int N = s.N;
    auto inputs = [&](int i, const double*& zb, const double*& zl, const double*& zr) {
      if (half == 0) {
        zb = s.cell(i, 0);
        zl = s.cell((i + N - 1) % N, 1);
        zr = s.cell(i, 1);
      } else {
        zb = s.cell(i, 1);
        zl = s.cell(i, 0);
        zr = s.cell((i + 1) % N, 0);
      }
    };
    const Mat Kdt = form.K / dt;
    Mat fixed(d, N), sum(d, N), y(d, N), yprev(d, N), dprev(d, N);
    Vec rprev(N);
    std::vector<int> halvings(N, 0), newton_steps(N, 0);
    for (int i = 0; i < N; ++i) {
      const double *zb, *zl, *zr;
      inputs(i, zb, zl, zr);
      const Eigen::Map<const Vec> b(zb, d), l(zl, d), r(zr, d);
      fixed.col(i) = -Kdt * b + form.L * (r - l) / dx;
      sum.col(i) = b + l + r;
      y.col(i) = b;
    }
    std::vector<int> active(N);
    for (int i = 0; i < N; ++i) active[i] = i;
    std::vector<double> w, grad, jac;
    Eigen::PartialPivLU<Mat> lu(d);
    Mat Jm(d, d);
    Vec R(d);
    bool first = true;
    while (!active.empty()) {
      const size_t n = active.size();
      w.resize(n * d);
      grad.resize(n * d);
      jac.resize(n * d * d);
      for (size_t k = 0; k < n; ++k)
        for (int j = 0; j < d; ++j) w[j * n + k] = (y(j, active[k]) + sum(j, active[k])) * 0.25;
      kernels::poly_eval(field, n, w.data(), grad.data(), jac.data());
      std::vector<int> next;
      next.reserve(n);
      for (size_t k = 0; k < n; ++k) {
        const int i = active[k];
        for (int a = 0; a < d; ++a) R(a) = Kdt.row(a).dot(y.col(i)) + fixed(a, i) - grad[a * n + k];
        const double rn = R.norm();
        if (!first && !(rn <= rprev(i)) && halvings[i] < opt.max_halvings) {
          ++halvings[i];
          y.col(i) = yprev.col(i) + std::ldexp(1.0, -halvings[i]) * dprev.col(i);
          next.push_back(i);
          continue;
        }
        halvings[i] = 0;
        if (++newton_steps[i] > opt.max_iter)
          throw SolverError("Newton did not converge in diamond " + std::to_string(i), i,
                            (s.step + 0.5 * (half + 1)) * dt);
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b) Jm(a, b) = Kdt(a, b) - 0.25 * jac[(a * d + b) * n + k];
        lu.compute(Jm);
        if (lu_singular(lu))
          throw SolverError("singular Newton matrix in diamond " + std::to_string(i), i,
                            (s.step + 0.5 * (half + 1)) * dt);
        const Vec delta = -lu.solve(R);
        if (!delta.allFinite())
          throw SolverError("non-finite Newton step in diamond " + std::to_string(i), i,
                            (s.step + 0.5 * (half + 1)) * dt);
        const bool done = inf_norm(delta) <= opt.step_tol * (1.0 + inf_norm(y.col(i)));
        yprev.col(i) = y.col(i);
        dprev.col(i) = delta;
        rprev(i) = rn;
        y.col(i) += delta;
        if (!done) next.push_back(i);
      }
      active.swap(next);
      first = false;
    }
    for (int i = 0; i < N; ++i) std::copy_n(y.col(i).data(), d, s.cell(i, half));
  }

  void rk_half(MeshState& s, int half) {
    const int N = s.N, m = s.block;
    Mat L(m, N), Bt(m, N);
    for (int i = 0; i < N; ++i) {
      // First half: left = down(i-1), bottom = up(i). Second: left = down(i), bottom = up(i+1).
      const int li = half == 0 ? (i + N - 1) % N : i;
      const int bi = half == 0 ? i : (i + 1) % N;
      L.col(i) = Eigen::Map<const Vec>(s.cell(li, 1), m);
      Bt.col(i) = Eigen::Map<const Vec>(s.cell(bi, 0), m);
    }
    Mat T(m, N), Rr(m, N);
    if (linear) {
      T.noalias() = rk.Clt * L + rk.Cbt * Bt;
      Rr.noalias() = rk.Clr * L + rk.Cbr * Bt;
    } else {
      for (int i = 0; i < N; ++i) {
        try {
          const auto e = rk_newton(form, tab, Bt.col(i), L.col(i), dt, dx, opt);
          T.col(i) = e.zt;
          Rr.col(i) = e.zr;
        } catch (const SolverError& err) {
          throw SolverError(err.what(), i, (s.step + 0.5 * (half + 1)) * dt);
        }
      }
    }
    for (int i = 0; i < N; ++i) {
      std::copy_n(T.col(i).data(), m, s.cell(i, 0));
      std::copy_n(Rr.col(i).data(), m, s.cell(i, 1));
    }
  }
};

Stepper::Stepper(const Form& form, const SchemeSpec& scheme, const MeshParams& mesh, const NewtonOptions& opt)
    : impl_(std::make_unique<Impl>()) {
  mesh.check();
  auto& I = *impl_;
  I.form = form;
  I.scheme = scheme;
  I.mesh = mesh;
  I.opt = opt;
  I.linear = is_linear(form);
  I.d = form.d();
  I.dt = mesh.dt;
  I.dx = mesh.dx();
  if (scheme.simple()) {
    if (I.linear) {
      I.blocks = build_blocks_simple(linear_part(form), I.dt, I.dx);
      I.B = Impl::row_major(I.blocks.B);
      I.Am = Impl::row_major(I.blocks.Am);
      I.Ap = Impl::row_major(I.blocks.Ap);
    } else {
      I.field = poly_field(form);
    }
  } else {
    I.tab = gauss_tableau(scheme.r);
    // Structural check for every form; linear forms also keep the edge maps.
    I.rk = build_blocks_rk(linear_part(form), I.tab, I.dt, I.dx);
    const int r = I.tab.r;
    I.extrap = Vec::Ones(r);
    for (int j = 0; j < r; ++j)
      for (int k = 0; k < r; ++k)
        if (k != j) I.extrap(j) *= (0.0 - I.tab.c(k)) / (I.tab.c(j) - I.tab.c(k));
  }
}

Stepper::~Stepper() = default;

void Stepper::step(MeshState& state) {
  auto& I = *impl_;
  for (int half = 0; half < 2; ++half) {
    if (!I.scheme.simple()) I.rk_half(state, half);
    else if (I.linear) I.linear_half(state, half);
    else I.nonlinear_half(state, half);
  }
  ++state.step;
}

Mat Stepper::nodal(const MeshState& state) const {
  const auto& I = *impl_;
  const int N = state.N, d = state.d;
  Mat out(N, d);
  if (I.scheme.simple()) {
    for (int i = 0; i < N; ++i) out.row(i) = Eigen::Map<const Vec>(state.cell(i, 0), d).transpose();
    return out;
  }
  // Both edges meeting at x_i start there (c = 0): extrapolate each and average.
  const int r = I.tab.r;
  for (int i = 0; i < N; ++i) {
    Vec acc = Vec::Zero(d);
    for (int j = 0; j < r; ++j) {
      acc += I.extrap(j) * Eigen::Map<const Vec>(state.cell(i, 0) + j * d, d);
      acc += I.extrap(j) * Eigen::Map<const Vec>(state.cell((i + N - 1) % N, 1) + j * d, d);
    }
    out.row(i) = 0.5 * acc.transpose();
  }
  return out;
}

// Energy -----------------------------------------------------------------------------

double total_energy(const Form& form, const Mat& z, double dx) {
  const int N = static_cast<int>(z.rows());
  double E = 0.0;
  switch (form.energy) {
    case EnergyKind::none:
      throw UnsupportedObserver("no energy density registered for '" + form.name + "'");
    case EnergyKind::wave:
      // (v^2 + w^2)/2
      for (int i = 0; i < N; ++i) E += 0.5 * (z(i, 1) * z(i, 1) + z(i, 2) * z(i, 2));
      return E * dx;
    case EnergyKind::klein_gordon:
      // (u^2 + v^2 + w^2)/2
      for (int i = 0; i < N; ++i) E += 0.5 * z.row(i).squaredNorm();
      return E * dx;
    case EnergyKind::hamiltonian:
      // S(z) - (1/2) z^T L z_x with centred z_x.
      for (int i = 0; i < N; ++i) {
        const Vec zi = z.row(i).transpose();
        const Vec zx = (z.row((i + 1) % N) - z.row((i + N - 1) % N)).transpose() / (2.0 * dx);
        E += eval_S(form, zi) - 0.5 * zi.dot(form.L * zx);
      }
      return E * dx;
  }
  return E;
}

double total_energy(const Form& form, const MeshState& state, double dx) {
  Mat z(state.N, state.d);
  for (int i = 0; i < state.N; ++i) z.row(i) = Eigen::Map<const Vec>(state.cell(i, 0), state.d).transpose();
  return total_energy(form, z, dx);
}

// Integration ----------------------------------------------------------------------------

const char* to_string(RunStatus s) { return s == RunStatus::diverged ? "diverged" : "completed"; }

RunResult integrate(const Form& form, const SchemeSpec& scheme, const InitialCondition& ic, const MeshParams& mesh,
                    const Observers& obs) {
  mesh.check();
  if (obs.energy && form.energy == EnergyKind::none)
    throw UnsupportedObserver("no energy density registered for '" + form.name + "'");
  const auto dm = classify_consistency(form);
  if (!dm.consistent)
    throw SingularError("integrate: '" + form.name + "' is structurally inconsistent; the diamond update is singular");

  Stepper stepper(form, scheme, mesh);
  RunResult res;
  MeshState state = scheme.simple() ? init_half_step(form, ic, mesh, obs.init)
                                    : init_rk_state(form, gauss_tableau(scheme.r), ic, mesh, obs.init);
  const long Nt = mesh.Nt();
  const long cadence = obs.cadence > 0 ? obs.cadence : std::max<long>(100, (Nt + 199) / 200);
  const double dx = mesh.dx();

  auto record = [&](const MeshState& s) {
    if (!obs.energy && !obs.snapshots) return;
    const Mat z = stepper.nodal(s);
    const double t = s.step * mesh.dt;
    if (obs.energy) res.energy.push_back({t, total_energy(form, z, dx)});
    if (obs.snapshots) res.snapshots.push_back({t, z});
  };
  auto max_abs = [](const MeshState& s) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < s.values.size(); ++i) {
      const double a = std::abs(s.values(i));
      if (!(a <= m)) m = a;  // propagates NaN as +inf below
    }
    return std::isfinite(m) ? m : std::numeric_limits<double>::infinity();
  };

  record(state);
  res.max_abs = max_abs(state);
  for (long n = 1; n <= Nt; ++n) {
    stepper.step(state);
    const double m = max_abs(state);
    res.max_abs = std::max(res.max_abs, m);
    if (!(m <= obs.blowup)) {
      res.status = RunStatus::diverged;
      record(state);
      break;
    }
    if (n % cadence == 0 || n == Nt) record(state);
  }
  res.steps = state.step;
  res.t_end = state.step * mesh.dt;
  res.final_nodal = stepper.nodal(state);
  res.final_state = std::move(state);
  return res;
}

// Discrete conservation -----------------------------------------------------------

TangentPair random_tangent_pair(const LinearizedForm& lf, double dt, double dx, std::mt19937_64& rng) {
  const auto bl = build_blocks_simple(lf, dt, dx);
  std::normal_distribution<double> g(0.0, 1.0);
  auto draw = [&] {
    CornerTangent c;
    c.b = Vec::NullaryExpr(lf.d(), [&] { return g(rng); });
    c.l = Vec::NullaryExpr(lf.d(), [&] { return g(rng); });
    c.r = Vec::NullaryExpr(lf.d(), [&] { return g(rng); });
    c.t = bl.B * c.b + bl.Am * c.l + bl.Ap * c.r;
    return c;
  };
  TangentPair p;
  p.xi = draw();
  p.eta = draw();
  return p;
}

double verify_discrete_conservation(const LinearizedForm& lf, double dt, double dx, const TangentPair& pair) {
  for (const CornerTangent* c : {&pair.xi, &pair.eta}) {
    const Vec a = lf.K * (c->t - c->b) / dt, b = lf.L * (c->r - c->l) / dx;
    const Vec res = a + b - lf.Peff * (c->t + c->b + c->l + c->r) / 4.0;
    const double scale = 1.0 + inf_norm(a) + inf_norm(b);
    if (!(inf_norm(res) <= 1e-10 * scale)) {
      std::ostringstream os;
      os << "verify_discrete_conservation: tangent violates the linear diamond update (residual "
         << inf_norm(res) << ")";
      throw std::invalid_argument(os.str());
    }
  }
  // (p wedge A q)(xi, eta) = p(xi)^T A q(eta) - p(eta)^T A q(xi)
  auto wedge = [](const Mat& A, const Vec& p_xi, const Vec& q_xi, const Vec& p_eta, const Vec& q_eta) {
    return p_xi.dot(A * q_eta) - p_eta.dot(A * q_xi);
  };
  const auto& x = pair.xi;
  const auto& e = pair.eta;
  const double kt = wedge(lf.K, x.l + x.t + x.r, x.t, e.l + e.t + e.r, e.t);
  const double kb = wedge(lf.K, x.l + x.b + x.r, x.b, e.l + e.b + e.r, e.b);
  const double lr = wedge(lf.L, x.t + x.r + x.b, x.r, e.t + e.r + e.b, e.r);
  const double ll = wedge(lf.L, x.t + x.l + x.b, x.l, e.t + e.l + e.b, e.l);
  return (kt - kb) / (4.0 * dt) + (lr - ll) / (4.0 * dx);
}

}  // namespace diamond
