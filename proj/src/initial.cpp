#include <cmath>
#include <numbers>

#include "detail/newton.hpp"
#include "diamond/integrator.hpp"

namespace diamond {

namespace {

double sech(double x) { return 1.0 / std::cosh(x); }

double param_or(const Params& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

void require_vars(const Form& form, const std::vector<std::string>& names, const std::string& ic) {
  if (form.names != names) {
    std::string want;
    for (const auto& n : names) want += (want.empty() ? "" : ",") + n;
    throw std::invalid_argument("initial condition '" + ic + "' needs variables (" + want + "), form '" +
                                form.name + "' differs");
  }
}

InitialCondition from_exact(std::string name, std::function<Vec(double, double)> exact) {
  InitialCondition ic;
  ic.name = std::move(name);
  ic.exact = std::move(exact);
  ic.z0 = [f = ic.exact](double x) { return f(x, 0.0); };
  return ic;
}

// u = cos(k x - w t), v = u_t, w = u_x for -v_t + w_x = P_uu u.
InitialCondition kg_plane(const Form& form, const MeshParams& mesh) {
  require_vars(form, {"u", "v", "w"}, "kg_plane");
  const double k = 2.0 * std::numbers::pi / (mesh.b - mesh.a);
  const double w2 = k * k + form.P(0, 0);
  if (w2 < 0.0) throw std::invalid_argument("kg_plane: no real frequency for this mass term");
  const double om = std::sqrt(w2);
  return from_exact("kg_plane", [k, om](double x, double t) {
    const double ph = k * x - om * t;
    return Vec{{std::cos(ph), om * std::sin(ph), -k * std::sin(ph)}};
  });
}

// u = cos(k(x + t)), k^2 = -a, for u_tx = a u with v = -u_x, w = -u_t/2.
InitialCondition mixed_kg_cos(const Form& form) {
  require_vars(form, {"u", "v", "w"}, "mixed_kg_cos");
  const double a = param_or(form.params, "a", 0.0);
  if (!(a < 0.0)) throw std::invalid_argument("mixed_kg_cos: needs parameter a < 0");
  const double k = std::sqrt(-a);
  return from_exact("mixed_kg_cos", [k](double x, double t) {
    const double ph = k * (x + t);
    return Vec{{std::cos(ph), k * std::sin(ph), 0.5 * k * std::sin(ph)}};
  });
}

// Standing wave psi1 = A e^{-i L t}, psi2 = i B e^{-i L t} of the cubic Dirac system.
InitialCondition dirac_breather(const Form& form, const MeshParams& mesh, const Params& params) {
  require_vars(form, {"p1", "q1", "p2", "q2"}, "dirac_breather");
  const double m = param_or(form.params, "m", 1.0), lam = param_or(form.params, "lambda", 1.0);
  const double L = param_or(params, "Lambda", 0.75);
  if (!(std::abs(L) < m) || !(lam > 0.0))
    throw std::invalid_argument("dirac_breather: needs |Lambda| < m and lambda > 0");
  const double mu = std::sqrt(m * m - L * L), c = std::sqrt((m * m - L * L) / lam);
  const double x0 = 0.5 * (mesh.a + mesh.b);
  return from_exact("dirac_breather", [=](double x, double t) {
    const double y = x - x0;
    const double den = m + L * std::cosh(2.0 * mu * y);
    const double A = c * std::sqrt(m + L) * std::cosh(mu * y) / den;
    const double B = c * std::sqrt(m - L) * std::sinh(mu * y) / den;
    const double cs = std::cos(L * t), sn = std::sin(L * t);
    return Vec{{A * cs, -A * sn, B * sn, B * cs}};
  });
}

// One term amp * sech(amp (x - x0)) * e^{kappa x}, and its x-derivative.
struct SechTerm {
  double amp, x0, kappa;
  double value(double x) const { return amp * sech(amp * (x - x0)); }
  double slope(double x) const { return -amp * amp * sech(amp * (x - x0)) * std::tanh(amp * (x - x0)); }
};

InitialCondition nls_2soliton(const Form& form, bool phase) {
  require_vars(form, {"p", "q", "v", "w"}, phase ? "nls_2soliton_phase" : "nls_2soliton");
  const SechTerm s1{3.0, -10.0, 0.75}, s2{std::sqrt(6.0), 10.0, -0.75};
  InitialCondition ic;
  ic.name = phase ? "nls_2soliton_phase" : "nls_2soliton";
  if (!phase) {
    // Real exponentials: phi = sum amp sech(.) e^{kappa x}, q = 0.
    ic.z0 = [=](double x) {
      double p = 0, v = 0;
      for (const auto& s : {s1, s2}) {
        const double e = std::exp(s.kappa * x);
        p += s.value(x) * e;
        v += (s.slope(x) + s.kappa * s.value(x)) * e;
      }
      return Vec{{p, 0.0, v, 0.0}};
    };
  } else {
    ic.z0 = [=](double x) {
      double p = 0, q = 0, v = 0, w = 0;
      for (const auto& s : {s1, s2}) {
        const double c = std::cos(s.kappa * x), sn = std::sin(s.kappa * x);
        const double f = s.value(x), fx = s.slope(x);
        p += f * c;
        q += f * sn;
        v += fx * c - s.kappa * f * sn;
        w += fx * sn + s.kappa * f * c;
      }
      return Vec{{p, q, v, w}};
    };
  }
  return ic;
}

HalfInit resolve(HalfInit method, const InitialCondition& ic) {
  if (method == HalfInit::exact && !ic.exact)
    throw std::invalid_argument("init: '" + ic.name + "' has no exact solution for exact half-step initialization");
  if (method == HalfInit::automatic) return ic.exact ? HalfInit::exact : HalfInit::box;
  return method;
}

// Local midpoint box 2K(y - zc)/dt + flux = gradS((y + zc)/2), solved for y.
Vec box_solve(const Form& form, const Vec& zc, const Vec& flux, double dt, const char* who) {
  auto F = [&](const Vec& y) -> Vec {
    return 2.0 * form.K * (y - zc) / dt + flux - eval_grad_S(form, 0.5 * (y + zc));
  };
  auto J = [&](const Vec& y) -> Mat { return 2.0 * form.K / dt - 0.5 * eval_jac_S(form, 0.5 * (y + zc)); };
  try {
    return detail::newton(zc, F, J, NewtonOptions{}, who);
  } catch (const SolverError& e) {
    throw SolverError(std::string("init_half_step: ") + e.what());
  }
}

// Predictor at (x_i, dt/2) with centered fluxes at t = 0, then a corrector box
// at (x_i + dx/2, dt/2) whose flux averages the bottom and predicted top edges.
// Rows without a time derivative would otherwise see the flux at t = 0 only.
Mat box_half_values(const Form& form, const Mat& z, double dt, double dx) {
  const int N = static_cast<int>(z.rows());
  Mat top(N, z.cols());
  for (int i = 0; i < N; ++i) {
    const Vec flux = form.L * (z.row((i + 1) % N) - z.row((i + N - 1) % N)).transpose() / (2.0 * dx);
    top.row(i) = box_solve(form, z.row(i).transpose(), flux, dt, "box predictor").transpose();
  }
  Mat y(N, z.cols());
  for (int i = 0; i < N; ++i) {
    const int j = (i + 1) % N;
    const Vec zbar = 0.5 * (z.row(i) + z.row(j)).transpose();
    const Vec flux = form.L * (z.row(j) + top.row(j) - z.row(i) - top.row(i)).transpose() / (2.0 * dx);
    y.row(i) = box_solve(form, zbar, flux, dt, "box half-step").transpose();
  }
  return y;
}

Mat nodal_values(const Form& form, const InitialCondition& ic, const MeshParams& mesh) {
  Mat z(mesh.N, form.d());
  for (int i = 0; i < mesh.N; ++i) {
    const Vec v = ic.z0(mesh.x(i));
    if (v.size() != form.d()) throw std::invalid_argument("initial condition returned wrong dimension");
    z.row(i) = v.transpose();
  }
  return z;
}

Mat half_values(const Form& form, const InitialCondition& ic, const MeshParams& mesh, const Mat& z, HalfInit how) {
  const double dx = mesh.dx();
  if (how == HalfInit::box) return box_half_values(form, z, mesh.dt, dx);
  Mat y(mesh.N, form.d());
  for (int i = 0; i < mesh.N; ++i) y.row(i) = ic.exact(mesh.x(i) + 0.5 * dx, 0.5 * mesh.dt).transpose();
  return y;
}

}  // namespace

std::vector<std::string> initial_condition_names() {
  return {"zero", "kg_plane", "mixed_kg_cos", "dirac_breather", "nls_2soliton", "nls_2soliton_phase"};
}

InitialCondition make_initial_condition(const std::string& name, const Form& form, const MeshParams& mesh,
                                        const Params& params) {
  if (name == "zero") {
    const int d = form.d();
    return from_exact("zero", [d](double, double) { return Vec::Zero(d).eval(); });
  }
  if (name == "kg_plane") return kg_plane(form, mesh);
  if (name == "mixed_kg_cos") return mixed_kg_cos(form);
  if (name == "dirac_breather") return dirac_breather(form, mesh, params);
  if (name == "nls_2soliton") return nls_2soliton(form, false);
  if (name == "nls_2soliton_phase") return nls_2soliton(form, true);
  std::string list;
  for (const auto& n : initial_condition_names()) list += (list.empty() ? "" : ", ") + n;
  throw LookupError("unknown initial condition '" + name + "'; available: " + list);
}

HalfInit parse_half_init(const std::string& text) {
  if (text == "auto") return HalfInit::automatic;
  if (text == "exact") return HalfInit::exact;
  if (text == "box") return HalfInit::box;
  throw std::invalid_argument("half-step init: expected auto, exact or box, got '" + text + "'");
}

MeshState init_half_step(const Form& form, const InitialCondition& ic, const MeshParams& mesh, HalfInit method) {
  mesh.check();
  const HalfInit how = resolve(method, ic);
  const Mat z = nodal_values(form, ic, mesh);
  const Mat y = half_values(form, ic, mesh, z, how);
  MeshState s;
  s.N = mesh.N;
  s.d = form.d();
  s.block = s.d;
  s.values.resize(2 * s.N * s.d);
  for (int i = 0; i < s.N; ++i) {
    Eigen::Map<Vec>(s.cell(i, 0), s.d) = z.row(i).transpose();
    Eigen::Map<Vec>(s.cell(i, 1), s.d) = y.row(i).transpose();
  }
  return s;
}

MeshState init_rk_state(const Form& form, const RKTableau& tab, const InitialCondition& ic, const MeshParams& mesh,
                        HalfInit method) {
  mesh.check();
  const HalfInit how = resolve(method, ic);
  const int d = form.d(), r = tab.r, N = mesh.N;
  const double dx = mesh.dx(), dt = mesh.dt;
  MeshState s;
  s.N = N;
  s.d = d;
  s.block = r * d;
  s.values.resize(2 * N * r * d);
  if (how == HalfInit::exact) {
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < r; ++j) {
        const double c = tab.c(j);
        Eigen::Map<Vec>(s.cell(i, 0) + j * d, d) = ic.exact(mesh.x(i) + 0.5 * c * dx, 0.5 * c * dt);
        Eigen::Map<Vec>(s.cell(i, 1) + j * d, d) = ic.exact(mesh.x(i + 1) - 0.5 * c * dx, 0.5 * c * dt);
      }
    return s;
  }
  const Mat z = nodal_values(form, ic, mesh);
  const Mat y = half_values(form, ic, mesh, z, HalfInit::box);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < r; ++j) {
      const double c = tab.c(j);
      Eigen::Map<Vec>(s.cell(i, 0) + j * d, d) = ((1.0 - c) * z.row(i) + c * y.row(i)).transpose();
      Eigen::Map<Vec>(s.cell(i, 1) + j * d, d) = ((1.0 - c) * z.row((i + 1) % N) + c * y.row(i)).transpose();
    }
  return s;
}

}  // namespace diamond
