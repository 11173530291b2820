// Built-in multi-symplectic forms. Row i of each form is dS/dz_i; rows are
// written in the natural equation order where that already gives skew K, L and an exact gradient.

#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

#include "diamond/msform.hpp"

namespace diamond {

namespace {

class Builder {
 public:
  Builder(std::string name, std::vector<std::string> names, std::string table_row,
          EnergyKind energy = EnergyKind::none) {
    const auto d = static_cast<Eigen::Index>(names.size());
    f_.name = std::move(name);
    f_.names = std::move(names);
    f_.K = Mat::Zero(d, d);
    f_.L = Mat::Zero(d, d);
    f_.P = Mat::Zero(d, d);
    f_.z_ref = Vec::Zero(d);
    f_.table_row = std::move(table_row);
    f_.energy = energy;
  }

  Builder& K(const std::string& row, const std::string& col, double v) {
    f_.K(ix(row), ix(col)) += v;
    return *this;
  }
  Builder& L(const std::string& row, const std::string& col, double v) {
    f_.L(ix(row), ix(col)) += v;
    return *this;
  }
  Builder& P(const std::string& row, const std::string& col, double v) {
    f_.P(ix(row), ix(col)) += v;
    return *this;
  }
  Builder& term(const std::string& row, double coeff, const std::vector<std::pair<std::string, int>>& powers) {
    PolynomialTerm t;
    t.row = ix(row);
    t.coeff = coeff;
    t.exponents.assign(f_.names.size(), 0);
    for (const auto& [var, e] : powers) t.exponents[ix(var)] += e;
    f_.terms.push_back(t);
    return *this;
  }

  Form& form() { return f_; }

 private:
  int ix(const std::string& v) const { return f_.index_of(v); }
  Form f_;
};

struct Entry {
  Params defaults;
  std::function<Form(const Params&)> build;
};

Form wave(const Params&) {
  Builder b("wave", {"u", "v", "w"}, "Klein-Gordon u_tt - u_xx = f(u)", EnergyKind::wave);
  b.K("u", "v", -1).L("u", "w", 1);  // -v_t + w_x = V'(u) = 0
  b.K("v", "u", 1).P("v", "v", 1);   // u_t = v
  b.L("w", "u", -1).P("w", "w", -1); // -u_x = -w
  return b.form();
}

Form linear_kg(const Params&) {
  Builder b("linear_kg", {"u", "v", "w"}, "Klein-Gordon u_tt - u_xx = f(u)", EnergyKind::klein_gordon);
  b.K("u", "v", -1).L("u", "w", 1).P("u", "u", 1);  // V(u) = u^2/2
  b.K("v", "u", 1).P("v", "v", 1);
  b.L("w", "u", -1).P("w", "w", -1);
  return b.form();
}

Form mixed_kg(const Params& p) {
  const double a = p.at("a");
  Builder b("mixed_kg", {"u", "v", "w"}, "mixed-derivative Klein-Gordon", EnergyKind::hamiltonian);
  b.K("u", "v", 0.5).L("u", "w", 1).P("u", "u", -a);  // (1/2)v_t + w_x = -a u
  b.K("v", "u", -0.5).P("v", "w", 1);                 // -(1/2)u_t = w
  b.L("w", "u", -1).P("w", "v", 1);                   // -u_x = v
  return b.form();
}

Form advection(const Params&) {
  Builder b("advection", {"phi", "u", "w"}, "advection");
  b.K("phi", "u", 1).L("phi", "w", 1);                    // u_t + w_x = 0
  b.K("u", "phi", -1).P("u", "u", 2).P("u", "w", -1);     // -phi_t = 2u - w
  b.L("w", "phi", -1).P("w", "u", -1);                    // -phi_x = -u
  return b.form();
}

Form kdv(const Params&) {
  Builder b("kdv", {"psi", "u", "w", "p"}, "KdV");
  b.K("psi", "u", 1).L("psi", "p", 1);                                  // u_t + p_x = 0
  b.K("u", "psi", -1).L("u", "w", -2).P("u", "p", -1).term("u", 1, {{"u", 2}});  // -psi_t - 2w_x = -p + u^2
  b.L("w", "u", 2).P("w", "w", 2);                                      // 2u_x = 2w
  b.L("p", "psi", -1).P("p", "u", -1);                                  // -psi_x = -u
  return b.form();
}

Form camassa_holm(const Params&) {
  Builder b("camassa_holm", {"u", "phi", "w", "psi", "v"}, "Camassa-Holm");
  b.K("u", "phi", 0.5).K("u", "v", -1).L("u", "psi", -1).P("u", "w", 0.5).term("u", -0.5, {{"v", 2}});
  b.K("phi", "u", -0.5).L("phi", "w", -0.5);
  b.L("w", "phi", 0.5).P("w", "u", 0.5);
  b.L("psi", "u", 1).P("psi", "v", 1);
  b.K("v", "u", 1).P("v", "psi", 1).term("v", -1, {{"u", 1}, {"v", 1}});
  return b.form();
}

Form bbm(const Params& p) {
  const double s = p.at("sigma");
  Builder b("bbm", {"phi", "u", "v", "w", "p"}, "BBM");
  b.K("phi", "u", -0.5).L("phi", "p", -1);
  b.K("u", "phi", 0.5).K("u", "v", -0.5 * s).L("u", "w", -0.5 * s).P("u", "p", 1).term("u", -0.5, {{"u", 2}});
  b.K("v", "u", 0.5 * s).P("v", "w", 0.5 * s);
  b.L("w", "u", 0.5 * s).P("w", "v", 0.5 * s);
  b.L("p", "phi", 1).P("p", "u", 1);
  return b.form();
}

Form hunter_saxton_1(const Params&) {
  Builder b("hunter_saxton_1", {"u", "phi", "w", "v", "eta"}, "Hunter-Saxton");
  b.K("u", "eta", -0.5).L("u", "v", -1).P("u", "w", -1).term("u", -0.5, {{"eta", 2}});
  b.L("phi", "w", 1);
  b.L("w", "phi", -1).P("w", "u", -1);
  b.L("v", "u", 1).P("v", "eta", 1);
  b.K("eta", "u", 0.5).P("eta", "v", 1).term("eta", -1, {{"u", 1}, {"eta", 1}});
  return b.form();
}

Form hunter_saxton_2(const Params&) {
  Builder b("hunter_saxton_2", {"u", "beta", "w", "alpha", "phi", "gamma", "P", "r"}, "Hunter-Saxton");
  b.K("u", "beta", -0.5).P("u", "gamma", -1).term("u", -1, {{"u", 1}, {"alpha", 1}});
  b.K("beta", "u", 0.5).L("beta", "w", 1).L("beta", "P", 1);
  b.L("w", "beta", -1).P("w", "alpha", -1);
  b.K("alpha", "phi", -0.5).P("alpha", "w", -1).term("alpha", -0.5, {{"u", 2}});
  b.K("phi", "alpha", 0.5).L("phi", "gamma", 1);
  b.L("gamma", "phi", -1).P("gamma", "u", -1);
  b.L("P", "beta", -1).L("P", "r", -2);
  b.L("r", "P", 2).P("r", "r", 2);
  return b.form();
}

Form improved_boussinesq(const Params&) {
  Builder b("improved_boussinesq", {"u", "v", "n", "w", "p", "q"}, "improved Boussinesq");
  b.K("u", "w", 1).L("u", "p", -1).P("u", "u", 1).term("u", 1, {{"u", 2}});  // w_t - p_x = u + u^2
  b.K("v", "q", -1).L("v", "n", -1).L("v", "w", -1).P("v", "v", -1);        // -q_t - n_x - w_x = -v
  b.L("n", "v", 1).P("n", "n", -1);                                         // v_x = -n
  b.K("w", "u", -1).L("w", "v", 1);                                         // -u_t + v_x = 0
  b.L("p", "u", 1).P("p", "q", 1);                                          // u_x = q
  b.K("q", "v", 1).P("q", "p", 1);                                          // v_t = p
  return b.form();
}

Form ostrovsky(const Params& p) {
  const double al = p.at("alpha"), be = p.at("beta"), ga = p.at("gamma");
  Builder b("ostrovsky", {"phi", "u", "v", "w"}, "Ostrovsky");
  b.K("phi", "u", -0.5).L("phi", "w", -1).P("phi", "phi", -ga);
  b.K("u", "phi", 0.5).L("u", "v", -1).P("u", "w", 1).term("u", -al / 2, {{"u", 2}});
  b.L("v", "u", 1).P("v", "v", 1 / be);
  b.L("w", "phi", 1).P("w", "u", 1);
  return b.form();
}

Form good_boussinesq(const Params&) {
  Builder b("good_boussinesq", {"u", "v", "p", "q"}, "good Boussinesq", EnergyKind::hamiltonian);
  b.K("u", "v", -1).L("u", "p", -1).P("u", "u", -1).term("u", -2, {{"u", 2}});  // -v_t - p_x = -u - 2u^2
  b.K("v", "u", 1).L("v", "q", -1);                                            // u_t - q_x = 0
  b.L("p", "u", 1).P("p", "p", 1);                                             // u_x = p
  b.L("q", "v", 1).P("q", "q", 1);                                             // v_x = q
  return b.form();
}

Form dirac(const Params& p) {
  const double m = p.at("m"), lam = p.at("lambda");
  Builder b("dirac", {"p1", "q1", "p2", "q2"}, "nonlinear Dirac", EnergyKind::hamiltonian);
  b.K("p1", "q1", -1).L("p1", "q2", -1);  // -(q1_t + q2_x)
  b.K("q1", "p1", 1).L("q1", "p2", 1);    //   p1_t + p2_x
  b.K("p2", "q2", -1).L("p2", "q1", -1);  // -(q2_t + q1_x)
  b.K("q2", "p2", 1).L("q2", "p1", 1);    //   p2_t + p1_x
  // S = (m/2)(p1^2 + q1^2 - p2^2 - q2^2) - (lambda/2) g^2, g = sum_k sigma_k z_k^2
  const std::vector<std::string> var = {"p1", "q1", "p2", "q2"};
  const double sigma[4] = {-1, -1, 1, 1};
  for (int i = 0; i < 4; ++i) {
    b.P(var[i], var[i], -sigma[i] * m);
    for (int k = 0; k < 4; ++k)
      b.term(var[i], -2 * lam * sigma[i] * sigma[k], {{var[i], 1}, {var[k], 2}});
  }
  return b.form();
}

Form nls(const Params& p) {
  const double a = p.at("a"), rho = p.at("rho");
  Builder b("nls", {"p", "q", "v", "w"}, "nonlinear Schrodinger", EnergyKind::hamiltonian);
  b.K("p", "q", 1).L("p", "v", -1).term("p", a, {{"p", 3}}).term("p", a, {{"p", 1}, {"q", 2}});
  b.K("q", "p", -1).L("q", "w", -1).term("q", a, {{"p", 2}, {"q", 1}}).term("q", a, {{"q", 3}});
  b.L("v", "p", 1).P("v", "v", 1);
  b.L("w", "q", 1).P("w", "w", 1);
  b.form().z_ref[0] = std::sqrt(rho);
  return b.form();
}

const std::map<std::string, Entry>& table() {
  // rho: peak |phi|^2 of the built-in nls_2soliton initial condition.
  static const std::map<std::string, Entry> t = {
      {"wave", {{}, wave}},
      {"linear_kg", {{}, linear_kg}},
      {"mixed_kg", {{{"a", -std::numbers::pi * std::numbers::pi}}, mixed_kg}},
      {"advection", {{}, advection}},
      {"kdv", {{}, kdv}},
      {"camassa_holm", {{}, camassa_holm}},
      {"bbm", {{{"sigma", 1.0}}, bbm}},
      {"hunter_saxton_1", {{}, hunter_saxton_1}},
      {"hunter_saxton_2", {{}, hunter_saxton_2}},
      {"improved_boussinesq", {{}, improved_boussinesq}},
      {"ostrovsky", {{{"alpha", 1.0}, {"beta", 1.0}, {"gamma", 1.0}}, ostrovsky}},
      {"good_boussinesq", {{}, good_boussinesq}},
      {"dirac", {{{"m", 1.0}, {"lambda", 1.0}}, dirac}},
      {"nls", {{{"a", 2.0}, {"rho", 2.932639938e-6}}, nls}},
  };
  return t;
}

}  // namespace

std::vector<std::string> registry_names() {
  // Grouped: inconsistent, unconditionally unstable, conditionally stable.
  return {"advection", "kdv", "camassa_holm", "bbm", "hunter_saxton_1", "hunter_saxton_2",
          "mixed_kg", "improved_boussinesq", "ostrovsky",
          "wave", "linear_kg", "dirac", "good_boussinesq", "nls"};
}

Form registry_get(const std::string& name, const Params& overrides) {
  const auto& t = table();
  auto it = t.find(name);
  if (it == t.end()) {
    std::string list;
    for (const auto& n : registry_names()) list += (list.empty() ? "" : ", ") + n;
    throw LookupError("unknown PDE '" + name + "'; available: " + list);
  }
  Params p = it->second.defaults;
  for (const auto& [k, v] : overrides) {
    if (!p.count(k)) {
      std::string list;
      for (const auto& [pk, pv] : p) list += (list.empty() ? "" : ", ") + pk;
      throw LookupError("PDE '" + name + "' has no parameter '" + k + "'" +
                        (list.empty() ? "" : "; parameters: " + list));
    }
    p[k] = v;
  }
  Form f = it->second.build(p);
  f.params = p;
  return f;
}

}  // namespace diamond
