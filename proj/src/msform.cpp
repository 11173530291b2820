#include "diamond/msform.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace diamond {

namespace {

double ipow(double x, int e) {
  double r = 1.0;
  for (int k = 0; k < e; ++k) r *= x;
  return r;
}

double monomial(const std::vector<int>& exps, const Vec& z) {
  double m = 1.0;
  for (size_t j = 0; j < exps.size(); ++j) m *= ipow(z[j], exps[j]);
  return m;
}

// d/dz_j of prod_k z_k^{e_k}
double monomial_deriv(const std::vector<int>& exps, const Vec& z, size_t j) {
  if (exps[j] == 0) return 0.0;
  double m = exps[j] * ipow(z[j], exps[j] - 1);
  for (size_t k = 0; k < exps.size(); ++k)
    if (k != j) m *= ipow(z[k], exps[k]);
  return m;
}

const char* energy_name(EnergyKind e) {
  switch (e) {
    case EnergyKind::wave: return "wave";
    case EnergyKind::klein_gordon: return "klein_gordon";
    case EnergyKind::hamiltonian: return "hamiltonian";
    default: return "none";
  }
}

EnergyKind energy_from_name(const std::string& s) {
  if (s == "wave") return EnergyKind::wave;
  if (s == "klein_gordon") return EnergyKind::klein_gordon;
  if (s == "hamiltonian") return EnergyKind::hamiltonian;
  if (s == "none") return EnergyKind::none;
  throw std::invalid_argument("unknown energy density '" + s + "'");
}

}  // namespace

int PolynomialTerm::degree() const {
  int s = 0;
  for (int e : exponents) s += e;
  return s;
}

int Form::index_of(const std::string& var) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == var) return static_cast<int>(i);
  throw LookupError("form '" + name + "' has no variable '" + var + "'");
}

std::string ValidationReport::summary() const {
  if (violations.empty()) return "ok";
  std::ostringstream os;
  for (size_t k = 0; k < violations.size(); ++k) {
    const auto& v = violations[k];
    if (k) os << "; ";
    os << v.kind;
    if (v.i >= 0) os << " at (" << v.i << "," << v.j << ")";
    if (!v.message.empty()) os << ": " << v.message;
  }
  return os.str();
}

Vec eval_grad_S(const Form& form, const Vec& z) {
  Vec g = form.P * z;
  for (const auto& t : form.terms) g[t.row] += t.coeff * monomial(t.exponents, z);
  return g;
}

Mat eval_jac_S(const Form& form, const Vec& z) {
  Mat J = form.P;
  for (const auto& t : form.terms)
    for (size_t j = 0; j < t.exponents.size(); ++j)
      if (t.exponents[j] > 0) J(t.row, j) += t.coeff * monomial_deriv(t.exponents, z, j);
  return J;
}

double eval_S(const Form& form, const Vec& z) {
  // A homogeneous gradient component of degree p integrates to z.g/(p+1).
  double s = 0.5 * z.dot(form.P * z);
  for (const auto& t : form.terms)
    s += t.coeff * monomial(t.exponents, z) * z[t.row] / (t.degree() + 1);
  return s;
}

ValidationReport validate_form(const Form& form, unsigned seed) {
  ValidationReport rep;
  auto add = [&](std::string kind, int i, int j, std::string msg) {
    rep.violations.push_back({std::move(kind), i, j, std::move(msg)});
  };
  const Eigen::Index d = form.K.rows();
  if (d < 2) add("dimension", -1, -1, "d must be at least 2");
  if (form.K.cols() != d || form.L.rows() != d || form.L.cols() != d || form.P.rows() != d ||
      form.P.cols() != d)
    add("dimension", -1, -1, "K, L and P must all be d x d");
  if (static_cast<Eigen::Index>(form.names.size()) != d)
    add("dimension", -1, -1, "names must have d entries");
  if (!rep.ok()) return rep;

  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i; j < d; ++j) {
      if (form.K(i, j) != -form.K(j, i)) add("skew-K", int(i), int(j), "K is not skew-symmetric");
      if (form.L(i, j) != -form.L(j, i)) add("skew-L", int(i), int(j), "L is not skew-symmetric");
    }
  for (size_t k = 0; k < form.terms.size(); ++k) {
    const auto& t = form.terms[k];
    const std::string tag = "term " + std::to_string(k);
    if (t.row < 0 || t.row >= d) {
      add("term", int(k), -1, tag + ": row out of range");
      continue;
    }
    if (static_cast<Eigen::Index>(t.exponents.size()) != d) {
      add("term", int(k), -1, tag + ": exponent vector must have length d");
      continue;
    }
    bool neg = false;
    for (int e : t.exponents) neg |= e < 0;
    if (neg) add("term", int(k), -1, tag + ": negative exponent");
    else if (t.degree() < 2) add("term", int(k), -1, tag + ": degree below 2 belongs in P");
    if (!std::isfinite(t.coeff)) add("term", int(k), -1, tag + ": non-finite coefficient");
  }
  if (!rep.ok()) return rep;

  // Exactness: the finite-difference Jacobian of grad S must be symmetric, and
  // must agree with the analytic Jacobian.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const double h = 1e-5;
  std::vector<std::pair<int, int>> reported;
  for (int trial = 0; trial < 10; ++trial) {
    Vec z(d);
    for (Eigen::Index i = 0; i < d; ++i) z[i] = U(rng);
    Mat Jfd(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
      Vec zp = z, zm = z;
      zp[j] += h;
      zm[j] -= h;
      Jfd.col(j) = (eval_grad_S(form, zp) - eval_grad_S(form, zm)) / (2 * h);
    }
    const Mat Ja = eval_jac_S(form, z);
    const double scale = 1.0 + Jfd.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) {
        bool bad_sym = j > i && std::abs(Jfd(i, j) - Jfd(j, i)) > 1e-6 * scale;
        bool bad_jac = std::abs(Jfd(i, j) - Ja(i, j)) > 1e-6 * scale;
        if (!bad_sym && !bad_jac) continue;
        std::pair<int, int> key{int(i), int(j)};
        if (std::find(reported.begin(), reported.end(), key) != reported.end()) continue;
        reported.push_back(key);
        add("exactness", int(i), int(j),
            bad_sym ? "Jacobian of grad S is not symmetric" : "analytic Jacobian disagrees with finite differences");
      }
  }
  return rep;
}

LinearizedForm linearize(const Form& form, const Vec& z_ref) {
  if (z_ref.size() != form.d()) throw std::invalid_argument("linearize: z_ref must have length d");
  LinearizedForm lf;
  lf.name = form.name;
  lf.names = form.names;
  lf.K = form.K;
  lf.L = form.L;
  lf.Peff = eval_jac_S(form, z_ref);
  lf.z_ref = z_ref;
  return lf;
}

LinearizedForm linearize(const Form& form) {
  return linearize(form, form.z_ref.size() == form.d() ? form.z_ref : Vec::Zero(form.d()));
}

// JSON ---------------------------------------------------------------------------

namespace {

nlohmann::json mat_to_json(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json r = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

Mat mat_from_json(const nlohmann::json& j, int d, const char* field) {
  if (!j.is_array() || static_cast<int>(j.size()) != d)
    throw std::invalid_argument(std::string("field '") + field + "' must have d rows");
  Mat m(d, d);
  for (int r = 0; r < d; ++r) {
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != d)
      throw std::invalid_argument(std::string("field '") + field + "' row " + std::to_string(r) +
                                  " must have d entries");
    for (int c = 0; c < d; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

}  // namespace

nlohmann::json form_to_json(const Form& form) {
  nlohmann::json j;
  j["name"] = form.name;
  j["d"] = form.d();
  j["names"] = form.names;
  j["K"] = mat_to_json(form.K);
  j["L"] = mat_to_json(form.L);
  j["P"] = mat_to_json(form.P);
  j["terms"] = nlohmann::json::array();
  for (const auto& t : form.terms)
    j["terms"].push_back({{"row", t.row + 1}, {"coeff", t.coeff}, {"exponents", t.exponents}});
  if (!form.params.empty()) j["params"] = form.params;
  if (form.z_ref.size() == form.d())
    j["z_ref"] = std::vector<double>(form.z_ref.data(), form.z_ref.data() + form.z_ref.size());
  if (!form.table_row.empty()) j["table_row"] = form.table_row;
  j["energy"] = energy_name(form.energy);
  return j;
}

Form form_from_json(const nlohmann::json& j) {
  Form f;
  const int d = j.at("d").get<int>();
  f.name = j.value("name", std::string("custom"));
  f.names = j.at("names").get<std::vector<std::string>>();
  f.K = mat_from_json(j.at("K"), d, "K");
  f.L = mat_from_json(j.at("L"), d, "L");
  f.P = mat_from_json(j.at("P"), d, "P");
  if (j.contains("terms")) {
    for (const auto& t : j.at("terms")) {
      PolynomialTerm term;
      term.row = t.at("row").get<int>() - 1;
      term.coeff = t.at("coeff").get<double>();
      term.exponents = t.at("exponents").get<std::vector<int>>();
      f.terms.push_back(term);
    }
  }
  if (j.contains("params")) f.params = j.at("params").get<Params>();
  f.z_ref = Vec::Zero(d);
  if (j.contains("z_ref")) {
    auto v = j.at("z_ref").get<std::vector<double>>();
    if (static_cast<int>(v.size()) != d) throw std::invalid_argument("field 'z_ref' must have d entries");
    f.z_ref = Eigen::Map<Vec>(v.data(), d);
  }
  f.table_row = j.value("table_row", f.name);
  f.energy = energy_from_name(j.value("energy", std::string("none")));
  auto rep = validate_form(f);
  if (!rep.ok()) throw FormError("invalid form '" + f.name + "': " + rep.summary(), rep);
  return f;
}

Form load_form_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open form file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    size_t line = 1, col = 1;
    for (size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw std::runtime_error(path + ":" + std::to_string(line) + ":" + std::to_string(col) +
                             ": JSON parse error: " + e.what());
  }
  return form_from_json(j);
}

}  // namespace diamond
