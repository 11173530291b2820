#pragma once

#include <Eigen/Dense>
#include <map>
#include <json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

namespace diamond {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Params = std::map<std::string, double>;

/// One monomial of the nonlinear part of grad S: coeff * prod_j z_j^exponents[j],
/// contributing to component `row` (0-based internally, 1-based in JSON).
struct PolynomialTerm {
  int row = 0;
  double coeff = 0.0;
  std::vector<int> exponents;

  int degree() const;
};

/// Energy density attached to a form; `none` makes total_energy reject the form.
enum class EnergyKind { none, wave, klein_gordon, hamiltonian };

/// K z_t + L z_x = grad S(z) with grad S(z) = P z + sum(terms).
struct Form {
  std::string name;
  std::vector<std::string> names;
  Mat K, L, P;
  std::vector<PolynomialTerm> terms;
  Params params;
  Vec z_ref;              // linearization point used by Steps 2-3
  std::string table_row;  // PDE label used when grouping the classification
  EnergyKind energy = EnergyKind::none;

  int d() const { return static_cast<int>(K.rows()); }
  int index_of(const std::string& var) const;
};

struct LinearizedForm {
  std::string name;
  std::vector<std::string> names;
  Mat K, L, Peff;
  Vec z_ref;

  int d() const { return static_cast<int>(K.rows()); }
};

struct Violation {
  std::string kind;  // "dimension", "skew-K", "skew-L", "term", "exactness"
  int i = -1;
  int j = -1;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

class LookupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormError : public std::runtime_error {
 public:
  FormError(const std::string& what, ValidationReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

// Registry ------------------------------------------------------------------

std::vector<std::string> registry_names();
/// Builds a registered form; `overrides` replace named PDE constants.
Form registry_get(const std::string& name, const Params& overrides = {});

// Validation and evaluation --------------------------------------------------

/// Skew-symmetry of K and L, term sanity, and gradient exactness checked by
/// comparing the analytic Jacobian with central differences at 10 random points.
ValidationReport validate_form(const Form& form, unsigned seed = 12345);

Vec eval_grad_S(const Form& form, const Vec& z);
Mat eval_jac_S(const Form& form, const Vec& z);
/// S itself, reconstructed from the gradient (S(0) = 0).
double eval_S(const Form& form, const Vec& z);

LinearizedForm linearize(const Form& form, const Vec& z_ref);
/// Linearization at the form's own reference state.
LinearizedForm linearize(const Form& form);

// Serialization ---------------------------------------------------------------

nlohmann::json form_to_json(const Form& form);
Form form_from_json(const nlohmann::json& j);
Form load_form_json(const std::string& path);

}  // namespace diamond
