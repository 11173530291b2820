#include <doctest.h>

#include <random>

#include "diamond/msform.hpp"

using namespace diamond;

TEST_CASE("registry lists every form and each validates") {
  const auto names = registry_names();
  CHECK(names.size() == 14);
  for (const auto& n : names) {
    CAPTURE(n);
    const Form f = registry_get(n);
    CHECK(f.name == n);
    CHECK(validate_form(f).ok());
    CHECK(f.K.isApprox(-f.K.transpose()));
    CHECK(f.L.isApprox(-f.L.transpose()));
  }
}

TEST_CASE("registry lookup errors name the alternatives") {
  CHECK_THROWS_AS(registry_get("no_such_pde"), LookupError);
  try {
    registry_get("dirac", {{"mass", 2.0}});
    FAIL("expected LookupError");
  } catch (const LookupError& e) {
    CHECK(std::string(e.what()).find("lambda") != std::string::npos);
  }
  CHECK(registry_get("dirac", {{"m", 2.0}}).params.at("m") == 2.0);
}

TEST_CASE("grad S is the gradient of S on every form") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-0.7, 0.7);
  for (const auto& n : registry_names()) {
    const Form f = registry_get(n);
    for (int trial = 0; trial < 5; ++trial) {
      Vec z(f.d());
      for (int i = 0; i < f.d(); ++i) z(i) = U(rng);
      const Vec g = eval_grad_S(f, z);
      for (int i = 0; i < f.d(); ++i) {
        const double h = 1e-6;
        Vec zp = z, zm = z;
        zp(i) += h;
        zm(i) -= h;
        CHECK(g(i) == doctest::Approx((eval_S(f, zp) - eval_S(f, zm)) / (2 * h)).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("dirac cubic self-interaction") {
  // Only p1 nonzero: g = -p1^2, dS/dp1 = m p1 + 2 lambda g p1 = m p1 - 2 lambda p1^3.
  const Form f = registry_get("dirac", {{"m", 1.5}, {"lambda", 0.5}});
  const Vec g = eval_grad_S(f, Vec{{0.4, 0.0, 0.0, 0.0}});
  CHECK(g(0) == doctest::Approx(1.5 * 0.4 - 2 * 0.5 * 0.4 * 0.4 * 0.4));
  CHECK(g.tail(3).norm() == doctest::Approx(0.0));
}

TEST_CASE("linearization Jacobian matches eval_jac_S") {
  const Form f = registry_get("nls");
  const Vec z{{0.1, -0.2, 0.3, 0.05}};
  const LinearizedForm lf = linearize(f, z);
  CHECK((lf.Peff - eval_jac_S(f, z)).norm() < 1e-14);
  CHECK((lf.K - f.K).norm() == 0.0);
  CHECK_THROWS_AS(linearize(f, Vec::Zero(3)), std::invalid_argument);
}

TEST_CASE("json round trip preserves the form") {
  for (const auto& n : registry_names()) {
    const Form f = registry_get(n);
    const Form g = form_from_json(nlohmann::json::parse(form_to_json(f).dump()));
    CHECK(g.names == f.names);
    CHECK((g.K - f.K).norm() == 0.0);
    CHECK((g.L - f.L).norm() == 0.0);
    CHECK((g.P - f.P).norm() == 0.0);
    REQUIRE(g.terms.size() == f.terms.size());
    for (size_t t = 0; t < f.terms.size(); ++t) {
      CHECK(g.terms[t].row == f.terms[t].row);
      CHECK(g.terms[t].exponents == f.terms[t].exponents);
    }
  }
}

TEST_CASE("json rejects a non-skew K with a located violation") {
  auto j = form_to_json(registry_get("wave"));
  j["K"][0][1] = 2.0;
  try {
    form_from_json(j);
    FAIL("expected FormError");
  } catch (const FormError& e) {
    bool found = false;
    for (const auto& v : e.report().violations) found |= v.kind == "skew-K" && v.i >= 0 && v.j >= 0;
    CHECK(found);
  }
  auto bad = form_to_json(registry_get("wave"));
  bad["K"].erase(0);
  CHECK_THROWS(form_from_json(bad));
}
