#include <doctest.h>

#include <cmath>

#include "diamond/tableau.hpp"

using namespace diamond;

TEST_CASE("gauss tableaux satisfy the order conditions") {
  for (int r = 1; r <= 4; ++r) {
    CAPTURE(r);
    const RKTableau t = gauss_tableau(r);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(r);
    CHECK((t.A * one - t.c).norm() < 1e-14);
    for (int k = 1; k <= 2 * r; ++k)
      CHECK(t.b.dot(t.c.array().pow(k - 1).matrix()) == doctest::Approx(1.0 / k).epsilon(1e-13));
    CHECK((t.F * t.A - Eigen::MatrixXd::Identity(r, r)).norm() < 1e-12);
    CHECK((t.mu - t.F * one).norm() < 1e-12);
    CHECK(t.alpha == doctest::Approx(1.0 - std::pow(-1.0, r)).epsilon(1e-12));
  }
}

TEST_CASE("tableau errors") {
  CHECK_THROWS(gauss_tableau(0));
  CHECK_THROWS(gauss_tableau(5));
  CHECK_THROWS(make_tableau(Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd::Ones(2), Eigen::VectorXd::Ones(2)));
}
