#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sgdpce/fem1d.hpp"

using namespace sgdpce;

TEST_CASE("uniform mesh geometry") {
  const Mesh1D mesh(10.0, 4);
  CHECK(mesh.element_count() == 5);
  CHECK(mesh.element_width() == doctest::Approx(2.0));
  CHECK(mesh.nodes().size() == 6);
  CHECK(mesh.node(0) == doctest::Approx(-5.0));
  CHECK(mesh.node(5) == doctest::Approx(5.0));
  CHECK(mesh.locate(-5.0) == 0);
  CHECK(mesh.locate(5.0) == 4);
  CHECK(mesh.locate(-3.0) == 0);
  CHECK(mesh.locate(-2.9) == 1);
  CHECK_THROWS_AS(mesh.locate(5.1), std::domain_error);
  CHECK_THROWS_AS(Mesh1D(1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(Mesh1D(-1.0, 3), std::invalid_argument);
}

TEST_CASE("hat functions") {
  const Mesh1D mesh(1.0, 3);
  for (std::size_t i = 1; i <= 3; ++i) {
    CHECK(eval_phi(mesh, i, mesh.node(i)) == doctest::Approx(1.0));
  }
  CHECK(eval_phi(mesh, 2, mesh.node(1)) == doctest::Approx(0.0));
  CHECK_THROWS_AS(eval_phi(mesh, 0, 0.0), std::out_of_range);
  CHECK_THROWS_AS(eval_phi(mesh, 4, 0.0), std::out_of_range);
  // Interior hats plus the two boundary hats form a partition of unity.
  const LiftingFunction ends{1.0, 1.0};
  for (double x : {-0.49, -0.2, 0.0, 0.13, 0.4}) {
    double sum = ends.value(mesh, x);
    double slope = 0.0;
    for (std::size_t i = 1; i <= 3; ++i) {
      sum += eval_phi(mesh, i, x);
      slope += eval_dphi(mesh, i, x);
    }
    CHECK(sum == doctest::Approx(1.0));
    if (mesh.locate(x) != 0 && mesh.locate(x) != 3) {
      CHECK(slope == doctest::Approx(0.0));
    }
  }
}

TEST_CASE("Gauss-Legendre rule integrates cubics exactly per element") {
  const Mesh1D mesh(3.0, 5, 2);
  const auto &rule = mesh.quadrature();
  CHECK(rule.points.size() == 12);
  const double value = rule.integrate([](double x) { return x * x * x - 2 * x * x + 1; });
  const auto F = [](double x) { return x * x * x * x / 4 - 2 * x * x * x / 3 + x; };
  CHECK(value == doctest::Approx(F(1.5) - F(-1.5)).epsilon(1e-13));
  const double weights = rule.integrate([](double) { return 1.0; });
  CHECK(weights == doctest::Approx(3.0));
  for (const auto &p : rule.points) {
    CHECK(p.local > 0.0);
    CHECK(p.local < 1.0);
    CHECK(p.x == doctest::Approx(mesh.node(p.element) + p.local * mesh.element_width()));
  }
}

TEST_CASE("nodal interpolation reproduces linear functions") {
  const Mesh1D mesh(2.0, 7);
  std::vector<double> nodal;
  for (double x : mesh.nodes()) nodal.push_back(3.0 * x - 1.0);
  for (double x : {-1.0, -0.77, 0.0, 0.31, 1.0}) {
    CHECK(mesh.interpolate(nodal, x) == doctest::Approx(3.0 * x - 1.0));
  }
  std::vector<double> wrong(3);
  CHECK_THROWS_AS(mesh.interpolate(wrong, 0.0), std::invalid_argument);
}

TEST_CASE("lifting interpolates the boundary data") {
  const Mesh1D mesh(10.0, 9);
  const LiftingFunction lift{2.0, -1.0};
  CHECK(lift.value(mesh, -5.0) == doctest::Approx(2.0));
  CHECK(lift.value(mesh, 5.0) == doctest::Approx(-1.0));
  CHECK(lift.value(mesh, 0.0) == doctest::Approx(0.0));
  CHECK_FALSE(lift.homogeneous());
  CHECK(LiftingFunction{}.homogeneous());
}
