#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "sgdpce/random_field.hpp"

using namespace sgdpce;

TEST_CASE("trigonometric field matches its definition") {
  const TrigLogNormalField field(0.3, 2, 10.0);
  CHECK(field.germ_dimension() == 4);
  const std::vector<double> y = {0.5, -1.0, 2.0, 0.25};
  for (double x : {-5.0, -1.3, 0.0, 4.2}) {
    const double w = 2.0 * std::numbers::pi * x / 10.0;
    const double v = (y[0] * std::cos(w) + y[1] * std::cos(2 * w) +
                      y[2] * std::sin(w) + y[3] * std::sin(2 * w)) /
                     std::sqrt(2.0);
    CHECK(field.log_amplitude(x, y) == doctest::Approx(v));
    CHECK(field.value(x, y) == doctest::Approx(std::exp(0.3 * v)));
  }
  std::vector<double> bad(3);
  CHECK_THROWS_AS(field.value(0.0, bad), std::invalid_argument);
  CHECK_THROWS_AS(TrigLogNormalField(0.1, 0, 1.0), std::invalid_argument);
}

TEST_CASE("gradient at the mean and log-linear coefficients") {
  const TrigLogNormalField field(0.2, 3, 12.0);
  const std::size_t K = field.germ_dimension();
  std::vector<double> grad(K), coeff(K), y(K, 0.0);
  for (double x : {-4.0, 0.7, 5.5}) {
    field.gradient_at_mean(x, grad);
    REQUIRE(field.log_linear_coefficients(x, coeff));
    for (std::size_t k = 0; k < K; ++k) {
      y.assign(K, 0.0);
      y[k] = 1e-6;
      const double up = field.value(x, y);
      y[k] = -1e-6;
      const double down = field.value(x, y);
      CHECK(grad[k] == doctest::Approx((up - down) / 2e-6).epsilon(1e-7));
      CHECK(coeff[k] == doctest::Approx(grad[k]));
    }
    CHECK(field.value_at_mean(x) == 1.0);
  }
}

TEST_CASE("homogeneous field") {
  const HomogeneousLogNormalField field(4);
  const std::vector<double> y = {1.0, 2.0, 5.0, -3.0};
  CHECK(field.value(0.0, y) == doctest::Approx(std::exp(0.2 * 3.0)));
  CHECK(field.value(3.0, y) == field.value(-2.0, y));
  std::vector<double> grad(4);
  field.gradient_at_mean(0.0, grad);
  CHECK(grad == std::vector<double>{0.2, 0.2, 0.0, 0.0});
}

TEST_CASE("scaled field") {
  auto inner = std::make_shared<TrigLogNormalField>(0.1, 2, 10.0);
  const ScaledField field(inner, 2.0);
  const std::vector<double> y = {0.1, 0.2, 0.3, 0.4};
  CHECK(field.value(1.0, y) == doctest::Approx(2.0 * inner->value(1.0, y)));
  CHECK(field.value_at_mean(1.0) == doctest::Approx(2.0));
  std::vector<double> a(4), b(4);
  field.gradient_at_mean(1.0, a);
  inner->gradient_at_mean(1.0, b);
  for (std::size_t k = 0; k < 4; ++k) CHECK(a[k] == doctest::Approx(2.0 * b[k]));
}

TEST_CASE("empirical bounds bracket the field") {
  const TrigLogNormalField field(0.4, 2, 10.0);
  const std::vector<double> xs = {-5, -2.5, 0, 2.5, 5};
  const GermSampler sampler(4, 5);
  const auto bounds = empirical_bounds(field, xs, sampler, 200);
  CHECK(bounds.evaluations == 1000);
  CHECK(bounds.min_value > 0.0);
  CHECK(bounds.min_value < 1.0);
  CHECK(bounds.max_value > 1.0);
}
