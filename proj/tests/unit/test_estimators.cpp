#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "sgdpce/estimators.hpp"

using namespace sgdpce;

namespace {

CoefficientVector random_coefficients(const Assembler &a, std::uint64_t seed, double scale) {
  auto c = a.zero_coefficients();
  const GermSampler s(c.size(), seed);
  const auto v = s.sample(0, 0, Purpose::Experiment);
  for (std::size_t k = 0; k < c.size(); ++k) c.data()[k] = scale * v[k];
  return c;
}

double max_abs_diff(const CoefficientVector &a, const CoefficientVector &b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    worst = std::max(worst, std::abs(a.data()[k] - b.data()[k]));
  }
  return worst;
}

double sample_energy(const Assembler &a, const CoefficientVector &c,
                     std::span<const double> y) {
  Assembler::GermData data;
  a.prepare(c, y, data);
  return a.energy(data);
}

} // namespace

TEST_CASE("coefficient vector layout is j-major") {
  CoefficientVector c(3, 2);
  c(2, 1) = 5.0;
  CHECK(c.data()[1 * 3 + 2] == 5.0);
  CHECK(c.block(1)[2] == 5.0);
  CHECK(c.norm() == doctest::Approx(5.0));
}

TEST_CASE("gradient agrees with the naive double loop") {
  for (const auto &problem :
       {builtin_semilinear_homogeneous_field(2.0, 5, 2),
        builtin_linear_nonhomogeneous(0.3, 1, 10.0, 5, 2)}) {
    const auto mesh = make_mesh(problem);
    const auto basis = make_basis(problem);
    REQUIRE(basis.size() == 6);
    const Assembler a(problem, mesh, basis);
    const auto c = random_coefficients(a, 3, 0.5);
    const GermSampler s(basis.germ_dimension(), 8);
    for (std::uint64_t n = 0; n < 5; ++n) {
      const auto y = s.sample(0, n, Purpose::Experiment);
      const auto fast = a.gradient(c, y).values;
      const auto slow = oracle::naive_gradient(problem, mesh, basis, c, y);
      CHECK(max_abs_diff(fast, slow) < 1e-12);
      CHECK(max_abs_diff(gradient_sample(problem, mesh, basis, c, y).values, fast) == 0.0);
    }
  }
}

TEST_CASE("per-sample gradient is the derivative of the per-sample energy") {
  const auto problem = builtin_semilinear_nonhomogeneous_field(0.3, 2, 12.0, 8, 2);
  const auto mesh = make_mesh(problem);
  const auto basis = make_basis(problem);
  const Assembler a(problem, mesh, basis);
  auto c = random_coefficients(a, 5, 0.3);
  const std::vector<double> y = {0.4, -1.0, 0.8, 0.2};
  const auto g = a.gradient(c, y).values;
  const double h = 1e-6;
  for (std::size_t k = 0; k < c.size(); k += 7) {
    const double keep = c.data()[k];
    c.data()[k] = keep + h;
    const double up = sample_energy(a, c, y);
    c.data()[k] = keep - h;
    const double down = sample_energy(a, c, y);
    c.data()[k] = keep;
    CHECK(g.data()[k] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("Hessian blocks are the derivative of the gradient") {
  const auto problem = builtin_semilinear_nonhomogeneous_field(0.3, 1, 12.0, 6, 2);
  const auto mesh = make_mesh(problem);
  const auto basis = make_basis(problem);
  const Assembler a(problem, mesh, basis);
  auto c = random_coefficients(a, 7, 0.4);
  const std::vector<double> y = {0.9, -0.3};
  const auto full = a.hessian_blocks(c, y, HessianStage::Full);
  const auto lin = a.hessian_blocks(c, y, HessianStage::LinearOnly);
  REQUIRE(full.blocks.size() == basis.size());
  const double h = 1e-6;
  const std::size_t M = a.spatial_size();
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const auto dense = full.blocks[j].to_dense();
    for (std::size_t k = 0; k < M; ++k) {
      const double keep = c(k, j);
      c(k, j) = keep + h;
      const auto up = a.gradient(c, y).values;
      c(k, j) = keep - h;
      const auto down = a.gradient(c, y).values;
      c(k, j) = keep;
      for (std::size_t i = 0; i < M; ++i) {
        const double fd = (up(i, j) - down(i, j)) / (2 * h);
        CHECK(dense[i * M + k] == doctest::Approx(fd).epsilon(1e-5).scale(1e-3));
      }
    }
    // The linear stage is the stiffness part only.
    Assembler::GermData data;
    a.prepare(c, y, data);
    auto stiff = a.stiffness(data);
    stiff.scale(data.psi[j] * data.psi[j]);
    for (std::size_t i = 0; i < M; ++i) {
      CHECK(lin.blocks[j].diagonal[i] == doctest::Approx(stiff.diagonal[i]));
    }
  }
}

TEST_CASE("surrogate means and control variates are exact in expectation") {
  // Surrogate residuals are polynomial in the germ, so a Gauss-Hermite rule
  // with enough points integrates them exactly.
  const auto problem = builtin_linear_nonhomogeneous(0.2, 1, 10.0, 6, 2);
  const auto mesh = make_mesh(problem);
  const auto basis = make_basis(problem);
  const Assembler a(problem, mesh, basis);
  const auto c = random_coefficients(a, 11, 0.2);
  const std::size_t M = a.spatial_size();
  for (CvMode mode : {CvMode::Order0, CvMode::Order1}) {
    const auto means = a.surrogate_means(c, mode);
    CoefficientVector quad(M, basis.size());
    ControlVariateState state{mode, std::vector<double>(c.size(), 0.7), 0};
    CoefficientVector shift(M, basis.size());
    Assembler::GermData data;
    std::vector<double> z(M);
    oracle::tensor_quadrature(2, 6, [&](std::span<const double> y, double w) {
      a.prepare(c, y, data);
      a.surrogate_residual(data, mode, z);
      for (std::size_t j = 0; j < basis.size(); ++j) {
        for (std::size_t i = 0; i < M; ++i) quad(i, j) += w * data.psi[j] * z[i];
      }
      const auto cv = a.cv_gradient(c, y, state, means).values;
      const auto plain = a.gradient(c, y).values;
      for (std::size_t k = 0; k < c.size(); ++k) {
        shift.data()[k] += w * (cv.data()[k] - plain.data()[k]);
      }
    });
    CHECK(max_abs_diff(quad, means) < 1e-12);
    CHECK(shift.norm() < 1e-12);
  }
  CHECK(a.surrogate_means(c, CvMode::None).norm() == 0.0);
}

TEST_CASE("control variate multipliers") {
  const auto problem = builtin_linear_homogeneous(0.1, 2, 10.0, 10, 2);
  const auto mesh = make_mesh(problem);
  const auto basis = make_basis(problem);
  const Assembler a(problem, mesh, basis);
  const auto c = random_coefficients(a, 2, 1.0);
  const auto state = estimate_cv_lambda(a, c, CvMode::Order1, 500, GermSampler(4, 1));
  CHECK(state.lambda.size() == c.size());
  CHECK(state.pilot_size == 500);
  // For small beta the surrogate almost equals the residual, so lambda ~ -1.
  double mean = 0.0;
  for (double l : state.lambda) mean += l;
  CHECK(mean / state.lambda.size() == doctest::Approx(-1.0).epsilon(0.05));
  const auto none = estimate_cv_lambda(a, c, CvMode::None, 10, GermSampler(4, 1));
  CHECK(none.mode == CvMode::None);
  ControlVariateState empty{CvMode::Order1, {}, 0};
  const std::vector<double> y(4, 0.0);
  CHECK_THROWS_AS(a.cv_gradient(c, y, empty, a.surrogate_means(c, CvMode::Order1)),
                  std::invalid_argument);
}

TEST_CASE("a constant surrogate gets a zero multiplier") {
  // Zero coefficients and zero boundary data give Z = 0, hence Var(Z) = 0.
  const auto problem = builtin_linear_homogeneous(0.1, 1, 10.0, 4, 1);
  const auto mesh = make_mesh(problem);
  const auto basis = make_basis(problem);
  const Assembler a(problem, mesh, basis);
  const auto state =
      estimate_cv_lambda(a, a.zero_coefficients(), CvMode::Order0, 50, GermSampler(2, 1));
  for (double l : state.lambda) CHECK(l == 0.0);
}

TEST_CASE("mini-batch average") {
  const auto problem = builtin_linear_homogeneous(0.1, 1, 10.0, 4, 1);
  const auto mesh = make_mesh(problem);
  const auto basis = make_basis(problem);
  const Assembler a(problem, mesh, basis);
  const auto c = random_coefficients(a, 1, 1.0);
  std::vector<GradientSample> g;
  std::vector<HessianBlockSample> h;
  const GermSampler s(2, 4);
  for (std::uint64_t n = 0; n < 3; ++n) {
    const auto y = s.sample(0, n, Purpose::Gradient);
    g.push_back(a.gradient(c, y));
    h.push_back(a.hessian_blocks(c, y, HessianStage::Full));
  }
  const auto mg = minibatch_average(g);
  const auto mh = minibatch_average(h);
  CHECK(mg.values(1, 2) ==
        doctest::Approx((g[0].values(1, 2) + g[1].values(1, 2) + g[2].values(1, 2)) / 3));
  CHECK(mh.blocks[1].diagonal[0] ==
        doctest::Approx((h[0].blocks[1].diagonal[0] + h[1].blocks[1].diagonal[0] +
                         h[2].blocks[1].diagonal[0]) / 3));
}

TEST_CASE("cv mode names") {
  for (CvMode m : {CvMode::None, CvMode::Order0, CvMode::Order1}) {
    CHECK(parse_cv_mode(to_string(m)) == m);
  }
  CHECK_THROWS(parse_cv_mode("order7"));
}
