#include "sgdpce/problem.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace sgdpce {

namespace {

double integrate_inverse_kappa(const RandomField &field, double a, double b,
                               std::span<const double> y) {
  if (b <= a) {
    return 0.0;
  }
  auto integrand = [&](double s) { return 1.0 / field.value(s, y); };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, a, b, 15, 1e-14);
}

} // namespace

Nonlinearity Nonlinearity::none() { return Nonlinearity{}; }

Nonlinearity Nonlinearity::sine() {
  Nonlinearity n;
  n.name = "sin";
  n.value = [](double, double u, std::span<const double>) {
    return std::sin(u);
  };
  n.antiderivative = [](double, double u, std::span<const double>) {
    return -std::cos(u);
  };
  n.derivative = [](double, double u, std::span<const double>) {
    return std::cos(u);
  };
  n.bound = 1.0;
  n.lipschitz = 1.0;
  // cos(u) takes negative values: no positive lower bound exists.
  n.derivative_lower_bound = std::nullopt;
  return n;
}

Nonlinearity Nonlinearity::custom(std::string name, Function value,
                                  Function antiderivative,
                                  Function derivative) {
  if (!value || !antiderivative || !derivative) {
    throw std::invalid_argument(
        "custom nonlinearity needs value, antiderivative and derivative");
  }
  Nonlinearity n;
  n.name = std::move(name);
  n.value = std::move(value);
  n.antiderivative = std::move(antiderivative);
  n.derivative = std::move(derivative);
  return n;
}

std::string to_string(ProblemKind kind) {
  switch (kind) {
  case ProblemKind::LinearHomogeneous: return "linear_homogeneous";
  case ProblemKind::LinearNonhomogeneous: return "linear_nonhomogeneous";
  case ProblemKind::SemilinearHomogeneousField:
    return "semilinear_homogeneous_field";
  case ProblemKind::SemilinearNonhomogeneousField:
    return "semilinear_nonhomogeneous_field";
  case ProblemKind::Custom: return "custom";
  }
  return "unknown";
}

double ProblemInstance::energy_density(double x, double u, double du,
                                       double kappa,
                                       std::span<const double> y) const {
  double density = 0.5 * kappa * du * du;
  if (!nonlinearity.is_zero()) {
    density += nonlinearity.antiderivative(x, u, y);
  }
  if (source) {
    density += source(x, y) * u;
  }
  return density;
}

Mesh1D make_mesh(const ProblemInstance &problem) {
  return Mesh1D(problem.length, problem.discretization.interior_count,
                problem.discretization.quadrature_points);
}

PcBasisSet make_basis(const ProblemInstance &problem) {
  return PcBasisSet::generate(problem.germ_dimension(),
                              problem.discretization.max_degree);
}

ProblemInstance builtin_linear_homogeneous(double beta, std::size_t n_v,
                                           double length,
                                           std::size_t interior_count,
                                           unsigned max_degree) {
  ProblemInstance p;
  p.name = "linear-homogeneous";
  p.kind = ProblemKind::LinearHomogeneous;
  p.length = length;
  p.field = std::make_shared<TrigLogNormalField>(beta, n_v, length);
  p.exact_solution = [](double, std::span<const double>) { return 0.0; };
  p.exact_derivative = p.exact_solution;
  p.exact_energy = 0.0;
  p.discretization = {interior_count, max_degree, 4};
  return p;
}

ProblemInstance builtin_linear_nonhomogeneous(double beta, std::size_t n_v,
                                              double length,
                                              std::size_t interior_count,
                                              unsigned max_degree) {
  ProblemInstance p;
  p.name = "linear-nonhomogeneous";
  p.kind = ProblemKind::LinearNonhomogeneous;
  p.length = length;
  auto field = std::make_shared<TrigLogNormalField>(beta, n_v, length);
  p.field = field;
  p.boundary = LiftingFunction{0.0, 1.0};
  const double a = -0.5 * length;
  const double b = 0.5 * length;
  p.exact_solution = [field, a, b](double x, std::span<const double> y) {
    const double total = integrate_inverse_kappa(*field, a, b, y);
    return integrate_inverse_kappa(*field, a, x, y) / total;
  };
  p.exact_derivative = [field, a, b](double x, std::span<const double> y) {
    const double total = integrate_inverse_kappa(*field, a, b, y);
    return 1.0 / (field->value(x, y) * total);
  };
  p.discretization = {interior_count, max_degree, 4};
  return p;
}

ProblemInstance builtin_semilinear_homogeneous_field(double length,
                                                     std::size_t interior_count,
                                                     unsigned max_degree) {
  const double rounded = std::round(length);
  if (rounded != length || static_cast<long long>(rounded) % 2 != 0) {
    throw std::invalid_argument(
        "semilinear homogeneous-field problem needs an even integer length "
        "so that sin(pi x) vanishes on the boundary");
  }
  ProblemInstance p;
  p.name = "semilinear-homogeneous-field";
  p.kind = ProblemKind::SemilinearHomogeneousField;
  p.length = length;
  auto field = std::make_shared<HomogeneousLogNormalField>(2, 0.2,
                                                           std::vector<std::size_t>{0, 1});
  p.field = field;
  p.nonlinearity = Nonlinearity::sine();
  constexpr double pi = std::numbers::pi;
  // s = -pi^2 sin(pi x) - sin(sin(pi x) / kappa) makes u* exact.
  p.source = [field](double x, std::span<const double> y) {
    const double kappa = field->value(x, y);
    const double s = std::sin(pi * x);
    return -pi * pi * s - std::sin(s / kappa);
  };
  p.exact_solution = [field](double x, std::span<const double> y) {
    return std::sin(pi * x) / field->value(x, y);
  };
  p.exact_derivative = [field](double x, std::span<const double> y) {
    return pi * std::cos(pi * x) / field->value(x, y);
  };
  p.discretization = {interior_count, max_degree, 4};
  return p;
}

ProblemInstance builtin_semilinear_nonhomogeneous_field(
    double beta, std::size_t n_v, double length, std::size_t interior_count,
    unsigned max_degree) {
  ProblemInstance p;
  p.name = "semilinear-nonhomogeneous-field";
  p.kind = ProblemKind::SemilinearNonhomogeneousField;
  p.length = length;
  p.field = std::make_shared<TrigLogNormalField>(beta, n_v, length);
  p.nonlinearity = Nonlinearity::sine();
  p.exact_solution = [](double, std::span<const double>) { return 0.0; };
  p.exact_derivative = p.exact_solution;
  p.exact_energy = -length;
  p.discretization = {interior_count, max_degree, 4};
  return p;
}

ProblemInstance with_scaled_field(const ProblemInstance &problem,
                                  double factor) {
  ProblemInstance scaled = problem;
  scaled.field = std::make_shared<ScaledField>(problem.field, factor);
  scaled.name = problem.name + "-scaled";
  scaled.kind = ProblemKind::Custom;
  // Scaling kappa leaves the solution unchanged only without reaction and
  // source terms.
  if (!problem.is_linear() || problem.source) {
    scaled.exact_solution = nullptr;
    scaled.exact_derivative = nullptr;
    scaled.exact_energy.reset();
  }
  return scaled;
}

} // namespace sgdpce
