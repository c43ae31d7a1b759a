#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "sgdpce/fem1d.hpp"
#include "sgdpce/pc_basis.hpp"
#include "sgdpce/random_field.hpp"

namespace sgdpce {

/// Reaction term f(x, u, y) of -(kappa u')' + f(x, u, y) + s(x, y) = 0,
/// with antiderivative F (dF/du = f) and derivative df/du.
struct Nonlinearity {
  using Function =
      std::function<double(double x, double u, std::span<const double> y)>;

  std::string name = "none";
  Function value;
  Function antiderivative;
  Function derivative;
  // Bound, Lipschitz constant and lower bound of df/du, when known.
  std::optional<double> bound;
  std::optional<double> lipschitz;
  std::optional<double> derivative_lower_bound;

  bool is_zero() const { return !value; }

  static Nonlinearity none();
  static Nonlinearity sine();
  static Nonlinearity custom(std::string name, Function value,
                             Function antiderivative, Function derivative);
};

using SpaceGermFunction =
    std::function<double(double x, std::span<const double> y)>;

enum class ProblemKind {
  LinearHomogeneous,
  LinearNonhomogeneous,
  SemilinearHomogeneousField,
  SemilinearNonhomogeneousField,
  Custom,
};

std::string to_string(ProblemKind kind);

struct Discretization {
  std::size_t interior_count = 50;
  unsigned max_degree = 3;
  std::size_t quadrature_points = 4;
};

/// One semilinear elliptic problem with random coefficients on
/// D = [-l/2, l/2], together with its variational energy
///   E(u) = E[ int_D 1/2 kappa |u'|^2 + F(x, u, Y) + s(x, Y) u dx ].
struct ProblemInstance {
  std::string name;
  ProblemKind kind = ProblemKind::Custom;
  double length = 1.0;
  FieldPtr field;
  Nonlinearity nonlinearity = Nonlinearity::none();
  SpaceGermFunction source;         // s(x, y); empty means zero
  LiftingFunction boundary;         // Dirichlet data
  SpaceGermFunction exact_solution; // u*(x, y) when known
  SpaceGermFunction exact_derivative;
  std::optional<double> exact_energy;
  Discretization discretization;

  std::size_t germ_dimension() const { return field->germ_dimension(); }
  bool is_linear() const { return nonlinearity.is_zero(); }
  bool has_exact_solution() const { return static_cast<bool>(exact_solution); }

  /// Pointwise energy density 1/2 kappa du^2 + F(x, u, y) + s(x, y) u.
  double energy_density(double x, double u, double du, double kappa,
                        std::span<const double> y) const;
};

Mesh1D make_mesh(const ProblemInstance &problem);
PcBasisSet make_basis(const ProblemInstance &problem);

/// -(kappa u')' = 0, u = 0 on the boundary; kappa trigonometric log-normal.
/// The minimiser is c* = 0 with J(c*) = 0.
ProblemInstance builtin_linear_homogeneous(double beta, std::size_t n_v,
                                           double length,
                                           std::size_t interior_count,
                                           unsigned max_degree);

/// -(kappa u')' = 0, u(-l/2) = 0, u(l/2) = 1. The per-germ solution is
/// the normalised integral of 1/kappa.
ProblemInstance builtin_linear_nonhomogeneous(double beta, std::size_t n_v,
                                              double length,
                                              std::size_t interior_count,
                                              unsigned max_degree);

/// -(kappa(Y) u')' + sin(u) + s(x, Y) = 0 with kappa = exp(0.2 (Y1 + Y2))
/// and s chosen so that u* = sin(pi x) / kappa(Y). Requires an even
/// integer length.
ProblemInstance builtin_semilinear_homogeneous_field(double length,
                                                     std::size_t interior_count,
                                                     unsigned max_degree);

/// -(kappa(x, Y) u')' + sin(u) = 0, zero boundary; u* = 0, E(u*) = -l.
ProblemInstance builtin_semilinear_nonhomogeneous_field(
    double beta, std::size_t n_v, double length, std::size_t interior_count,
    unsigned max_degree);

/// Same problem with kappa replaced by factor * kappa.
ProblemInstance with_scaled_field(const ProblemInstance &problem,
                                  double factor);

} // namespace sgdpce
