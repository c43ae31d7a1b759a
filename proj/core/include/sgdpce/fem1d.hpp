#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace sgdpce {

struct QuadraturePoint {
  double x;
  double weight;
  std::size_t element; // element e spans nodes e and e+1
  double local;        // reference coordinate in (0, 1)
};

/// Element-wise Gauss-Legendre rule, `points_per_element` points on each
/// of the M+1 elements.
struct QuadratureRule {
  std::size_t points_per_element = 0;
  std::vector<QuadraturePoint> points;

  double integrate(const std::function<double(double)> &integrand) const;
};

/// Uniform linear-element mesh on [-l/2, l/2] with M interior hat
/// functions. Node k sits at -l/2 + k*h for k = 0..M+1; interior basis
/// function i (1-based, 1 <= i <= M) is the hat centred at node i.
class Mesh1D {
public:
  Mesh1D(double length, std::size_t interior_count,
         std::size_t points_per_element = 4);

  double length() const { return length_; }
  double left() const { return -0.5 * length_; }
  double right() const { return 0.5 * length_; }
  std::size_t interior_count() const { return interior_count_; }
  std::size_t element_count() const { return interior_count_ + 1; }
  double element_width() const { return width_; }
  const std::vector<double> &nodes() const { return nodes_; }
  double node(std::size_t k) const { return nodes_.at(k); }
  const QuadratureRule &quadrature() const { return rule_; }

  /// Element containing x; at an interior node the element on the left.
  /// Throws std::domain_error outside [-l/2, l/2].
  std::size_t locate(double x) const;

  /// Values at x of the nodal interpolant with nodal values `nodal`
  /// (length M+2, boundary nodes included).
  double interpolate(std::span<const double> nodal, double x) const;

private:
  double length_;
  std::size_t interior_count_;
  double width_;
  std::vector<double> nodes_;
  QuadratureRule rule_;
};

QuadratureRule quadrature_points(const Mesh1D &mesh,
                                 std::size_t points_per_element);

double eval_phi(const Mesh1D &mesh, std::size_t i, double x);
double eval_dphi(const Mesh1D &mesh, std::size_t i, double x);

/// Dirichlet lifting: left * phi_0 + right * phi_{M+1}, i.e. the boundary
/// data interpolated on the first and last element only.
struct LiftingFunction {
  double left_value = 0.0;
  double right_value = 0.0;

  double value(const Mesh1D &mesh, double x) const;
  bool homogeneous() const { return left_value == 0.0 && right_value == 0.0; }
};

} // namespace sgdpce
