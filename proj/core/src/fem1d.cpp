#include "sgdpce/fem1d.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include <gsl/gsl_integration.h>

namespace sgdpce {

double QuadratureRule::integrate(
    const std::function<double(double)> &integrand) const {
  double sum = 0.0;
  for (const auto &point : points) {
    sum += point.weight * integrand(point.x);
  }
  return sum;
}

Mesh1D::Mesh1D(double length, std::size_t interior_count,
               std::size_t points_per_element)
    : length_(length), interior_count_(interior_count) {
  if (!(length > 0.0)) {
    throw std::invalid_argument("mesh length must be positive");
  }
  if (interior_count == 0) {
    throw std::invalid_argument("mesh needs at least one interior node");
  }
  width_ = length / static_cast<double>(interior_count + 1);
  nodes_.resize(interior_count + 2);
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    nodes_[k] = left() + static_cast<double>(k) * width_;
  }
  nodes_.back() = right();
  rule_ = quadrature_points(*this, points_per_element);
}

std::size_t Mesh1D::locate(double x) const {
  if (!(x >= left() - 1e-12 * length_ && x <= right() + 1e-12 * length_)) {
    throw std::domain_error("point " + std::to_string(x) +
                            " lies outside the mesh");
  }
  const double scaled = (x - left()) / width_;
  const double element = std::ceil(scaled) - 1.0;
  if (element <= 0.0) {
    return 0;
  }
  return std::min(static_cast<std::size_t>(element), interior_count_);
}

double Mesh1D::interpolate(std::span<const double> nodal, double x) const {
  if (nodal.size() != nodes_.size()) {
    throw std::invalid_argument("nodal vector must have M+2 entries");
  }
  const std::size_t e = locate(x);
  const double t = (x - nodes_[e]) / width_;
  return nodal[e] * (1.0 - t) + nodal[e + 1] * t;
}

QuadratureRule quadrature_points(const Mesh1D &mesh,
                                 std::size_t points_per_element) {
  if (points_per_element == 0) {
    throw std::invalid_argument("quadrature needs at least one point");
  }
  std::unique_ptr<gsl_integration_glfixed_table,
                  decltype(&gsl_integration_glfixed_table_free)>
      table(gsl_integration_glfixed_table_alloc(points_per_element),
            &gsl_integration_glfixed_table_free);
  if (!table) {
    throw std::runtime_error("failed to build Gauss-Legendre table");
  }
  std::vector<double> reference(points_per_element);
  std::vector<double> weights(points_per_element);
  for (std::size_t q = 0; q < points_per_element; ++q) {
    gsl_integration_glfixed_point(0.0, 1.0, q, &reference[q], &weights[q],
                                  table.get());
  }

  QuadratureRule rule;
  rule.points_per_element = points_per_element;
  rule.points.reserve(mesh.element_count() * points_per_element);
  const double h = mesh.element_width();
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    for (std::size_t q = 0; q < points_per_element; ++q) {
      rule.points.push_back(QuadraturePoint{
          mesh.node(e) + reference[q] * h, weights[q] * h, e, reference[q]});
    }
  }
  return rule;
}

namespace {

void check_basis_index(const Mesh1D &mesh, std::size_t i) {
  if (i < 1 || i > mesh.interior_count()) {
    throw std::out_of_range("basis index out of range");
  }
}

} // namespace

double eval_phi(const Mesh1D &mesh, std::size_t i, double x) {
  check_basis_index(mesh, i);
  const std::size_t e = mesh.locate(x);
  const double t = (x - mesh.node(e)) / mesh.element_width();
  if (e + 1 == i) {
    return t;
  }
  if (e == i) {
    return 1.0 - t;
  }
  return 0.0;
}

double eval_dphi(const Mesh1D &mesh, std::size_t i, double x) {
  check_basis_index(mesh, i);
  const std::size_t e = mesh.locate(x);
  if (e + 1 == i) {
    return 1.0 / mesh.element_width();
  }
  if (e == i) {
    return -1.0 / mesh.element_width();
  }
  return 0.0;
}

double LiftingFunction::value(const Mesh1D &mesh, double x) const {
  const std::size_t e = mesh.locate(x);
  const double t = (x - mesh.node(e)) / mesh.element_width();
  double out = 0.0;
  if (e == 0) {
    out += left_value * (1.0 - t);
  }
  if (e == mesh.element_count() - 1) {
    out += right_value * t;
  }
  return out;
}

} // namespace sgdpce
