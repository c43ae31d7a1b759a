#include "sgdpce/random_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace sgdpce {

double RandomField::value_at_mean(double x) const {
  const std::vector<double> zero(germ_dimension(), 0.0);
  return value(x, zero);
}

bool RandomField::log_linear_coefficients(double /*x*/,
                                          std::span<double> /*out*/) const {
  return false;
}

TrigLogNormalField::TrigLogNormalField(double beta, std::size_t harmonic_pairs,
                                       double period)
    : beta_(beta), pairs_(harmonic_pairs), period_(period) {
  if (harmonic_pairs == 0) {
    throw std::invalid_argument("trigonometric field needs n_V >= 1");
  }
  if (!(period > 0.0)) {
    throw std::invalid_argument("field period must be positive");
  }
}

double TrigLogNormalField::log_amplitude(double x,
                                         std::span<const double> y) const {
  if (y.size() != germ_dimension()) {
    throw std::invalid_argument("germ has wrong dimension");
  }
  const double omega = 2.0 * std::numbers::pi * x / period_;
  double sum = 0.0;
  for (std::size_t k = 0; k < pairs_; ++k) {
    const double phase = omega * static_cast<double>(k + 1);
    sum += y[k] * std::cos(phase) + y[pairs_ + k] * std::sin(phase);
  }
  return sum / std::sqrt(static_cast<double>(pairs_));
}

double TrigLogNormalField::value(double x, std::span<const double> y) const {
  return std::exp(beta_ * log_amplitude(x, y));
}

bool TrigLogNormalField::log_linear_coefficients(double x,
                                                 std::span<double> out) const {
  const double omega = 2.0 * std::numbers::pi * x / period_;
  const double scale = beta_ / std::sqrt(static_cast<double>(pairs_));
  for (std::size_t k = 0; k < pairs_; ++k) {
    const double phase = omega * static_cast<double>(k + 1);
    out[k] = scale * std::cos(phase);
    out[pairs_ + k] = scale * std::sin(phase);
  }
  return true;
}

void TrigLogNormalField::gradient_at_mean(double x,
                                          std::span<double> out) const {
  // kappa(x, 0) = 1, so the gradient is the exponent's coefficients.
  log_linear_coefficients(x, out);
}

std::string TrigLogNormalField::describe() const {
  std::ostringstream os;
  os << "trig-lognormal(beta=" << beta_ << ", n_V=" << pairs_
     << ", l=" << period_ << ")";
  return os.str();
}

HomogeneousLogNormalField::HomogeneousLogNormalField(
    std::size_t germ_dimension, double coefficient,
    std::vector<std::size_t> components)
    : dimension_(germ_dimension), coefficient_(coefficient),
      components_(std::move(components)) {
  for (std::size_t k : components_) {
    if (k >= dimension_) {
      throw std::invalid_argument(
          "homogeneous field uses a germ component beyond K");
    }
  }
}

double HomogeneousLogNormalField::value(double /*x*/,
                                        std::span<const double> y) const {
  if (y.size() != dimension_) {
    throw std::invalid_argument("germ has wrong dimension");
  }
  double sum = 0.0;
  for (std::size_t k : components_) {
    sum += y[k];
  }
  return std::exp(coefficient_ * sum);
}

bool HomogeneousLogNormalField::log_linear_coefficients(
    double /*x*/, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t k : components_) {
    out[k] += coefficient_;
  }
  return true;
}

void HomogeneousLogNormalField::gradient_at_mean(double x,
                                                 std::span<double> out) const {
  log_linear_coefficients(x, out);
}

std::string HomogeneousLogNormalField::describe() const {
  std::ostringstream os;
  os << "homogeneous-lognormal(coefficient=" << coefficient_ << ", K="
     << dimension_ << ")";
  return os.str();
}

ScaledField::ScaledField(FieldPtr inner, double factor)
    : inner_(std::move(inner)), factor_(factor) {
  if (!inner_) {
    throw std::invalid_argument("scaled field needs an inner field");
  }
}

void ScaledField::gradient_at_mean(double x, std::span<double> out) const {
  inner_->gradient_at_mean(x, out);
  for (double &v : out) {
    v *= factor_;
  }
}

std::string ScaledField::describe() const {
  std::ostringstream os;
  os << factor_ << " * " << inner_->describe();
  return os.str();
}

FieldBounds empirical_bounds(const RandomField &field,
                             std::span<const double> xs,
                             const GermSampler &sampler,
                             std::size_t sample_count) {
  FieldBounds bounds{std::numeric_limits<double>::infinity(),
                     -std::numeric_limits<double>::infinity(), 0};
  std::vector<double> y;
  for (std::size_t s = 0; s < sample_count; ++s) {
    sampler.sample_into(0, s, Purpose::Evaluation, y);
    for (double x : xs) {
      const double kappa = field.value(x, y);
      bounds.min_value = std::min(bounds.min_value, kappa);
      bounds.max_value = std::max(bounds.max_value, kappa);
      ++bounds.evaluations;
    }
  }
  return bounds;
}

} // namespace sgdpce
