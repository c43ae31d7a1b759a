#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sgdpce/rng.hpp"

namespace sgdpce {

/// Random diffusivity kappa(x, y) driven by a finite standard-normal germ.
class RandomField {
public:
  virtual ~RandomField() = default;

  virtual std::size_t germ_dimension() const = 0;
  virtual double value(double x, std::span<const double> y) const = 0;

  /// kappa(x, E[Y]) = kappa(x, 0).
  virtual double value_at_mean(double x) const;

  /// Gradient of kappa with respect to y at y = 0, written into `out`
  /// (length K).
  virtual void gradient_at_mean(double x, std::span<double> out) const = 0;

  /// If kappa(x, y) = exp(sum_k g_k(x) y_k), writes g(x) and returns true.
  /// Used to skip per-point transcendental setup in the estimators.
  virtual bool log_linear_coefficients(double x, std::span<double> out) const;

  virtual std::string describe() const = 0;
};

using FieldPtr = std::shared_ptr<const RandomField>;

/// kappa = exp(beta V), V(x, Y) = n_V^{-1/2} sum_k A_k cos(2 pi k x / l)
///                                              + B_k sin(2 pi k x / l),
/// germ layout (A_1..A_nV, B_1..B_nV).
class TrigLogNormalField final : public RandomField {
public:
  TrigLogNormalField(double beta, std::size_t harmonic_pairs, double period);

  double beta() const { return beta_; }
  std::size_t harmonic_pairs() const { return pairs_; }
  double period() const { return period_; }

  std::size_t germ_dimension() const override { return 2 * pairs_; }
  double value(double x, std::span<const double> y) const override;
  double value_at_mean(double /*x*/) const override { return 1.0; }
  void gradient_at_mean(double x, std::span<double> out) const override;
  bool log_linear_coefficients(double x,
                               std::span<double> out) const override;
  std::string describe() const override;

  /// The underlying Gaussian field V(x, y).
  double log_amplitude(double x, std::span<const double> y) const;

private:
  double beta_;
  std::size_t pairs_;
  double period_;
};

/// Spatially constant kappa(y) = exp(coefficient * sum_{k in used} y_k).
class HomogeneousLogNormalField final : public RandomField {
public:
  HomogeneousLogNormalField(std::size_t germ_dimension,
                            double coefficient = 0.2,
                            std::vector<std::size_t> components = {0, 1});

  double coefficient() const { return coefficient_; }
  const std::vector<std::size_t> &components() const { return components_; }

  std::size_t germ_dimension() const override { return dimension_; }
  double value(double x, std::span<const double> y) const override;
  double value_at_mean(double /*x*/) const override { return 1.0; }
  void gradient_at_mean(double x, std::span<double> out) const override;
  bool log_linear_coefficients(double x,
                               std::span<double> out) const override;
  std::string describe() const override;

private:
  std::size_t dimension_;
  double coefficient_;
  std::vector<std::size_t> components_;
};

/// factor * kappa(x, y).
class ScaledField final : public RandomField {
public:
  ScaledField(FieldPtr inner, double factor);

  std::size_t germ_dimension() const override {
    return inner_->germ_dimension();
  }
  double value(double x, std::span<const double> y) const override {
    return factor_ * inner_->value(x, y);
  }
  double value_at_mean(double x) const override {
    return factor_ * inner_->value_at_mean(x);
  }
  void gradient_at_mean(double x, std::span<double> out) const override;
  std::string describe() const override;

private:
  FieldPtr inner_;
  double factor_;
};

struct FieldBounds {
  double min_value;
  double max_value;
  std::size_t evaluations;
};

/// Empirical min/max of kappa over an x-grid times a germ sweep. Log-normal
/// fields have no uniform bounds, so this is a report, not a check.
FieldBounds empirical_bounds(const RandomField &field,
                             std::span<const double> xs,
                             const GermSampler &sampler,
                             std::size_t sample_count);

} // namespace sgdpce
