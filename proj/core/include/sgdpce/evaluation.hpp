#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sgdpce/estimators.hpp"
#include "sgdpce/rng.hpp"

namespace sgdpce {

struct EnergyEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t sample_count = 0;
};

/// Running mean and standard error (Welford).
class RunningMean {
public:
  void add(double value);
  std::size_t count() const { return count_; }
  double mean() const { return mean_; }
  double variance() const;
  EnergyEstimate estimate() const;

private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Monte Carlo estimate of J(c) over germs (iteration, 0..n-1, purpose).
EnergyEstimate estimate_energy(const Assembler &assembler,
                               const CoefficientVector &c,
                               std::size_t n_samples,
                               const GermSampler &sampler,
                               Purpose purpose = Purpose::Evaluation,
                               std::uint64_t iteration = 0);
EnergyEstimate estimate_energy(const ProblemInstance &problem,
                               const Mesh1D &mesh, const PcBasisSet &basis,
                               const CoefficientVector &c,
                               std::size_t n_samples, std::uint64_t seed);

/// Tensor Gauss-Hermite rule for the standard normal measure in K
/// dimensions: nodes are row-major (points x K), weights sum to 1.
struct GaussHermiteGrid {
  std::size_t dimension = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return weights.size(); }
  std::span<const double> node(std::size_t k) const {
    return {nodes.data() + k * dimension, dimension};
  }
};
GaussHermiteGrid gauss_hermite_grid(std::size_t dimension,
                                    std::size_t points_per_dimension);

/// J(c) by tensor Gauss-Hermite quadrature in the germ. The standard error
/// field is zero; `sample_count` holds the number of nodes.
EnergyEstimate estimate_energy_quadrature(const Assembler &assembler,
                                          const CoefficientVector &c,
                                          std::size_t points_per_dimension);

/// E[(u*(x, Y) - u_c(x, Y))^2] by Monte Carlo. Throws std::invalid_argument
/// if the problem has no exact solution.
EnergyEstimate pointwise_l2_error(const Assembler &assembler,
                                  const CoefficientVector &c, double x,
                                  std::size_t n_samples,
                                  const GermSampler &sampler);

/// Monte Carlo energy of the exact solution, integrated with the mesh's
/// quadrature rule per germ.
EnergyEstimate exact_energy_mc(const ProblemInstance &problem,
                               const Mesh1D &mesh, std::size_t n_samples,
                               const GermSampler &sampler);

/// Nodal interpolation in space and Gauss-Hermite projection onto the chaos
/// basis of the exact solution (the lifting is removed from mode 0).
CoefficientVector project_exact_solution(const Assembler &assembler,
                                         std::size_t points_per_dimension);

/// u_c(x, y) at each point, one row per germ (row-major n x points).
std::vector<double> sample_solution(const Assembler &assembler,
                                    const CoefficientVector &c,
                                    std::span<const double> points,
                                    std::size_t n_samples,
                                    const GermSampler &sampler);
/// Same germs, exact solution.
std::vector<double> sample_exact_solution(const ProblemInstance &problem,
                                          std::span<const double> points,
                                          std::size_t n_samples,
                                          const GermSampler &sampler);

struct CdfEstimate {
  std::vector<double> points;
  /// One threshold grid per point.
  std::vector<std::vector<double>> thresholds;
  /// Row-major over the threshold grids (first point slowest).
  std::vector<double> probabilities;
  std::size_t sample_count = 0;

  double at(std::size_t a) const { return probabilities.at(a); }
  double at(std::size_t a, std::size_t b) const {
    return probabilities.at(a * thresholds.at(1).size() + b);
  }
};

/// Empirical (joint) CDF from rows of `samples` (n x points.size()).
CdfEstimate cdf_from_samples(std::span<const double> samples,
                             std::span<const double> points,
                             const std::vector<std::vector<double>> &thresholds);

CdfEstimate empirical_cdf(const Assembler &assembler,
                          const CoefficientVector &c,
                          std::span<const double> points,
                          const std::vector<std::vector<double>> &thresholds,
                          std::size_t n_samples, const GermSampler &sampler);

/// sup_t |F_a(t) - F_b(t)| between two empirical distributions.
double kolmogorov_distance(std::vector<double> a, std::vector<double> b);

/// Deterministic FEM solve of a linear problem for one germ. Returns the
/// M+2 nodal values, boundary included.
std::vector<double> reference_solve_linear(const ProblemInstance &problem,
                                           const Mesh1D &mesh,
                                           std::span<const double> y);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t points_used = 0;
  bool truncated = false; // some non-positive gaps were dropped
};

/// Least-squares slope of log(value - reference) against log(n) over
/// iterations in [n_first, n_last].
RateFit fit_convergence_rate(std::span<const double> iterations,
                             std::span<const double> values, double reference,
                             double n_first, double n_last);

} // namespace sgdpce
