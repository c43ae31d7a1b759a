#include "sgdpce/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include <gsl/gsl_integration.h>

namespace sgdpce {

void RunningMean::add(double value) {
  ++count_;
  const double delta = value - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (value - mean_);
}

double RunningMean::variance() const {
  return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
}

EnergyEstimate RunningMean::estimate() const {
  return {mean_, count_ > 0 ? std::sqrt(variance() / static_cast<double>(count_))
                            : 0.0,
          count_};
}

EnergyEstimate estimate_energy(const Assembler &assembler,
                               const CoefficientVector &c,
                               std::size_t n_samples,
                               const GermSampler &sampler, Purpose purpose,
                               std::uint64_t iteration) {
  if (n_samples < 2) {
    throw std::invalid_argument("energy estimate needs at least 2 samples");
  }
  RunningMean acc;
  Assembler::GermData data;
  std::vector<double> germ;
  for (std::size_t s = 0; s < n_samples; ++s) {
    sampler.sample_into(iteration, s, purpose, germ);
    assembler.prepare(c, germ, data);
    acc.add(assembler.energy(data));
  }
  return acc.estimate();
}

EnergyEstimate estimate_energy(const ProblemInstance &problem,
                               const Mesh1D &mesh, const PcBasisSet &basis,
                               const CoefficientVector &c,
                               std::size_t n_samples, std::uint64_t seed) {
  const Assembler assembler(problem, mesh, basis);
  return estimate_energy(assembler, c, n_samples,
                         GermSampler(basis.germ_dimension(), seed));
}

GaussHermiteGrid gauss_hermite_grid(std::size_t dimension,
                                    std::size_t points_per_dimension) {
  if (points_per_dimension == 0) {
    throw std::invalid_argument("Gauss-Hermite rule needs at least one node");
  }
  // Weight exp(-x^2 / 2), renormalised to a probability measure.
  std::unique_ptr<gsl_integration_fixed_workspace,
                  decltype(&gsl_integration_fixed_free)>
      rule(gsl_integration_fixed_alloc(gsl_integration_fixed_hermite,
                                       points_per_dimension, 0.0, 0.5, 0.0,
                                       0.0),
           &gsl_integration_fixed_free);
  if (!rule) {
    throw std::runtime_error("GSL Gauss-Hermite allocation failed");
  }
  const double *x = gsl_integration_fixed_nodes(rule.get());
  const double *w = gsl_integration_fixed_weights(rule.get());
  const double scale = 1.0 / std::sqrt(2.0 * std::numbers::pi);

  GaussHermiteGrid grid;
  grid.dimension = dimension;
  std::size_t total = 1;
  for (std::size_t k = 0; k < dimension; ++k) {
    total *= points_per_dimension;
  }
  grid.nodes.resize(total * dimension);
  grid.weights.resize(total);
  std::vector<std::size_t> digit(dimension, 0);
  for (std::size_t n = 0; n < total; ++n) {
    double weight = 1.0;
    for (std::size_t k = 0; k < dimension; ++k) {
      grid.nodes[n * dimension + k] = x[digit[k]];
      weight *= w[digit[k]] * scale;
    }
    grid.weights[n] = weight;
    for (std::size_t k = dimension; k-- > 0;) {
      if (++digit[k] < points_per_dimension) {
        break;
      }
      digit[k] = 0;
    }
  }
  return grid;
}

EnergyEstimate estimate_energy_quadrature(const Assembler &assembler,
                                          const CoefficientVector &c,
                                          std::size_t points_per_dimension) {
  const auto grid = gauss_hermite_grid(assembler.basis().germ_dimension(),
                                       points_per_dimension);
  Assembler::GermData data;
  double total = 0.0;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    assembler.prepare(c, grid.node(n), data);
    total += grid.weights[n] * assembler.energy(data);
  }
  return {total, 0.0, grid.size()};
}

EnergyEstimate pointwise_l2_error(const Assembler &assembler,
                                  const CoefficientVector &c, double x,
                                  std::size_t n_samples,
                                  const GermSampler &sampler) {
  const auto &problem = assembler.problem();
  if (!problem.has_exact_solution()) {
    throw std::invalid_argument("problem '" + problem.name +
                                "' has no exact solution");
  }
  RunningMean acc;
  Assembler::GermData data;
  std::vector<double> germ;
  for (std::size_t s = 0; s < n_samples; ++s) {
    sampler.sample_into(0, s, Purpose::Evaluation, germ);
    assembler.prepare(c, germ, data);
    const double approx = assembler.mesh().interpolate(data.nodal, x);
    const double diff = problem.exact_solution(x, germ) - approx;
    acc.add(diff * diff);
  }
  return acc.estimate();
}

EnergyEstimate exact_energy_mc(const ProblemInstance &problem,
                               const Mesh1D &mesh, std::size_t n_samples,
                               const GermSampler &sampler) {
  if (!problem.exact_solution || !problem.exact_derivative) {
    throw std::invalid_argument("problem '" + problem.name +
                                "' has no exact solution");
  }
  const auto &points = mesh.quadrature().points;
  RunningMean acc;
  std::vector<double> germ;
  for (std::size_t s = 0; s < n_samples; ++s) {
    sampler.sample_into(0, s, Purpose::Evaluation, germ);
    double total = 0.0;
    for (const auto &p : points) {
      const double u = problem.exact_solution(p.x, germ);
      const double du = problem.exact_derivative(p.x, germ);
      const double kappa = problem.field->value(p.x, germ);
      total += p.weight * problem.energy_density(p.x, u, du, kappa, germ);
    }
    acc.add(total);
  }
  return acc.estimate();
}

CoefficientVector project_exact_solution(const Assembler &assembler,
                                         std::size_t points_per_dimension) {
  const auto &problem = assembler.problem();
  if (!problem.exact_solution) {
    throw std::invalid_argument("problem '" + problem.name +
                                "' has no exact solution");
  }
  const auto &basis = assembler.basis();
  const auto &mesh = assembler.mesh();
  const std::size_t M = assembler.spatial_size();
  const auto grid =
      gauss_hermite_grid(basis.germ_dimension(), points_per_dimension);
  CoefficientVector c = assembler.zero_coefficients();
  std::vector<double> psi(basis.size());
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const auto y = grid.node(n);
    basis.eval_all(y, psi);
    for (std::size_t i = 0; i < M; ++i) {
      const double u = problem.exact_solution(mesh.node(i + 1), y);
      for (std::size_t j = 0; j < basis.size(); ++j) {
        c(i, j) += grid.weights[n] * u * psi[j];
      }
    }
  }
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const double norm = basis.norm_squared(j);
    for (double &v : c.block(j)) {
      v /= norm;
    }
  }
  return c;
}

std::vector<double> sample_solution(const Assembler &assembler,
                                    const CoefficientVector &c,
                                    std::span<const double> points,
                                    std::size_t n_samples,
                                    const GermSampler &sampler) {
  std::vector<double> out(n_samples * points.size());
  Assembler::GermData data;
  std::vector<double> germ;
  for (std::size_t s = 0; s < n_samples; ++s) {
    sampler.sample_into(0, s, Purpose::Evaluation, germ);
    assembler.prepare(c, germ, data);
    for (std::size_t k = 0; k < points.size(); ++k) {
      out[s * points.size() + k] =
          assembler.mesh().interpolate(data.nodal, points[k]);
    }
  }
  return out;
}

std::vector<double> sample_exact_solution(const ProblemInstance &problem,
                                          std::span<const double> points,
                                          std::size_t n_samples,
                                          const GermSampler &sampler) {
  if (!problem.exact_solution) {
    throw std::invalid_argument("problem '" + problem.name +
                                "' has no exact solution");
  }
  std::vector<double> out(n_samples * points.size());
  std::vector<double> germ;
  for (std::size_t s = 0; s < n_samples; ++s) {
    sampler.sample_into(0, s, Purpose::Evaluation, germ);
    for (std::size_t k = 0; k < points.size(); ++k) {
      out[s * points.size() + k] = problem.exact_solution(points[k], germ);
    }
  }
  return out;
}

CdfEstimate cdf_from_samples(std::span<const double> samples,
                             std::span<const double> points,
                             const std::vector<std::vector<double>> &thresholds) {
  const std::size_t dim = points.size();
  if (dim != 1 && dim != 2) {
    throw std::invalid_argument("CDF needs one or two evaluation points");
  }
  if (thresholds.size() != dim) {
    throw std::invalid_argument("one threshold grid per point is required");
  }
  if (samples.size() % dim != 0) {
    throw std::invalid_argument("sample array does not match point count");
  }
  for (const auto &grid : thresholds) {
    if (!std::is_sorted(grid.begin(), grid.end())) {
      throw std::invalid_argument("thresholds must be sorted");
    }
  }
  const std::size_t n = samples.size() / dim;
  CdfEstimate cdf;
  cdf.points.assign(points.begin(), points.end());
  cdf.thresholds = thresholds;
  cdf.sample_count = n;

  // Bucket each sample by the first threshold index it does not exceed,
  // then take cumulative sums along every axis.
  std::vector<std::size_t> extent(dim);
  std::size_t cells = 1;
  for (std::size_t k = 0; k < dim; ++k) {
    extent[k] = thresholds[k].size();
    cells *= extent[k];
  }
  std::vector<double> counts(cells, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t cell = 0;
    bool inside = true;
    for (std::size_t k = 0; k < dim; ++k) {
      const auto &grid = thresholds[k];
      const auto it =
          std::lower_bound(grid.begin(), grid.end(), samples[s * dim + k]);
      if (it == grid.end()) {
        inside = false;
        break;
      }
      cell = cell * extent[k] + static_cast<std::size_t>(it - grid.begin());
    }
    if (inside) {
      counts[cell] += 1.0;
    }
  }
  if (dim == 1) {
    for (std::size_t a = 1; a < cells; ++a) {
      counts[a] += counts[a - 1];
    }
  } else {
    const std::size_t rows = extent[0];
    const std::size_t cols = extent[1];
    for (std::size_t a = 0; a < rows; ++a) {
      for (std::size_t b = 1; b < cols; ++b) {
        counts[a * cols + b] += counts[a * cols + b - 1];
      }
    }
    for (std::size_t a = 1; a < rows; ++a) {
      for (std::size_t b = 0; b < cols; ++b) {
        counts[a * cols + b] += counts[(a - 1) * cols + b];
      }
    }
  }
  const double inv = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;
  cdf.probabilities.resize(cells);
  for (std::size_t a = 0; a < cells; ++a) {
    cdf.probabilities[a] = counts[a] * inv;
  }
  return cdf;
}

CdfEstimate empirical_cdf(const Assembler &assembler,
                          const CoefficientVector &c,
                          std::span<const double> points,
                          const std::vector<std::vector<double>> &thresholds,
                          std::size_t n_samples, const GermSampler &sampler) {
  if (points.size() != 1 && points.size() != 2) {
    throw std::invalid_argument("CDF needs one or two evaluation points");
  }
  const auto samples = sample_solution(assembler, c, points, n_samples, sampler);
  return cdf_from_samples(samples, points, thresholds);
}

double kolmogorov_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("Kolmogorov distance of an empty sample");
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t ia = 0, ib = 0;
  double worst = 0.0;
  while (ia < a.size() && ib < b.size()) {
    const double t = std::min(a[ia], b[ib]);
    while (ia < a.size() && a[ia] <= t) ++ia;
    while (ib < b.size() && b[ib] <= t) ++ib;
    worst = std::max(worst, std::abs(ia / na - ib / nb));
  }
  return worst;
}

std::vector<double> reference_solve_linear(const ProblemInstance &problem,
                                           const Mesh1D &mesh,
                                           std::span<const double> y) {
  if (!problem.is_linear()) {
    throw std::invalid_argument("reference solve requires a linear problem");
  }
  const Assembler assembler(problem, mesh, PcBasisSet::generate(y.size(), 0));
  const std::size_t M = mesh.interior_count();
  Assembler::GermData data;
  assembler.prepare(y, data);
  data.nodal.assign(M + 2, 0.0);
  data.nodal[0] = problem.boundary.left_value;
  data.nodal[M + 1] = problem.boundary.right_value;

  // The residual is affine in the interior values: r(u0 + d) = r(u0) + A d.
  std::vector<double> linear(M), load(M);
  assembler.residual(data, linear, load);
  std::vector<double> rhs(M);
  for (std::size_t i = 0; i < M; ++i) {
    rhs[i] = -(linear[i] + load[i]);
  }
  const TridiagonalCholesky factor(assembler.stiffness(data));
  if (!factor.ok()) {
    throw std::runtime_error("singular stiffness matrix in reference solve");
  }
  factor.solve_in_place(rhs);
  std::copy(rhs.begin(), rhs.end(), data.nodal.begin() + 1);
  return data.nodal;
}

RateFit fit_convergence_rate(std::span<const double> iterations,
                             std::span<const double> values, double reference,
                             double n_first, double n_last) {
  if (iterations.size() != values.size()) {
    throw std::invalid_argument("iteration and value arrays differ in size");
  }
  RateFit fit;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double n = iterations[k];
    if (n < n_first || n > n_last) {
      continue;
    }
    const double gap = values[k] - reference;
    if (!(gap > 0.0) || n <= 0.0) {
      fit.truncated = true;
      continue;
    }
    const double lx = std::log(n);
    const double ly = std::log(gap);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++fit.points_used;
  }
  if (fit.points_used < 2) {
    throw std::invalid_argument(
        "convergence fit needs at least two positive gaps in range");
  }
  const double count = static_cast<double>(fit.points_used);
  const double denom = count * sxx - sx * sx;
  fit.slope = denom != 0.0 ? (count * sxy - sx * sy) / denom : 0.0;
  fit.intercept = (sy - fit.slope * sx) / count;
  return fit;
}

} // namespace sgdpce
