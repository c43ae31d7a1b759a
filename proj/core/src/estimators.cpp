#include "sgdpce/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace sgdpce {

namespace {

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v); });
}

[[noreturn]] void throw_non_finite(const char *what,
                                   std::span<const double> germ) {
  std::ostringstream os;
  os << what << " produced a non-finite value at germ (";
  for (std::size_t k = 0; k < germ.size(); ++k) {
    os << (k ? ", " : "") << germ[k];
  }
  os << ")";
  throw NonFiniteError(os.str());
}

} // namespace

double CoefficientVector::norm() const {
  return std::sqrt(std::inner_product(data_.begin(), data_.end(),
                                      data_.begin(), 0.0));
}

std::string to_string(CvMode mode) {
  switch (mode) {
  case CvMode::None: return "none";
  case CvMode::Order0: return "order0";
  case CvMode::Order1: return "order1";
  }
  return "unknown";
}

CvMode parse_cv_mode(const std::string &text) {
  if (text == "none") return CvMode::None;
  if (text == "order0") return CvMode::Order0;
  if (text == "order1") return CvMode::Order1;
  throw std::invalid_argument("unknown control-variate mode '" + text + "'");
}

Assembler::Assembler(const ProblemInstance &problem, const Mesh1D &mesh,
                     const PcBasisSet &basis)
    : problem_(problem), mesh_(mesh), basis_(basis), moments_(basis) {
  if (!problem.field) {
    throw std::invalid_argument("problem has no random field");
  }
  const std::size_t K = problem.germ_dimension();
  if (basis.germ_dimension() != K) {
    throw std::invalid_argument(
        "chaos basis dimension does not match the field's germ dimension");
  }
  const auto &rule = mesh.quadrature().points;
  const std::size_t n_points = rule.size();
  const std::size_t n_elements = mesh.element_count();
  points_.reserve(n_points);
  for (const auto &p : rule) {
    points_.push_back({p.x, p.weight, p.element, p.local});
  }

  exponent_.assign(n_points * K, 0.0);
  log_linear_ = true;
  for (std::size_t q = 0; q < n_points && log_linear_; ++q) {
    log_linear_ = problem.field->log_linear_coefficients(
        points_[q].x, std::span<double>(exponent_.data() + q * K, K));
  }
  if (!log_linear_) {
    exponent_.clear();
  }

  mean_kappa_.resize(n_points);
  mean_gradient_.resize(n_points * K);
  mean_element_.assign(n_elements, 0.0);
  slope_element_.assign(K * n_elements, 0.0);
  for (std::size_t q = 0; q < n_points; ++q) {
    const auto &p = points_[q];
    mean_kappa_[q] = problem.field->value_at_mean(p.x);
    std::span<double> grad(mean_gradient_.data() + q * K, K);
    problem.field->gradient_at_mean(p.x, grad);
    mean_element_[p.element] += p.weight * mean_kappa_[q];
    for (std::size_t k = 0; k < K; ++k) {
      slope_element_[k * n_elements + p.element] += p.weight * grad[k];
    }
  }
}

void Assembler::prepare(std::span<const double> y, GermData &data) const {
  const std::size_t K = basis_.germ_dimension();
  if (y.size() != K) {
    throw std::invalid_argument("germ has wrong dimension");
  }
  data.germ.assign(y.begin(), y.end());
  data.psi.resize(basis_.size());
  basis_.eval_all(y, data.psi);
  data.kappa.resize(points_.size());
  if (log_linear_) {
    for (std::size_t q = 0; q < points_.size(); ++q) {
      const double *g = exponent_.data() + q * K;
      double exponent = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        exponent += g[k] * y[k];
      }
      data.kappa[q] = std::exp(exponent);
    }
  } else {
    for (std::size_t q = 0; q < points_.size(); ++q) {
      data.kappa[q] = problem_.field->value(points_[q].x, y);
    }
  }
  if (!all_finite(data.kappa)) {
    throw_non_finite("random field", y);
  }
}

void Assembler::nodal_values(const CoefficientVector &c,
                             std::span<const double> psi,
                             std::span<double> nodal) const {
  const std::size_t M = spatial_size();
  if (c.spatial_size() != M || c.chaos_size() != basis_.size() ||
      nodal.size() != M + 2 || psi.size() != basis_.size()) {
    throw std::invalid_argument("coefficient dimensions do not match");
  }
  nodal[0] = problem_.boundary.left_value;
  nodal[M + 1] = problem_.boundary.right_value;
  std::fill(nodal.begin() + 1, nodal.begin() + 1 + M, 0.0);
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const double weight = psi[j];
    if (weight == 0.0) {
      continue;
    }
    const auto block = c.block(j);
    for (std::size_t i = 0; i < M; ++i) {
      nodal[i + 1] += weight * block[i];
    }
  }
}

void Assembler::prepare(const CoefficientVector &c, std::span<const double> y,
                        GermData &data) const {
  prepare(y, data);
  data.nodal.resize(spatial_size() + 2);
  nodal_values(c, data.psi, data.nodal);
}

void Assembler::apply_element_stiffness(std::span<const double> weights,
                                        std::span<const double> nodal,
                                        std::span<double> out) const {
  const std::size_t M = spatial_size();
  const double inv_h2 = 1.0 / (mesh_.element_width() * mesh_.element_width());
  for (std::size_t n = 1; n <= M; ++n) {
    out[n - 1] = inv_h2 * (weights[n - 1] * (nodal[n] - nodal[n - 1]) -
                           weights[n] * (nodal[n + 1] - nodal[n]));
  }
}

void Assembler::residual(const GermData &data, std::span<double> linear,
                         std::span<double> reaction) const {
  const std::size_t M = spatial_size();
  if (!linear.empty()) {
    // u' is constant per element, so the flux integral reduces to the
    // element sum of w * kappa.
    thread_local std::vector<double> element_kappa;
    element_kappa.assign(mesh_.element_count(), 0.0);
    for (std::size_t q = 0; q < points_.size(); ++q) {
      element_kappa[points_[q].element] += points_[q].weight * data.kappa[q];
    }
    apply_element_stiffness(element_kappa, data.nodal, linear);
  }
  if (!reaction.empty()) {
    std::fill(reaction.begin(), reaction.end(), 0.0);
    const auto &f = problem_.nonlinearity;
    const bool has_reaction = !f.is_zero();
    const bool has_source = static_cast<bool>(problem_.source);
    if (!has_reaction && !has_source) {
      return;
    }
    for (const auto &p : points_) {
      const double t = p.local;
      const double u =
          data.nodal[p.element] * (1.0 - t) + data.nodal[p.element + 1] * t;
      double value = 0.0;
      if (has_reaction) {
        value += f.value(p.x, u, data.germ);
      }
      if (has_source) {
        value += problem_.source(p.x, data.germ);
      }
      value *= p.weight;
      // Interior node n has basis index n-1.
      if (p.element >= 1) {
        reaction[p.element - 1] += value * (1.0 - t);
      }
      if (p.element + 1 <= M) {
        reaction[p.element] += value * t;
      }
    }
  }
}

void Assembler::surrogate_residual(const GermData &data, CvMode mode,
                                   std::span<double> out) const {
  const std::size_t n_elements = mesh_.element_count();
  thread_local std::vector<double> element_kappa;
  element_kappa.assign(mean_element_.begin(), mean_element_.end());
  if (mode == CvMode::Order1) {
    for (std::size_t k = 0; k < data.germ.size(); ++k) {
      const double yk = data.germ[k];
      const double *slope = slope_element_.data() + k * n_elements;
      for (std::size_t e = 0; e < n_elements; ++e) {
        element_kappa[e] += slope[e] * yk;
      }
    }
  }
  apply_element_stiffness(element_kappa, data.nodal, out);
}

CoefficientVector Assembler::surrogate_means(const CoefficientVector &c,
                                             CvMode mode) const {
  const std::size_t M = spatial_size();
  const std::size_t P = basis_.size();
  const std::size_t K = basis_.germ_dimension();
  const std::size_t n_elements = mesh_.element_count();
  CoefficientVector means(M, P);
  if (mode == CvMode::None) {
    return means;
  }
  // Nodal vector of the j-th chaos mode; the lifting belongs to Psi_0.
  std::vector<double> nodal(M + 2);
  auto load_mode = [&](std::size_t j) {
    nodal[0] = j == 0 ? problem_.boundary.left_value : 0.0;
    nodal[M + 1] = j == 0 ? problem_.boundary.right_value : 0.0;
    const auto block = c.block(j);
    std::copy(block.begin(), block.end(), nodal.begin() + 1);
  };

  std::vector<double> action(M);
  for (std::size_t j = 0; j < P; ++j) {
    load_mode(j);
    apply_element_stiffness(mean_element_, nodal, action);
    const double norm = moments_.pair(j, j);
    auto out = means.block(j);
    for (std::size_t i = 0; i < M; ++i) {
      out[i] = norm * action[i];
    }
  }
  if (mode == CvMode::Order1) {
    for (std::size_t k = 0; k < K; ++k) {
      std::span<const double> slope(slope_element_.data() + k * n_elements,
                                    n_elements);
      for (std::size_t b = 0; b < P; ++b) {
        load_mode(b);
        apply_element_stiffness(slope, nodal, action);
        // E[Y_k Psi_j Psi_b] is symmetric in (j, b).
        for (const auto &entry : moments_.linear_row(k, b)) {
          auto out = means.block(entry.b);
          for (std::size_t i = 0; i < M; ++i) {
            out[i] += entry.value * action[i];
          }
        }
      }
    }
  }
  return means;
}

SymTridiagonal Assembler::stiffness(const GermData &data) const {
  const std::size_t M = spatial_size();
  std::vector<double> element_kappa(mesh_.element_count(), 0.0);
  for (std::size_t q = 0; q < points_.size(); ++q) {
    element_kappa[points_[q].element] += points_[q].weight * data.kappa[q];
  }
  const double inv_h2 = 1.0 / (mesh_.element_width() * mesh_.element_width());
  SymTridiagonal out(M);
  for (std::size_t n = 1; n <= M; ++n) {
    out.diagonal[n - 1] = inv_h2 * (element_kappa[n - 1] + element_kappa[n]);
    if (n < M) {
      out.off_diagonal[n - 1] = -inv_h2 * element_kappa[n];
    }
  }
  return out;
}

SymTridiagonal Assembler::reaction_mass(const GermData &data) const {
  const std::size_t M = spatial_size();
  SymTridiagonal out(M);
  const auto &f = problem_.nonlinearity;
  if (f.is_zero()) {
    return out;
  }
  for (const auto &p : points_) {
    const double t = p.local;
    const double u =
        data.nodal[p.element] * (1.0 - t) + data.nodal[p.element + 1] * t;
    const double b = p.weight * f.derivative(p.x, u, data.germ);
    const std::size_t e = p.element;
    if (e >= 1) {
      out.diagonal[e - 1] += b * (1.0 - t) * (1.0 - t);
    }
    if (e + 1 <= M) {
      out.diagonal[e] += b * t * t;
    }
    if (e >= 1 && e + 1 <= M) {
      out.off_diagonal[e - 1] += b * t * (1.0 - t);
    }
  }
  return out;
}

double Assembler::energy(const GermData &data) const {
  const double h = mesh_.element_width();
  double total = 0.0;
  for (std::size_t q = 0; q < points_.size(); ++q) {
    const auto &p = points_[q];
    const double left = data.nodal[p.element];
    const double right = data.nodal[p.element + 1];
    const double u = left * (1.0 - p.local) + right * p.local;
    const double du = (right - left) / h;
    total += p.weight *
             problem_.energy_density(p.x, u, du, data.kappa[q], data.germ);
  }
  return total;
}

GradientSample Assembler::gradient(const CoefficientVector &c,
                                   std::span<const double> y) const {
  thread_local GermData data;
  prepare(c, y, data);
  const std::size_t M = spatial_size();
  std::vector<double> linear(M), reaction(M);
  residual(data, linear, reaction);

  GradientSample sample{zero_coefficients(), data.germ, CvMode::None};
  for (std::size_t j = 0; j < basis_.size(); ++j) {
    auto out = sample.values.block(j);
    for (std::size_t i = 0; i < M; ++i) {
      out[i] = data.psi[j] * (linear[i] + reaction[i]);
    }
  }
  if (!all_finite(sample.values.data())) {
    throw_non_finite("gradient estimator", y);
  }
  return sample;
}

GradientSample Assembler::cv_gradient(
    const CoefficientVector &c, std::span<const double> y,
    const ControlVariateState &state,
    const CoefficientVector &surrogate_mean) const {
  if (state.mode == CvMode::None) {
    return gradient(c, y);
  }
  const std::size_t M = spatial_size();
  if (state.lambda.size() != M * basis_.size()) {
    throw std::invalid_argument(
        "control-variate multipliers missing: run estimate_cv_lambda first");
  }
  thread_local GermData data;
  prepare(c, y, data);
  std::vector<double> linear(M), reaction(M), surrogate(M);
  residual(data, linear, reaction);
  surrogate_residual(data, state.mode, surrogate);

  GradientSample sample{zero_coefficients(), data.germ, state.mode};
  for (std::size_t j = 0; j < basis_.size(); ++j) {
    auto out = sample.values.block(j);
    const auto mean = surrogate_mean.block(j);
    const double psi = data.psi[j];
    for (std::size_t i = 0; i < M; ++i) {
      const double lambda = state.lambda[j * M + i];
      out[i] = psi * (linear[i] + reaction[i]) +
               lambda * (psi * surrogate[i] - mean[i]);
    }
  }
  if (!all_finite(sample.values.data())) {
    throw_non_finite("control-variate gradient estimator", y);
  }
  return sample;
}

HessianBlockSample Assembler::hessian_blocks(const CoefficientVector &c,
                                             std::span<const double> y,
                                             HessianStage stage) const {
  thread_local GermData data;
  prepare(c, y, data);
  SymTridiagonal spatial = stiffness(data);
  if (stage == HessianStage::Full && !problem_.nonlinearity.is_zero()) {
    spatial.add_scaled(reaction_mass(data), 1.0);
  }
  if (!all_finite(spatial.diagonal) || !all_finite(spatial.off_diagonal)) {
    throw_non_finite("Hessian estimator", y);
  }
  HessianBlockSample sample;
  sample.germ = data.germ;
  sample.stage = stage;
  sample.blocks.reserve(basis_.size());
  for (std::size_t j = 0; j < basis_.size(); ++j) {
    SymTridiagonal block = spatial;
    block.scale(data.psi[j] * data.psi[j]);
    sample.blocks.push_back(std::move(block));
  }
  return sample;
}

GradientSample gradient_sample(const ProblemInstance &problem,
                               const Mesh1D &mesh, const PcBasisSet &basis,
                               const CoefficientVector &c,
                               std::span<const double> y) {
  return Assembler(problem, mesh, basis).gradient(c, y);
}

HessianBlockSample hessian_block_sample(const ProblemInstance &problem,
                                        const Mesh1D &mesh,
                                        const PcBasisSet &basis,
                                        const CoefficientVector &c,
                                        std::span<const double> y,
                                        HessianStage stage) {
  return Assembler(problem, mesh, basis).hessian_blocks(c, y, stage);
}

GradientSample cv_gradient_sample(const ProblemInstance &problem,
                                  const Mesh1D &mesh, const PcBasisSet &basis,
                                  const CoefficientVector &c,
                                  std::span<const double> y,
                                  const ControlVariateState &state) {
  const Assembler assembler(problem, mesh, basis);
  return assembler.cv_gradient(c, y, state,
                               assembler.surrogate_means(c, state.mode));
}

ControlVariateState estimate_cv_lambda(const Assembler &assembler,
                                       const CoefficientVector &c, CvMode mode,
                                       std::size_t pilot_size,
                                       const GermSampler &sampler,
                                       std::uint64_t iteration) {
  ControlVariateState state;
  state.mode = mode;
  state.pilot_size = pilot_size;
  const std::size_t M = assembler.spatial_size();
  const std::size_t P = assembler.chaos_size();
  state.lambda.assign(M * P, 0.0);
  if (mode == CvMode::None) {
    return state;
  }
  if (pilot_size < 2) {
    throw std::invalid_argument("control-variate pilot needs >= 2 samples");
  }

  // Welford co-moments per component.
  const std::size_t n_components = M * P;
  std::vector<double> mean_x(n_components, 0.0), mean_z(n_components, 0.0);
  std::vector<double> co_xz(n_components, 0.0), m2_z(n_components, 0.0);
  Assembler::GermData data;
  std::vector<double> linear(M), surrogate(M), germ;
  for (std::size_t s = 0; s < pilot_size; ++s) {
    sampler.sample_into(iteration, s, Purpose::Pilot, germ);
    assembler.prepare(c, germ, data);
    assembler.residual(data, linear, {});
    assembler.surrogate_residual(data, mode, surrogate);
    const double count = static_cast<double>(s + 1);
    for (std::size_t j = 0; j < P; ++j) {
      for (std::size_t i = 0; i < M; ++i) {
        const std::size_t idx = j * M + i;
        const double x = data.psi[j] * linear[i];
        const double z = data.psi[j] * surrogate[i];
        const double dx = x - mean_x[idx];
        mean_x[idx] += dx / count;
        const double dz = z - mean_z[idx];
        mean_z[idx] += dz / count;
        co_xz[idx] += dx * (z - mean_z[idx]);
        m2_z[idx] += dz * (z - mean_z[idx]);
      }
    }
  }
  for (std::size_t idx = 0; idx < n_components; ++idx) {
    const double var_z = m2_z[idx];
    if (var_z > 0.0 && std::isfinite(var_z)) {
      state.lambda[idx] = -co_xz[idx] / var_z;
    }
  }
  return state;
}

ControlVariateState estimate_cv_lambda(const ProblemInstance &problem,
                                       const Mesh1D &mesh,
                                       const PcBasisSet &basis,
                                       const CoefficientVector &c, CvMode mode,
                                       std::size_t pilot_size,
                                       std::uint64_t seed) {
  const Assembler assembler(problem, mesh, basis);
  return estimate_cv_lambda(assembler, c, mode, pilot_size,
                            GermSampler(basis.germ_dimension(), seed), 0);
}

GradientSample minibatch_average(std::span<const GradientSample> samples) {
  if (samples.empty()) {
    throw std::invalid_argument("cannot average an empty mini-batch");
  }
  GradientSample mean;
  mean.values = CoefficientVector(samples[0].values.spatial_size(),
                                  samples[0].values.chaos_size());
  mean.cv_mode = samples[0].cv_mode;
  auto &acc = mean.values.data();
  for (const auto &s : samples) {
    if (s.values.size() != acc.size()) {
      throw std::invalid_argument("mixed gradient sample sizes in batch");
    }
    const auto &v = s.values.data();
    for (std::size_t k = 0; k < acc.size(); ++k) {
      acc[k] += v[k];
    }
  }
  const double inv = 1.0 / static_cast<double>(samples.size());
  for (double &v : acc) {
    v *= inv;
  }
  return mean;
}

HessianBlockSample
minibatch_average(std::span<const HessianBlockSample> samples) {
  if (samples.empty()) {
    throw std::invalid_argument("cannot average an empty mini-batch");
  }
  HessianBlockSample mean;
  mean.stage = samples[0].stage;
  for (const auto &block : samples[0].blocks) {
    mean.blocks.emplace_back(block.size());
  }
  for (const auto &s : samples) {
    if (s.blocks.size() != mean.blocks.size()) {
      throw std::invalid_argument("mixed Hessian sample sizes in batch");
    }
    for (std::size_t j = 0; j < s.blocks.size(); ++j) {
      mean.blocks[j].add_scaled(s.blocks[j], 1.0);
    }
  }
  const double inv = 1.0 / static_cast<double>(samples.size());
  for (auto &block : mean.blocks) {
    block.scale(inv);
  }
  return mean;
}

} // namespace sgdpce
