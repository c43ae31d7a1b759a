#include "sgdpce/sgd.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sgdpce {

double LearningRateSchedule::rate(std::size_t n) const {
  const double eta = numerator / (offset + static_cast<double>(n));
  return clip ? std::min(eta, *clip) : eta;
}

std::string to_string(HessianMode mode) {
  switch (mode) {
  case HessianMode::None: return "none";
  case HessianMode::Linear: return "linear";
  case HessianMode::Staged: return "staged";
  case HessianMode::Full: return "full";
  }
  return "unknown";
}

HessianMode parse_hessian_mode(const std::string &text) {
  if (text == "none") return HessianMode::None;
  if (text == "linear") return HessianMode::Linear;
  if (text == "staged") return HessianMode::Staged;
  if (text == "full") return HessianMode::Full;
  throw std::invalid_argument("unknown Hessian mode '" + text + "'");
}

void SgdConfig::validate() const {
  if (batch_gradient < 1) {
    throw std::invalid_argument("batch_gradient must be >= 1");
  }
  if (batch_hessian < 1 && hessian_mode != HessianMode::None) {
    throw std::invalid_argument("batch_hessian must be >= 1");
  }
  if (hessian_mode == HessianMode::Staged && switch_iteration > iterations) {
    throw std::invalid_argument("switch_iteration exceeds iterations");
  }
  if (!(schedule.numerator > 0.0) || !std::isfinite(schedule.numerator)) {
    throw std::invalid_argument("learning-rate numerator must be positive");
  }
  if (!(schedule.offset + 1.0 > 0.0)) {
    throw std::invalid_argument("learning-rate offset must exceed -1");
  }
  if (schedule.clip && !(*schedule.clip > 0.0)) {
    throw std::invalid_argument("learning-rate clip must be positive");
  }
  if (cv_mode != CvMode::None && cv_pilot < 2) {
    throw std::invalid_argument("cv_pilot must be >= 2");
  }
  if (ridge < 0.0) {
    throw std::invalid_argument("ridge must be non-negative");
  }
  if (monitor_stride > 0 && monitor_samples < 2) {
    throw std::invalid_argument("monitor_samples must be >= 2");
  }
  if (init.kind == InitialCoefficients::Kind::Gaussian && init.std_dev < 0.0) {
    throw std::invalid_argument("init std must be non-negative");
  }
}

PreconditionResult precondition_solve(const HessianBlockSample &blocks,
                                      const CoefficientVector &gradient,
                                      double ridge) {
  if (blocks.blocks.size() != gradient.chaos_size()) {
    throw std::invalid_argument("block count does not match the gradient");
  }
  PreconditionResult result{gradient, 0, std::nullopt};
  const std::size_t M = gradient.spatial_size();
  for (std::size_t j = 0; j < blocks.blocks.size(); ++j) {
    SymTridiagonal block = blocks.blocks[j];
    if (block.size() != M) {
      throw std::invalid_argument("block size does not match the gradient");
    }
    if (ridge > 0.0) {
      const double shift = ridge * block.trace() / static_cast<double>(M);
      for (double &d : block.diagonal) {
        d += shift;
      }
    }
    const TridiagonalCholesky factor(block);
    if (!factor.ok()) {
      ++result.fallbacks;
      if (!result.first_fallback_block) {
        result.first_fallback_block = j;
      }
      continue; // identity scaling: step block = gradient block
    }
    factor.solve_in_place(result.step.block(j));
  }
  return result;
}

GermSampler monitor_sampler(std::size_t dimension, std::uint64_t seed) {
  return GermSampler(dimension, seed ^ 0x9e3779b97f4a7c15ULL);
}

CoefficientVector initial_coefficients(const Assembler &assembler,
                                       const SgdConfig &config) {
  CoefficientVector c = assembler.zero_coefficients();
  if (config.init.kind == InitialCoefficients::Kind::Gaussian &&
      config.init.std_dev > 0.0) {
    const GermSampler sampler(c.size(), config.seed);
    const auto draw = sampler.sample(0, 0, Purpose::Initialization);
    for (std::size_t k = 0; k < c.size(); ++k) {
      c.data()[k] = config.init.std_dev * draw[k];
    }
  }
  return c;
}

namespace {

HessianStage stage_at(const SgdConfig &config, std::size_t n) {
  switch (config.hessian_mode) {
  case HessianMode::Full: return HessianStage::Full;
  case HessianMode::Staged:
    return n > config.switch_iteration ? HessianStage::Full
                                       : HessianStage::LinearOnly;
  default: return HessianStage::LinearOnly;
  }
}

std::string describe_failure(const char *what, std::size_t n,
                             std::uint64_t seed,
                             std::optional<std::size_t> block) {
  std::ostringstream os;
  os << what << " at iteration " << n << " (seed " << seed
     << ", gradient germs iteration " << n << " purpose gradient";
  if (block) {
    os << ", chaos block " << *block;
  }
  os << ")";
  return os.str();
}

} // namespace

SgdResult run(const Assembler &assembler, const SgdConfig &config) {
  config.validate();
  const std::size_t K = assembler.basis().germ_dimension();
  const GermSampler sampler(K, config.seed);
  // Monitoring uses one fixed germ set for every record so that successive
  // estimates share random numbers.
  const GermSampler monitor = monitor_sampler(K, config.seed);

  SgdResult result{{}, initial_coefficients(assembler, config)};
  CoefficientVector &c = result.coefficients;

  ControlVariateState cv;
  CoefficientVector cv_means;
  auto refresh_cv = [&](std::size_t n) {
    cv = estimate_cv_lambda(assembler, c, config.cv_mode, config.cv_pilot,
                            sampler, n);
  };
  if (config.cv_mode != CvMode::None) {
    refresh_cv(0);
  }

  std::vector<GradientSample> gradients(config.batch_gradient);
  std::vector<HessianBlockSample> hessians(
      config.hessian_mode == HessianMode::None ? 0 : config.batch_hessian);
  std::vector<double> germ;

  for (std::size_t n = 1; n <= config.iterations; ++n) {
    if (config.cv_mode != CvMode::None) {
      if (config.cv_refresh > 0 && n > 1 && (n - 1) % config.cv_refresh == 0) {
        refresh_cv(n);
      }
      cv_means = assembler.surrogate_means(c, config.cv_mode);
    }

    GradientSample gradient;
    HessianBlockSample hessian;
    try {
      for (std::size_t s = 0; s < gradients.size(); ++s) {
        sampler.sample_into(n, s, Purpose::Gradient, germ);
        gradients[s] = config.cv_mode == CvMode::None
                           ? assembler.gradient(c, germ)
                           : assembler.cv_gradient(c, germ, cv, cv_means);
      }
      gradient = minibatch_average(gradients);
      const HessianStage stage = stage_at(config, n);
      for (std::size_t s = 0; s < hessians.size(); ++s) {
        sampler.sample_into(n, s, Purpose::Hessian, germ);
        hessians[s] = assembler.hessian_blocks(c, germ, stage);
      }
    } catch (const NonFiniteError &e) {
      throw DivergenceError(
          describe_failure(e.what(), n, config.seed, std::nullopt), n,
          config.seed, std::nullopt, std::move(result.trajectory));
    }

    CoefficientVector step;
    if (hessians.empty()) {
      step = gradient.values;
    } else {
      hessian = minibatch_average(hessians);
      auto solved = precondition_solve(hessian, gradient.values, config.ridge);
      result.trajectory.fallback_count += solved.fallbacks;
      step = std::move(solved.step);
    }

    const double eta = config.schedule.rate(n);
    auto &values = c.data();
    const auto &delta = step.data();
    for (std::size_t k = 0; k < values.size(); ++k) {
      values[k] -= eta * delta[k];
    }
    const double norm = c.norm();
    if (!std::isfinite(norm) || norm > config.divergence_norm) {
      std::optional<std::size_t> block;
      for (std::size_t j = 0; j < c.chaos_size() && !block; ++j) {
        for (double v : c.block(j)) {
          if (!std::isfinite(v) || std::abs(v) > config.divergence_norm) {
            block = j;
            break;
          }
        }
      }
      throw DivergenceError(
          describe_failure("coefficients diverged", n, config.seed, block), n,
          config.seed, block, std::move(result.trajectory));
    }

    const bool monitor_now =
        config.monitor_stride > 0 && n % config.monitor_stride == 0;
    const bool snapshot_now =
        config.snapshot_stride > 0 && n % config.snapshot_stride == 0;
    if (monitor_now || snapshot_now) {
      TrajectoryRecord record;
      record.iteration = n;
      record.learning_rate = eta;
      record.gradient_norm = gradient.values.norm();
      record.coefficient_norm = norm;
      record.fallback_count = result.trajectory.fallback_count;
      if (monitor_now) {
        record.energy = estimate_energy(assembler, c, config.monitor_samples,
                                        monitor, Purpose::Monitor, 0);
      }
      if (snapshot_now) {
        record.snapshot = c;
      }
      result.trajectory.records.push_back(std::move(record));
    }
  }
  return result;
}

SgdResult run(const ProblemInstance &problem, const Mesh1D &mesh,
              const PcBasisSet &basis, const SgdConfig &config) {
  return run(Assembler(problem, mesh, basis), config);
}

SgdResult first_order_run(const Assembler &assembler, SgdConfig config) {
  config.hessian_mode = HessianMode::None;
  return run(assembler, config);
}

SgdResult first_order_run(const ProblemInstance &problem, const Mesh1D &mesh,
                          const PcBasisSet &basis, const SgdConfig &config) {
  return first_order_run(Assembler(problem, mesh, basis), config);
}

RateFit fit_convergence_rate(const Trajectory &trajectory, double reference,
                             double n_first, double n_last) {
  std::vector<double> n, value;
  for (const auto &r : trajectory.records) {
    if (r.energy) {
      n.push_back(static_cast<double>(r.iteration));
      value.push_back(r.energy->mean);
    }
  }
  return fit_convergence_rate(n, value, reference, n_first, n_last);
}

} // namespace sgdpce
