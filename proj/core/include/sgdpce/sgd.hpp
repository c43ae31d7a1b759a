#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgdpce/estimators.hpp"
#include "sgdpce/evaluation.hpp"

namespace sgdpce {

/// eta_n = numerator / (offset + n), n = 1, 2, ..., optionally capped.
struct LearningRateSchedule {
  double numerator = 5.0;
  double offset = 2.0;
  std::optional<double> clip;

  double rate(std::size_t n) const;
};

/// none: identity preconditioner (first-order SGD).
/// linear: stiffness part of the Hessian only.
/// staged: linear until `switch_iteration`, full afterwards.
/// full: stiffness plus reaction part from the first iteration.
enum class HessianMode { None, Linear, Staged, Full };

std::string to_string(HessianMode mode);
HessianMode parse_hessian_mode(const std::string &text);

struct InitialCoefficients {
  enum class Kind { Zero, Gaussian };
  Kind kind = Kind::Zero;
  double std_dev = 0.0; // for Gaussian: i.i.d. N(0, std_dev^2) entries
};

struct SgdConfig {
  std::size_t iterations = 500;
  std::size_t batch_gradient = 128;
  std::size_t batch_hessian = 64;
  LearningRateSchedule schedule;
  CvMode cv_mode = CvMode::None;
  std::size_t cv_pilot = 1000;
  std::size_t cv_refresh = 0; // re-estimate multipliers every R iterations; 0 = once
  HessianMode hessian_mode = HessianMode::Full;
  std::size_t switch_iteration = 100;
  double ridge = 1e-8;
  std::uint64_t seed = 1;
  InitialCoefficients init;
  std::size_t monitor_stride = 10;  // 0 disables monitoring
  std::size_t monitor_samples = 10000;
  std::size_t snapshot_stride = 0;  // 0 disables coefficient snapshots
  // ||c|| above this aborts the run; non-finite values always abort.
  double divergence_norm = std::numeric_limits<double>::infinity();

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
};

struct TrajectoryRecord {
  std::size_t iteration = 0;
  double learning_rate = 0.0;
  double gradient_norm = 0.0;
  double coefficient_norm = 0.0;
  std::size_t fallback_count = 0; // cumulative identity fallbacks
  std::optional<EnergyEstimate> energy;
  std::optional<CoefficientVector> snapshot;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  std::size_t fallback_count = 0;
};

struct SgdResult {
  Trajectory trajectory;
  CoefficientVector coefficients;
};

/// Raised when an update produces non-finite or exploding coefficients.
class DivergenceError : public std::runtime_error {
public:
  DivergenceError(const std::string &message, std::size_t iteration,
                  std::uint64_t seed, std::optional<std::size_t> block,
                  Trajectory partial = {})
      : std::runtime_error(message), iteration_(iteration), seed_(seed),
        block_(block),
        partial_(std::make_shared<const Trajectory>(std::move(partial))) {}

  std::size_t iteration() const { return iteration_; }
  std::uint64_t seed() const { return seed_; }
  std::optional<std::size_t> block() const { return block_; }
  /// Records written before the failure.
  const Trajectory &partial() const { return *partial_; }

private:
  std::size_t iteration_;
  std::uint64_t seed_;
  std::optional<std::size_t> block_;
  std::shared_ptr<const Trajectory> partial_;
};

struct PreconditionResult {
  CoefficientVector step;
  std::size_t fallbacks = 0;
  std::optional<std::size_t> first_fallback_block;
};

/// Solves (B_j + ridge * tr(B_j)/M * I) s_j = g_j for every chaos block j;
/// a block that is not numerically positive definite is replaced by the
/// identity.
PreconditionResult precondition_solve(const HessianBlockSample &blocks,
                                      const CoefficientVector &gradient,
                                      double ridge);

/// Germs used for trajectory energy records: one fixed set per seed,
/// disjoint from the optimization streams.
GermSampler monitor_sampler(std::size_t dimension, std::uint64_t seed);

CoefficientVector initial_coefficients(const Assembler &assembler,
                                       const SgdConfig &config);

/// Preconditioned mini-batch SGD. With HessianMode::None this is the plain
/// first-order method.
SgdResult run(const Assembler &assembler, const SgdConfig &config);
SgdResult run(const ProblemInstance &problem, const Mesh1D &mesh,
              const PcBasisSet &basis, const SgdConfig &config);

/// run() with the preconditioner forced to the identity.
SgdResult first_order_run(const Assembler &assembler, SgdConfig config);
SgdResult first_order_run(const ProblemInstance &problem, const Mesh1D &mesh,
                          const PcBasisSet &basis, const SgdConfig &config);

/// Rate fit over the monitored energies of a trajectory.
RateFit fit_convergence_rate(const Trajectory &trajectory, double reference,
                             double n_first, double n_last);

} // namespace sgdpce
