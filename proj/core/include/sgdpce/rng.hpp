#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace sgdpce {

/// Philox4x32-10 counter-based generator.
///
/// Pure function of (counter, key): there is no hidden state, so any
/// sample can be regenerated independently of the order in which the
/// others were drawn.
class Philox4x32 {
public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter counter, Key key);
};

/// Independent stream families. Each tag selects a disjoint slice of the
/// counter space, so e.g. gradient and Hessian mini-batches of the same
/// iteration never share germs.
enum class Purpose : std::uint32_t {
  Gradient = 1,
  Hessian = 2,
  Monitor = 3,
  Pilot = 4,
  Evaluation = 5,
  Initialization = 6,
  Experiment = 7,
};

std::string_view to_string(Purpose purpose);

/// Draws standard-normal germ vectors keyed by
/// (seed, iteration, sample index, purpose).
class GermSampler {
public:
  GermSampler(std::size_t dimension, std::uint64_t seed);

  std::size_t dimension() const { return dimension_; }
  std::uint64_t seed() const { return seed_; }

  std::vector<double> sample(std::uint64_t iteration, std::uint64_t index,
                             Purpose purpose) const;
  void sample_into(std::uint64_t iteration, std::uint64_t index,
                   Purpose purpose, std::vector<double> &out) const;

  /// Uniform variate in (0, 1) from the same counter space; used for
  /// tests and for Gaussian initialization.
  double uniform(std::uint64_t iteration, std::uint64_t index,
                 Purpose purpose, std::uint32_t slot = 0) const;

private:
  std::size_t dimension_;
  std::uint64_t seed_;
};

} // namespace sgdpce
