#include "sgdpce/rng.hpp"

#include <cmath>
#include <numbers>

namespace sgdpce {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t &lo,
                    std::uint32_t &hi) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(product);
  hi = static_cast<std::uint32_t>(product >> 32);
}

// 53-bit uniform in the open interval (0, 1).
inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits =
      ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

Philox4x32::Counter make_counter(std::uint32_t block, std::uint64_t iteration,
                                 std::uint64_t index, Purpose purpose) {
  const auto tag = static_cast<std::uint32_t>(purpose);
  return {block, static_cast<std::uint32_t>(index),
          static_cast<std::uint32_t>(iteration),
          (tag << 16) | (static_cast<std::uint32_t>(index >> 32) & 0xFFu) << 8 |
              (static_cast<std::uint32_t>(iteration >> 32) & 0xFFu)};
}

Philox4x32::Key make_key(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed),
          static_cast<std::uint32_t>(seed >> 32)};
}

} // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kPhiloxM0, ctr[0], lo0, hi0);
    mulhilo(kPhiloxM1, ctr[2], lo1, hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

std::string_view to_string(Purpose purpose) {
  switch (purpose) {
  case Purpose::Gradient: return "gradient";
  case Purpose::Hessian: return "hessian";
  case Purpose::Monitor: return "monitor";
  case Purpose::Pilot: return "pilot";
  case Purpose::Evaluation: return "evaluation";
  case Purpose::Initialization: return "initialization";
  case Purpose::Experiment: return "experiment";
  }
  return "unknown";
}

GermSampler::GermSampler(std::size_t dimension, std::uint64_t seed)
    : dimension_(dimension), seed_(seed) {}

std::vector<double> GermSampler::sample(std::uint64_t iteration,
                                        std::uint64_t index,
                                        Purpose purpose) const {
  std::vector<double> out;
  sample_into(iteration, index, purpose, out);
  return out;
}

void GermSampler::sample_into(std::uint64_t iteration, std::uint64_t index,
                              Purpose purpose,
                              std::vector<double> &out) const {
  out.resize(dimension_);
  const auto key = make_key(seed_);
  // Each Philox block yields two 53-bit uniforms -> one Box-Muller pair.
  for (std::size_t k = 0; k < dimension_; k += 2) {
    const auto bits = Philox4x32::generate(
        make_counter(static_cast<std::uint32_t>(k / 2), iteration, index,
                     purpose),
        key);
    const double u1 = to_unit(bits[0], bits[1]);
    const double u2 = to_unit(bits[2], bits[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out[k] = radius * std::cos(angle);
    if (k + 1 < dimension_) {
      out[k + 1] = radius * std::sin(angle);
    }
  }
}

double GermSampler::uniform(std::uint64_t iteration, std::uint64_t index,
                            Purpose purpose, std::uint32_t slot) const {
  // Slots live above the germ blocks so they never alias a germ draw.
  const auto bits = Philox4x32::generate(
      make_counter(0x80000000u | slot, iteration, index, purpose),
      make_key(seed_));
  return to_unit(bits[0], bits[1]);
}

} // namespace sgdpce
