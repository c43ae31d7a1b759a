#include "sgdpce/pc_basis.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sgdpce {

namespace {

double factorial(unsigned n) {
  double out = 1.0;
  for (unsigned i = 2; i <= n; ++i) {
    out *= i;
  }
  return out;
}

// Appends all K-part compositions of `remaining` in descending
// lexicographic order.
void compositions(std::size_t position, unsigned remaining,
                  std::vector<unsigned> &current,
                  std::vector<MultiIndex> &out) {
  if (position + 1 == current.size()) {
    current[position] = remaining;
    out.push_back(MultiIndex{current});
    return;
  }
  for (unsigned d = remaining + 1; d-- > 0;) {
    current[position] = d;
    compositions(position + 1, remaining - d, current, out);
  }
  current[position] = 0;
}

} // namespace

unsigned MultiIndex::total_degree() const {
  return std::accumulate(degrees.begin(), degrees.end(), 0u);
}

double hermite(unsigned n, double y) {
  if (n == 0) {
    return 1.0;
  }
  double previous = 1.0;
  double current = y;
  for (unsigned k = 1; k < n; ++k) {
    const double next = y * current - static_cast<double>(k) * previous;
    previous = current;
    current = next;
  }
  return current;
}

std::size_t basis_size(std::size_t germ_dimension, unsigned max_degree) {
  // C(p+K, K) built as C(p+i, i) for i = 1..K; each partial is exact.
  std::size_t count = 1;
  for (std::size_t i = 1; i <= germ_dimension; ++i) {
    std::size_t product = 0;
    if (__builtin_mul_overflow(count, max_degree + i, &product)) {
      throw std::overflow_error("polynomial chaos basis size overflows (K=" +
                                std::to_string(germ_dimension) +
                                ", p=" + std::to_string(max_degree) + ")");
    }
    count = product / i;
  }
  return count;
}

PcBasisSet::PcBasisSet(std::size_t germ_dimension, unsigned max_degree,
                       std::vector<MultiIndex> indices)
    : germ_dimension_(germ_dimension), max_degree_(max_degree),
      indices_(std::move(indices)) {
  norms_.reserve(indices_.size());
  for (std::size_t j = 0; j < indices_.size(); ++j) {
    double norm = 1.0;
    for (unsigned d : indices_[j].degrees) {
      norm *= factorial(d);
    }
    norms_.push_back(norm);
    lookup_.emplace(indices_[j], j);
  }
}

PcBasisSet PcBasisSet::generate(std::size_t germ_dimension,
                                unsigned max_degree) {
  if (germ_dimension == 0) {
    throw std::invalid_argument("germ dimension must be at least 1");
  }
  const std::size_t expected = basis_size(germ_dimension, max_degree);
  std::vector<MultiIndex> indices;
  indices.reserve(expected);
  std::vector<unsigned> current(germ_dimension, 0);
  for (unsigned grade = 0; grade <= max_degree; ++grade) {
    compositions(0, grade, current, indices);
  }
  return PcBasisSet(germ_dimension, max_degree, std::move(indices));
}

std::optional<std::size_t> PcBasisSet::find(const MultiIndex &alpha) const {
  const auto it = lookup_.find(alpha);
  if (it == lookup_.end()) {
    return std::nullopt;
  }
  return it->second;
}

void PcBasisSet::eval_all(std::span<const double> y,
                          std::span<double> out) const {
  if (y.size() != germ_dimension_ || out.size() != indices_.size()) {
    throw std::invalid_argument("eval_all: dimension mismatch");
  }
  // Univariate table He_n(y_k), n = 0..p, laid out k-major.
  const std::size_t stride = max_degree_ + 1;
  thread_local std::vector<double> table;
  table.resize(germ_dimension_ * stride);
  for (std::size_t k = 0; k < germ_dimension_; ++k) {
    double *row = table.data() + k * stride;
    row[0] = 1.0;
    if (max_degree_ >= 1) {
      row[1] = y[k];
    }
    for (unsigned n = 1; n < max_degree_; ++n) {
      row[n + 1] = y[k] * row[n] - static_cast<double>(n) * row[n - 1];
    }
  }
  for (std::size_t j = 0; j < indices_.size(); ++j) {
    double value = 1.0;
    const auto &degrees = indices_[j].degrees;
    for (std::size_t k = 0; k < germ_dimension_; ++k) {
      if (degrees[k] != 0) {
        value *= table[k * stride + degrees[k]];
      }
    }
    out[j] = value;
  }
}

std::vector<double> PcBasisSet::eval_all(std::span<const double> y) const {
  std::vector<double> out(indices_.size());
  eval_all(y, out);
  return out;
}

double pair_moment(const PcBasisSet &basis, std::size_t a, std::size_t b) {
  return a == b ? basis.norm_squared(a) : 0.0;
}

double linear_weighted_moment(const PcBasisSet &basis, std::size_t k,
                              std::size_t a, std::size_t b) {
  if (k >= basis.germ_dimension()) {
    throw std::out_of_range("germ component out of range");
  }
  const auto &alpha = basis.index(a).degrees;
  const auto &gamma = basis.index(b).degrees;
  double value = 1.0;
  for (std::size_t m = 0; m < alpha.size(); ++m) {
    if (m == k) {
      const unsigned hi = std::max(alpha[m], gamma[m]);
      const unsigned lo = std::min(alpha[m], gamma[m]);
      if (hi != lo + 1) {
        return 0.0;
      }
      // E[y He_n He_{n+1}] = (n+1)!
      value *= factorial(hi);
    } else {
      if (alpha[m] != gamma[m]) {
        return 0.0;
      }
      value *= factorial(alpha[m]);
    }
  }
  return value;
}

MomentTable::MomentTable(const PcBasisSet &basis) {
  const std::size_t size = basis.size();
  pair_diagonal_.resize(size);
  for (std::size_t a = 0; a < size; ++a) {
    pair_diagonal_[a] = basis.norm_squared(a);
  }
  neighbours_.assign(basis.germ_dimension(),
                     std::vector<std::vector<Entry>>(size));
  for (std::size_t k = 0; k < basis.germ_dimension(); ++k) {
    for (std::size_t a = 0; a < size; ++a) {
      MultiIndex shifted = basis.index(a);
      // Only b = a +/- e_k can be non-zero.
      for (int direction : {-1, +1}) {
        MultiIndex candidate = shifted;
        if (direction < 0 && candidate.degrees[k] == 0) {
          continue;
        }
        candidate.degrees[k] += direction;
        if (const auto b = basis.find(candidate)) {
          neighbours_[k][a].push_back(
              Entry{*b, linear_weighted_moment(basis, k, a, *b)});
        }
      }
    }
  }
}

double MomentTable::linear(std::size_t k, std::size_t a, std::size_t b) const {
  for (const auto &entry : linear_row(k, a)) {
    if (entry.b == b) {
      return entry.value;
    }
  }
  return 0.0;
}

} // namespace sgdpce
