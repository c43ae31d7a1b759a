#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace sgdpce {

/// Per-germ-component polynomial degrees of one multivariate Hermite
/// polynomial Psi(y) = prod_k He_{degrees[k]}(y_k).
struct MultiIndex {
  std::vector<unsigned> degrees;

  unsigned total_degree() const;
  friend bool operator==(const MultiIndex &, const MultiIndex &) = default;
  friend auto operator<=>(const MultiIndex &, const MultiIndex &) = default;
};

/// Probabilists' Hermite polynomial He_n(y) by three-term recurrence.
double hermite(unsigned n, double y);

/// Number of multi-indices of total degree <= p in K variables,
/// (p+K)!/(p!K!). Throws std::overflow_error if it does not fit.
std::size_t basis_size(std::size_t germ_dimension, unsigned max_degree);

/// Total-degree truncated Hermite chaos basis.
///
/// Ordering is graded: ascending total degree, and inside one grade the
/// multi-indices run in descending lexicographic order, so the degree-one
/// block is (e_1, ..., e_K) and lowering p keeps a prefix of the basis.
/// Index 0 is always the constant polynomial.
class PcBasisSet {
public:
  static PcBasisSet generate(std::size_t germ_dimension, unsigned max_degree);

  std::size_t germ_dimension() const { return germ_dimension_; }
  unsigned max_degree() const { return max_degree_; }
  std::size_t size() const { return indices_.size(); }

  const MultiIndex &index(std::size_t j) const { return indices_.at(j); }
  const std::vector<MultiIndex> &indices() const { return indices_; }
  std::optional<std::size_t> find(const MultiIndex &alpha) const;

  /// out[j] = Psi_j(y). Throws std::invalid_argument on size mismatch.
  void eval_all(std::span<const double> y, std::span<double> out) const;
  std::vector<double> eval_all(std::span<const double> y) const;

  /// E[Psi_j^2] = prod_k alpha_k!.
  double norm_squared(std::size_t j) const { return norms_.at(j); }

private:
  PcBasisSet(std::size_t germ_dimension, unsigned max_degree,
             std::vector<MultiIndex> indices);

  std::size_t germ_dimension_;
  unsigned max_degree_;
  std::vector<MultiIndex> indices_;
  std::vector<double> norms_;
  std::map<MultiIndex, std::size_t> lookup_;
};

/// E[Psi_a Psi_b] for the standard normal germ.
double pair_moment(const PcBasisSet &basis, std::size_t a, std::size_t b);

/// E[Y_k Psi_a Psi_b], from Y He_n = He_{n+1} + n He_{n-1}.
double linear_weighted_moment(const PcBasisSet &basis, std::size_t k,
                              std::size_t a, std::size_t b);

/// Precomputed analytic moments. The linear moments are stored sparsely:
/// E[Y_k Psi_a Psi_b] is non-zero only when a and b differ by one degree
/// in component k.
class MomentTable {
public:
  struct Entry {
    std::size_t b;
    double value;
  };

  explicit MomentTable(const PcBasisSet &basis);

  std::size_t size() const { return pair_diagonal_.size(); }
  std::size_t germ_dimension() const { return neighbours_.size(); }

  double pair(std::size_t a, std::size_t b) const {
    return a == b ? pair_diagonal_.at(a) : 0.0;
  }
  double linear(std::size_t k, std::size_t a, std::size_t b) const;

  /// Non-zero entries b of E[Y_k Psi_a Psi_b] for fixed (k, a).
  const std::vector<Entry> &linear_row(std::size_t k, std::size_t a) const {
    return neighbours_.at(k).at(a);
  }

private:
  std::vector<double> pair_diagonal_;
  std::vector<std::vector<std::vector<Entry>>> neighbours_;
};

} // namespace sgdpce
