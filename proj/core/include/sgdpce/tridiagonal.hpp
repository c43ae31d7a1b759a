#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sgdpce {

/// Symmetric tridiagonal matrix. Hat-function stiffness and mass matrices
/// on a 1D mesh have exactly this pattern.
struct SymTridiagonal {
  std::vector<double> diagonal;
  std::vector<double> off_diagonal; // (k, k+1) entries, size n-1

  SymTridiagonal() = default;
  explicit SymTridiagonal(std::size_t n)
      : diagonal(n, 0.0), off_diagonal(n > 0 ? n - 1 : 0, 0.0) {}

  std::size_t size() const { return diagonal.size(); }
  double trace() const;

  void add_scaled(const SymTridiagonal &other, double factor);
  void scale(double factor);

  void multiply(std::span<const double> x, std::span<double> out) const;

  /// Row-major dense copy.
  std::vector<double> to_dense() const;

  static SymTridiagonal identity(std::size_t n);
};

/// Cholesky (L L^T) factorisation of a symmetric tridiagonal matrix.
/// `ok()` is false when a pivot is not strictly positive, i.e. the matrix
/// is not numerically positive definite.
class TridiagonalCholesky {
public:
  explicit TridiagonalCholesky(const SymTridiagonal &matrix);

  bool ok() const { return ok_; }
  std::size_t failed_pivot() const { return failed_pivot_; }

  /// Solves A x = b in place.
  void solve_in_place(std::span<double> rhs) const;

private:
  std::vector<double> diagonal_; // L(k, k)
  std::vector<double> lower_;    // L(k+1, k)
  bool ok_ = true;
  std::size_t failed_pivot_ = 0;
};

} // namespace sgdpce
