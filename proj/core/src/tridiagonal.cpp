#include "sgdpce/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sgdpce {

double SymTridiagonal::trace() const {
  return std::accumulate(diagonal.begin(), diagonal.end(), 0.0);
}

void SymTridiagonal::add_scaled(const SymTridiagonal &other, double factor) {
  if (other.size() != size()) {
    throw std::invalid_argument("tridiagonal size mismatch");
  }
  for (std::size_t k = 0; k < diagonal.size(); ++k) {
    diagonal[k] += factor * other.diagonal[k];
  }
  for (std::size_t k = 0; k < off_diagonal.size(); ++k) {
    off_diagonal[k] += factor * other.off_diagonal[k];
  }
}

void SymTridiagonal::scale(double factor) {
  for (double &v : diagonal) {
    v *= factor;
  }
  for (double &v : off_diagonal) {
    v *= factor;
  }
}

void SymTridiagonal::multiply(std::span<const double> x,
                              std::span<double> out) const {
  const std::size_t n = size();
  if (x.size() != n || out.size() != n) {
    throw std::invalid_argument("tridiagonal multiply size mismatch");
  }
  for (std::size_t k = 0; k < n; ++k) {
    double v = diagonal[k] * x[k];
    if (k > 0) {
      v += off_diagonal[k - 1] * x[k - 1];
    }
    if (k + 1 < n) {
      v += off_diagonal[k] * x[k + 1];
    }
    out[k] = v;
  }
}

std::vector<double> SymTridiagonal::to_dense() const {
  const std::size_t n = size();
  std::vector<double> dense(n * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    dense[k * n + k] = diagonal[k];
    if (k + 1 < n) {
      dense[k * n + k + 1] = off_diagonal[k];
      dense[(k + 1) * n + k] = off_diagonal[k];
    }
  }
  return dense;
}

SymTridiagonal SymTridiagonal::identity(std::size_t n) {
  SymTridiagonal out(n);
  std::fill(out.diagonal.begin(), out.diagonal.end(), 1.0);
  return out;
}

TridiagonalCholesky::TridiagonalCholesky(const SymTridiagonal &matrix)
    : diagonal_(matrix.size()), lower_(matrix.off_diagonal.size()) {
  const std::size_t n = matrix.size();
  for (std::size_t k = 0; k < n; ++k) {
    double pivot = matrix.diagonal[k];
    if (k > 0) {
      pivot -= lower_[k - 1] * lower_[k - 1];
    }
    if (!(pivot > 0.0) || !std::isfinite(pivot)) {
      ok_ = false;
      failed_pivot_ = k;
      return;
    }
    diagonal_[k] = std::sqrt(pivot);
    if (k + 1 < n) {
      lower_[k] = matrix.off_diagonal[k] / diagonal_[k];
    }
  }
}

void TridiagonalCholesky::solve_in_place(std::span<double> rhs) const {
  if (!ok_) {
    throw std::logic_error("solve with a failed Cholesky factorisation");
  }
  const std::size_t n = diagonal_.size();
  if (rhs.size() != n) {
    throw std::invalid_argument("rhs size mismatch");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) {
      rhs[k] -= lower_[k - 1] * rhs[k - 1];
    }
    rhs[k] /= diagonal_[k];
  }
  for (std::size_t k = n; k-- > 0;) {
    if (k + 1 < n) {
      rhs[k] -= lower_[k] * rhs[k + 1];
    }
    rhs[k] /= diagonal_[k];
  }
}

} // namespace sgdpce
