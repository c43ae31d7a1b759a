#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgdpce/fem1d.hpp"
#include "sgdpce/pc_basis.hpp"
#include "sgdpce/problem.hpp"
#include "sgdpce/rng.hpp"
#include "sgdpce/tridiagonal.hpp"

namespace sgdpce {

/// Coefficients c_{i,j} of u_c(x, y) = sum_{i,j} c_{i,j} phi_i(x) Psi_j(y),
/// stored j-major: c = [c_{1,0} .. c_{M,0}, ..., c_{1,N} .. c_{M,N}].
/// Indices here are 0-based: spatial i in [0, M), chaos j in [0, N].
class CoefficientVector {
public:
  CoefficientVector() = default;
  CoefficientVector(std::size_t spatial_size, std::size_t chaos_size)
      : spatial_(spatial_size), chaos_(chaos_size),
        data_(spatial_size * chaos_size, 0.0) {}

  std::size_t spatial_size() const { return spatial_; }
  std::size_t chaos_size() const { return chaos_; }
  std::size_t size() const { return data_.size(); }

  double &operator()(std::size_t i, std::size_t j) { return data_[j * spatial_ + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[j * spatial_ + i]; }

  std::span<double> block(std::size_t j) {
    return {data_.data() + j * spatial_, spatial_};
  }
  std::span<const double> block(std::size_t j) const {
    return {data_.data() + j * spatial_, spatial_};
  }

  std::vector<double> &data() { return data_; }
  const std::vector<double> &data() const { return data_; }

  double norm() const;

  friend bool operator==(const CoefficientVector &,
                         const CoefficientVector &) = default;

private:
  std::size_t spatial_ = 0;
  std::size_t chaos_ = 0;
  std::vector<double> data_;
};

enum class CvMode { None, Order0, Order1 };
enum class HessianStage { LinearOnly, Full };

std::string to_string(CvMode mode);
CvMode parse_cv_mode(const std::string &text);

/// Single-germ estimate g(c, y) of grad J(c).
struct GradientSample {
  CoefficientVector values;
  std::vector<double> germ;
  CvMode cv_mode = CvMode::None;
};

/// The N+1 diagonal blocks Psi_j(y)^2 (A(y) [+ B(c, y)]) of the Hessian
/// estimate h(c, y). Off-diagonal blocks are never formed.
struct HessianBlockSample {
  std::vector<SymTridiagonal> blocks;
  std::vector<double> germ;
  HessianStage stage = HessianStage::LinearOnly;
};

/// Per-component control-variate multipliers for the linear gradient part.
struct ControlVariateState {
  CvMode mode = CvMode::None;
  std::vector<double> lambda; // one per gradient component, j-major
  std::size_t pilot_size = 0;
};

class NonFiniteError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Precomputed per-problem quadrature data shared by all estimators.
///
/// Every spatial integral is evaluated with the mesh's element-wise
/// Gauss-Legendre rule. The spatial function for one germ is represented
/// by its M+2 nodal values, boundary nodes included, so Dirichlet lifting
/// enters as fixed values at nodes 0 and M+1.
class Assembler {
public:
  Assembler(const ProblemInstance &problem, const Mesh1D &mesh,
            const PcBasisSet &basis);

  const ProblemInstance &problem() const { return problem_; }
  const Mesh1D &mesh() const { return mesh_; }
  const PcBasisSet &basis() const { return basis_; }
  const MomentTable &moments() const { return moments_; }
  std::size_t spatial_size() const { return mesh_.interior_count(); }
  std::size_t chaos_size() const { return basis_.size(); }

  CoefficientVector zero_coefficients() const {
    return CoefficientVector(spatial_size(), chaos_size());
  }

  /// Germ-dependent data evaluated once per sample.
  struct GermData {
    std::vector<double> germ;
    std::vector<double> psi;   // Psi_j(y)
    std::vector<double> kappa; // kappa at each quadrature point
    std::vector<double> nodal; // u_c nodal values, M+2
  };

  void prepare(std::span<const double> y, GermData &data) const;
  /// Nodal values of the lifting plus sum_j Psi_j(y) c_{., j}.
  void nodal_values(const CoefficientVector &c, std::span<const double> psi,
                    std::span<double> nodal) const;
  void prepare(const CoefficientVector &c, std::span<const double> y,
               GermData &data) const;

  /// Interior nodal residuals: linear[i] = int kappa u' phi_i',
  /// reaction[i] = int (f(u) + s) phi_i. Either span may be empty.
  void residual(const GermData &data, std::span<double> linear,
                std::span<double> reaction) const;

  /// int kappa_tilde u' phi_i' with kappa replaced by its mean-point
  /// value (order 0) or first-order Taylor expansion (order 1).
  void surrogate_residual(const GermData &data, CvMode mode,
                          std::span<double> out) const;

  /// E[Psi_j z_i] for the surrogate residual above, in closed form.
  CoefficientVector surrogate_means(const CoefficientVector &c,
                                    CvMode mode) const;

  SymTridiagonal stiffness(const GermData &data) const;
  SymTridiagonal reaction_mass(const GermData &data) const;

  /// int 1/2 kappa |u'|^2 + F(u) + s u dx for one germ.
  double energy(const GermData &data) const;

  GradientSample gradient(const CoefficientVector &c,
                          std::span<const double> y) const;
  GradientSample cv_gradient(const CoefficientVector &c,
                             std::span<const double> y,
                             const ControlVariateState &state,
                             const CoefficientVector &surrogate_mean) const;
  HessianBlockSample hessian_blocks(const CoefficientVector &c,
                                    std::span<const double> y,
                                    HessianStage stage) const;

private:
  struct PointData {
    double x;
    double weight;
    std::size_t element;
    double local;
  };

  // Applies sum_e weight_e/h^2 (local stiffness) to nodal, interior rows.
  void apply_element_stiffness(std::span<const double> element_weights,
                               std::span<const double> nodal,
                               std::span<double> out) const;

  ProblemInstance problem_;
  Mesh1D mesh_;
  PcBasisSet basis_;
  MomentTable moments_;
  std::vector<PointData> points_;
  bool log_linear_ = false;
  std::vector<double> exponent_;       // points x K, when log-linear
  std::vector<double> mean_kappa_;     // kappa(x_q, 0)
  std::vector<double> mean_gradient_;  // points x K, d kappa / dy at 0
  std::vector<double> mean_element_;   // sum_q w kappa(x_q, 0) per element
  std::vector<double> slope_element_;  // K x elements, sum_q w dkappa/dy_k
};

GradientSample gradient_sample(const ProblemInstance &problem,
                               const Mesh1D &mesh, const PcBasisSet &basis,
                               const CoefficientVector &c,
                               std::span<const double> y);

HessianBlockSample hessian_block_sample(const ProblemInstance &problem,
                                        const Mesh1D &mesh,
                                        const PcBasisSet &basis,
                                        const CoefficientVector &c,
                                        std::span<const double> y,
                                        HessianStage stage);

/// Requires `state.lambda` from estimate_cv_lambda (or explicitly set).
GradientSample cv_gradient_sample(const ProblemInstance &problem,
                                  const Mesh1D &mesh, const PcBasisSet &basis,
                                  const CoefficientVector &c,
                                  std::span<const double> y,
                                  const ControlVariateState &state);

/// lambda* = -Cov(X, Z) / Var(Z) per component from `pilot_size` germs
/// drawn from (sampler, iteration, Purpose::Pilot).
ControlVariateState estimate_cv_lambda(const Assembler &assembler,
                                       const CoefficientVector &c, CvMode mode,
                                       std::size_t pilot_size,
                                       const GermSampler &sampler,
                                       std::uint64_t iteration = 0);
ControlVariateState estimate_cv_lambda(const ProblemInstance &problem,
                                       const Mesh1D &mesh,
                                       const PcBasisSet &basis,
                                       const CoefficientVector &c, CvMode mode,
                                       std::size_t pilot_size,
                                       std::uint64_t seed);

/// Arithmetic mean, summed in index order.
GradientSample minibatch_average(std::span<const GradientSample> samples);
HessianBlockSample minibatch_average(std::span<const HessianBlockSample> samples);

} // namespace sgdpce
