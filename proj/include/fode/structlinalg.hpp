#pragma once

#include "fode/augment.hpp"
#include "fode/band_matrix.hpp"

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <vector>

namespace fode {

/// How (s M - J) u = a is solved.
///
/// full_dense materializes the whole matrix (reference only), dense_head
/// eliminates the blocks and LU-factors a d x d matrix, banded_head does the
/// same with a band LU of the reduced head.
enum class LinalgMode { full_dense, dense_head, banded_head };

const char* to_string(LinalgMode mode);
LinalgMode linalg_mode_from_string(const std::string& name);

/// Largest total dimension materialize_dense accepts by default.
inline constexpr Index kDenseCap = 5000;

/// Jacobian of the augmented right-hand side as an explicit matrix.
Eigen::MatrixXd dense_jacobian(const StructuredJacobian& jac, Index cap = kDenseCap);

/// s diag(mass) - J as an explicit matrix; `mass` has the total dimension.
template <typename Scalar>
Matrix<Scalar> materialize_dense(const StructuredJacobian& jac, const Eigen::VectorXd& mass, Scalar s,
                                 Index cap = kDenseCap) {
  const Eigen::MatrixXd j = dense_jacobian(jac, cap);
  if (mass.size() != j.rows()) throw std::invalid_argument("materialize_dense: mass has wrong length");
  Matrix<Scalar> out = -j.cast<Scalar>();
  for (Index i = 0; i < mass.size(); ++i) out(i, i) += s * mass(i);
  return out;
}

/// Factorization of s M - J for an arrow-shaped Jacobian.
///
/// The tail blocks s I - J_j are diagonal (chain 1) or bidiagonal per
/// exponential (chain m). Eliminating them leaves the head matrix
/// s M - J_head - sum_j chat_j (dF/dI_j)(dG_j/dy), chat_j = c~_j^T (s I - J_j)^(-1) e_j.
template <typename Scalar>
class StructuredFactorization {
 public:
  StructuredFactorization() = default;

  StructuredFactorization(const StructuredJacobian& jac, const Eigen::VectorXd& mass, Scalar s,
                          LinalgMode mode) {
    compute(jac, mass, s, mode);
  }

  void compute(const StructuredJacobian& jac, const Eigen::VectorXd& mass, Scalar s, LinalgMode mode);

  /// Solves in place; `a` has the total dimension.
  void solveInPlace(Vector<Scalar>& a) const;

  Vector<Scalar> solve(const Vector<Scalar>& a) const {
    Vector<Scalar> u = a;
    solveInPlace(u);
    return u;
  }

  LinalgMode mode() const { return mode_; }
  Scalar shift() const { return s_; }
  Index total_dim() const { return total_; }
  /// chat_j per block (empty in full_dense mode).
  const Vector<Scalar>& chat() const { return chat_; }
  /// The reduced head matrix s M - Jhat before factorization (dense_head mode).
  const Matrix<Scalar>& reduced_head() const { return head_dense_; }
  /// The reduced head matrix in band storage (banded_head mode).
  const BandMatrix<Scalar>& reduced_head_band() const { return head_band_; }

 private:
  // Blocks of the same order share their exponentials.
  struct Kernel {
    int chain = 1;
    Eigen::VectorXd weights;  // prefactor * c_i
    Vector<Scalar> inv;       // 1 / (s + gamma_i)
    Scalar chat = Scalar(0);
  };

  struct Block {
    Index offset = 0;
    std::size_t kernel = 0;
  };

  // Returns c~^T (s I - J_j)^(-1) x_j. Chain blocks are overwritten with (s I - J_j)^(-1) x_j,
  // chain-1 blocks are left for the back-substitution.
  Scalar apply_block_inverse(const Kernel& k, Scalar* x) const;

  void check_finite_pivots(const Matrix<Scalar>& lu) const;

  LinalgMode mode_ = LinalgMode::dense_head;
  Scalar s_ = Scalar(1);
  Index dim_ = 0;
  Index total_ = 0;
  HeadLayout layout_ = HeadLayout::dense;

  std::vector<Kernel> kernels_;
  std::vector<Block> blocks_;
  Vector<Scalar> chat_;
  // Couplings, kept for the reduced right-hand side and back-substitution.
  Eigen::MatrixXd df_di_;
  Eigen::MatrixXd dg_dy_;
  Eigen::VectorXd df_di_diag_;
  BandMatrix<double> dg_dy_band_;

  Matrix<Scalar> head_dense_;
  Eigen::PartialPivLU<Matrix<Scalar>> dense_lu_;
  BandMatrix<Scalar> head_band_;
  BandLU<Scalar> band_lu_;
};

/// One-shot helpers mirroring the class interface.
template <typename Scalar>
StructuredFactorization<Scalar> factorize(const StructuredJacobian& jac, const Eigen::VectorXd& mass, Scalar s,
                                          LinalgMode mode) {
  return StructuredFactorization<Scalar>(jac, mass, s, mode);
}

template <typename Scalar>
Vector<Scalar> solve(const StructuredFactorization<Scalar>& f, const Vector<Scalar>& a) {
  return f.solve(a);
}

extern template class StructuredFactorization<double>;
extern template class StructuredFactorization<std::complex<double>>;

}  // namespace fode
