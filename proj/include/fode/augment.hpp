#pragma once

#include "fode/problem.hpp"
#include "fode/soe_kernel.hpp"

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <vector>

namespace fode {

/// Auxiliary states of one integral term.
///
/// The block holds `chain` states per exponential, ordered exponential-major:
/// z_{i,1..m}. For a kernel of order alpha in (0,1) chain = 1; for alpha > 1
/// the kernel is split into t^(m-1) times a fractional factor of order
/// alpha - m + 1, and z_{i,m} carries the monomial weight.
struct BlockSpec {
  double alpha = 0.5;
  int chain = 1;
  Eigen::VectorXd weights;
  Eigen::VectorXd exponents;
  /// 1 for chain == 1, else 1 / ((alpha-1)(alpha-2)...(alpha-m+1)).
  double prefactor = 1.0;
  /// Index of the first state of this block in the augmented vector.
  Index offset = 0;

  Index terms() const { return weights.size(); }
  Index size() const { return chain * weights.size(); }

  /// Diagonal of the block Jacobian: -gamma_i repeated `chain` times.
  Eigen::VectorXd diagonal() const;
  /// Subdiagonal of the block Jacobian: (1, ..., m-1) per exponential, separated by zeros.
  Eigen::VectorXd subdiagonal() const;
  /// Effective weights of the states in I_j = sum c~_k Y_k: prefactor c_i on z_{i,m}, zero elsewhere.
  Eigen::VectorXd coupling_weights() const;
};

using BlockList = std::vector<BlockSpec>;

/// Jacobian of the augmented vector field in arrow form: the problem
/// derivatives (head and rank-one couplings) plus the static block data.
struct StructuredJacobian {
  ProblemJacobian couplings;
  std::shared_ptr<const BlockList> blocks;
  Index dim = 0;

  HeadLayout layout() const { return couplings.layout; }
  Index total_dim() const;
  /// Dense d x d head block dF/dy.
  Eigen::MatrixXd head_dense() const { return couplings.head_dense(); }
};

/// The stiff system  diag(mass) Y' = F(t, Y)  produced by the chain trick.
struct AugmentedSystem {
  FractionalIVP base;
  std::shared_ptr<const BlockList> blocks;
  std::map<double, SumOfExponentials> kernels;  ///< one approximation per distinct order
  Index total_dim = 0;
  Eigen::VectorXd mass;
  double eps = 0.0;
  double t_end = 0.0;

  Index dim() const { return base.dim; }
  Index num_blocks() const { return static_cast<Index>(blocks->size()); }

  /// y0 followed by zero auxiliary states.
  Eigen::VectorXd initial_state() const;
  /// Current approximations I_j = prefactor_j sum_i c_ij z_ij,m.
  Eigen::VectorXd integrals(const Eigen::VectorXd& state) const;
};

/// Builds the chain-trick system. Every integral of order alpha_j in (0,1)
/// gets a sum of exponentials with accuracy eps on [delta, t_end]; a
/// non-integer alpha_j > 1 uses the split kernel with chain length ceil(alpha_j).
AugmentedSystem augment(const FractionalIVP& p, double eps, double t_end);

/// Right-hand side of the augmented system.
void rhs(const AugmentedSystem& sys, double t, const Eigen::VectorXd& state, Eigen::Ref<Eigen::VectorXd> out);
Eigen::VectorXd rhs(const AugmentedSystem& sys, double t, const Eigen::VectorXd& state);

/// Structured Jacobian at (t, state); `out` keeps its storage between calls.
void jacobian(const AugmentedSystem& sys, double t, const Eigen::VectorXd& state, StructuredJacobian& out);
StructuredJacobian jacobian(const AugmentedSystem& sys, double t, const Eigen::VectorXd& state);

}  // namespace fode
