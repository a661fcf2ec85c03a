#pragma once

#include "fode/band_matrix.hpp"

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fode {

/// Storage pattern of the problem Jacobians.
///
/// `banded` is the structure in which M and dF/dI are diagonal (so d_I = d)
/// while dF/dy and dG/dy are band matrices of common bandwidths.
enum class HeadLayout { dense, banded };

struct Bandwidth {
  Index lower = 0;
  Index upper = 0;
};

/// Partial derivatives of F(t, y, I) and G(t, y) at one point.
///
/// Dense layout uses df_dy (d x d), df_di (d x d_I) and dg_dy (d_I x d).
/// Banded layout uses df_dy_band, df_di_diag and dg_dy_band instead.
struct ProblemJacobian {
  HeadLayout layout = HeadLayout::dense;

  Eigen::MatrixXd df_dy;
  Eigen::MatrixXd df_di;
  Eigen::MatrixXd dg_dy;

  BandMatrix<double> df_dy_band;
  Eigen::VectorXd df_di_diag;
  BandMatrix<double> dg_dy_band;

  /// Zero-initialised storage for a problem of the given shape.
  static ProblemJacobian zeros(HeadLayout layout, Index dim, Index num_integrals, Bandwidth band = {});

  /// dF/dy as a dense matrix, whatever the layout.
  Eigen::MatrixXd head_dense() const;
  /// Column j of dF/dI, dense.
  Eigen::VectorXd coupling_column(Index j) const;
  /// Row j of dG/dy, dense.
  Eigen::RowVectorXd coupling_row(Index j) const;
};

/// One fractional integral I_j(t) = J^alpha_j G_j(t, y)(t). The integrands
/// themselves are supplied jointly by FractionalIVP::g as a vector of
/// length d_I, one scalar per term.
struct IntegralTerm {
  double alpha = 0.5;
};

using RhsFunction = std::function<void(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& integrals,
                                       Eigen::Ref<Eigen::VectorXd> out)>;
using IntegrandFunction =
    std::function<void(double t, const Eigen::VectorXd& y, Eigen::Ref<Eigen::VectorXd> out)>;
using JacobianFunction = std::function<void(double t, const Eigen::VectorXd& y,
                                            const Eigen::VectorXd& integrals, ProblemJacobian& jac)>;

/// M y' = F(t, y, I(y)), y(0) = y0, with I_j = J^alpha_j G_j(., y(.)).
///
/// A zero entry of the diagonal mass makes the corresponding row algebraic.
/// Callbacks must be pure functions of their arguments.
struct FractionalIVP {
  Index dim = 0;
  Eigen::VectorXd mass;
  std::vector<IntegralTerm> integrals;
  Eigen::VectorXd y0;
  double t_end = 1.0;

  HeadLayout layout = HeadLayout::dense;
  Bandwidth band;

  RhsFunction f;
  IntegrandFunction g;
  JacobianFunction jacobian;

  Index num_integrals() const { return static_cast<Index>(integrals.size()); }
  bool is_dae() const { return (mass.array() == 0.0).any(); }

  ProblemJacobian jacobian_storage() const {
    return ProblemJacobian::zeros(layout, dim, num_integrals(), band);
  }
};

/// Plain ODE right-hand side f(t, y) and its Jacobian, the input of the
/// Caputo builders.
using OdeFunction = std::function<void(double t, const Eigen::VectorXd& y, Eigen::Ref<Eigen::VectorXd> out)>;
using OdeJacobian = std::function<void(double t, const Eigen::VectorXd& y, Eigen::Ref<Eigen::MatrixXd> out)>;

/// Caputo problem D^alpha y = f(t, y), 0 < alpha < 1, as the algebraic
/// system 0 = y0 + I(t) - y(t) with one integral of order alpha per component.
FractionalIVP from_caputo_volt1(double alpha, OdeFunction f, OdeJacobian df_dy, const Eigen::VectorXd& y0);

/// Same integral form for non-integer alpha > 1: the Taylor polynomial
/// y0 + t y'(0) + ... built from `derivs0` (y^(k)(0), k = 1..m-1) enters F,
/// and the integral of order alpha is later split by the augmentation.
FractionalIVP from_caputo_volt1(double alpha, OdeFunction f, OdeJacobian df_dy, const Eigen::VectorXd& y0,
                                const std::vector<Eigen::VectorXd>& derivs0);

/// Caputo problem of non-integer order alpha > 1 as the integro-differential
/// system y^(m-1) = y_(m-1) + J^(alpha-m+1) f, written first order with the
/// chained states (y, y', ..., y^(m-2)). Identity mass.
FractionalIVP from_caputo_volt2(double alpha, OdeFunction f, OdeJacobian df_dy, const Eigen::VectorXd& y0,
                                const std::vector<Eigen::VectorXd>& derivs0);

/// Adds y_(d+1) = I_j as an algebraic variable: I_j is replaced by y_(d+1)
/// in F, and the row 0 = I_j - y_(d+1) is appended. Dense layout only.
FractionalIVP attach_integral_output(const FractionalIVP& p, Index j);

class InconsistentInitialValues : public std::runtime_error {
 public:
  InconsistentInitialValues(Index row, double residual);
  Index row() const { return row_; }
  double residual() const { return residual_; }

 private:
  Index row_;
  double residual_;
};

/// Algebraic rows of F(0, y0, 0) must vanish up to `tol`.
void check_consistency(const FractionalIVP& p, double tol);

/// Evaluates F at (t, y, I); convenience for tests and diagnostics.
Eigen::VectorXd evaluate_rhs(const FractionalIVP& p, double t, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& integrals);
Eigen::VectorXd evaluate_integrands(const FractionalIVP& p, double t, const Eigen::VectorXd& y);

/// Throws std::invalid_argument if sizes and layout fields disagree.
void validate(const FractionalIVP& p);

}  // namespace fode
