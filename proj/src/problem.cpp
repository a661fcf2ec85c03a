#include "fode/problem.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace fode {

ProblemJacobian ProblemJacobian::zeros(HeadLayout layout, Index dim, Index num_integrals, Bandwidth band) {
  ProblemJacobian jac;
  jac.layout = layout;
  if (layout == HeadLayout::dense) {
    jac.df_dy = Eigen::MatrixXd::Zero(dim, dim);
    jac.df_di = Eigen::MatrixXd::Zero(dim, num_integrals);
    jac.dg_dy = Eigen::MatrixXd::Zero(num_integrals, dim);
  } else {
    jac.df_dy_band = BandMatrix<double>(dim, band.lower, band.upper);
    jac.df_di_diag = Eigen::VectorXd::Zero(dim);
    jac.dg_dy_band = BandMatrix<double>(dim, band.lower, band.upper);
  }
  return jac;
}

Eigen::MatrixXd ProblemJacobian::head_dense() const {
  return layout == HeadLayout::dense ? df_dy : df_dy_band.toDense();
}

Eigen::VectorXd ProblemJacobian::coupling_column(Index j) const {
  if (layout == HeadLayout::dense) return df_di.col(j);
  Eigen::VectorXd col = Eigen::VectorXd::Zero(df_di_diag.size());
  col(j) = df_di_diag(j);
  return col;
}

Eigen::RowVectorXd ProblemJacobian::coupling_row(Index j) const {
  if (layout == HeadLayout::dense) return dg_dy.row(j);
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(dg_dy_band.cols());
  for (Index c = dg_dy_band.row_begin(j); c < dg_dy_band.row_end(j); ++c) row(c) = dg_dy_band.coeff(j, c);
  return row;
}

namespace {

bool is_integer(double x) { return x == std::floor(x); }

Eigen::VectorXd taylor_polynomial(double t, const Eigen::VectorXd& y0, const std::vector<Eigen::VectorXd>& derivs) {
  Eigen::VectorXd out = y0;
  double coef = 1.0;
  for (std::size_t k = 0; k < derivs.size(); ++k) {
    coef *= t / static_cast<double>(k + 1);
    out += coef * derivs[k];
  }
  return out;
}

void check_derivs(const std::vector<Eigen::VectorXd>& derivs0, std::size_t expected, Index dim) {
  if (derivs0.size() != expected) {
    std::ostringstream msg;
    msg << "expected " << expected << " initial derivative vectors, got " << derivs0.size();
    throw std::invalid_argument(msg.str());
  }
  for (const auto& v : derivs0) {
    if (v.size() != dim) throw std::invalid_argument("initial derivative vector has wrong length");
  }
}

FractionalIVP volt1_impl(double alpha, OdeFunction f, OdeJacobian df_dy, const Eigen::VectorXd& y0,
                         std::vector<Eigen::VectorXd> derivs0) {
  const Index d = y0.size();
  FractionalIVP p;
  p.dim = d;
  p.mass = Eigen::VectorXd::Zero(d);
  p.integrals.assign(static_cast<std::size_t>(d), IntegralTerm{alpha});
  p.y0 = y0;
  p.layout = HeadLayout::dense;

  p.f = [y0, derivs0 = std::move(derivs0)](double t, const Eigen::VectorXd& y, const Eigen::VectorXd& integrals,
                                          Eigen::Ref<Eigen::VectorXd> out) {
    out = taylor_polynomial(t, y0, derivs0) + integrals - y;
  };
  p.g = [f](double t, const Eigen::VectorXd& y, Eigen::Ref<Eigen::VectorXd> out) { f(t, y, out); };
  p.jacobian = [df_dy](double t, const Eigen::VectorXd& y, const Eigen::VectorXd&, ProblemJacobian& jac) {
    jac.df_dy.setIdentity();
    jac.df_dy *= -1.0;
    jac.df_di.setIdentity();
    df_dy(t, y, jac.dg_dy);
  };
  return p;
}

}  // namespace

FractionalIVP from_caputo_volt1(double alpha, OdeFunction f, OdeJacobian df_dy, const Eigen::VectorXd& y0) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("from_caputo_volt1: alpha must lie in (0,1) without initial derivatives");
  }
  return volt1_impl(alpha, std::move(f), std::move(df_dy), y0, {});
}

FractionalIVP from_caputo_volt1(double alpha, OdeFunction f, OdeJacobian df_dy, const Eigen::VectorXd& y0,
                                const std::vector<Eigen::VectorXd>& derivs0) {
  if (!(alpha > 0.0) || is_integer(alpha)) {
    throw std::invalid_argument("from_caputo_volt1: alpha must be a positive non-integer");
  }
  const auto m = static_cast<std::size_t>(std::ceil(alpha));
  check_derivs(derivs0, m - 1, y0.size());
  return volt1_impl(alpha, std::move(f), std::move(df_dy), y0, derivs0);
}

FractionalIVP from_caputo_volt2(double alpha, OdeFunction f, OdeJacobian df_dy, const Eigen::VectorXd& y0,
                                const std::vector<Eigen::VectorXd>& derivs0) {
  if (!(alpha > 1.0) || is_integer(alpha)) {
    throw std::invalid_argument("from_caputo_volt2: alpha must be a non-integer > 1");
  }
  const Index d = y0.size();
  const auto m = static_cast<Index>(std::ceil(alpha));
  check_derivs(derivs0, static_cast<std::size_t>(m - 1), d);

  const Index blocks = m - 1;
  FractionalIVP p;
  p.dim = d * blocks;
  p.mass = Eigen::VectorXd::Ones(p.dim);
  p.integrals.assign(static_cast<std::size_t>(d), IntegralTerm{alpha - static_cast<double>(m) + 1.0});
  p.y0.resize(p.dim);
  p.y0.head(d) = y0;
  for (Index b = 1; b < blocks; ++b) p.y0.segment(b * d, d) = derivs0[static_cast<std::size_t>(b - 1)];
  p.layout = HeadLayout::dense;

  const Eigen::VectorXd top = derivs0.back();
  p.f = [d, blocks, top](double, const Eigen::VectorXd& y, const Eigen::VectorXd& integrals,
                         Eigen::Ref<Eigen::VectorXd> out) {
    for (Index b = 0; b + 1 < blocks; ++b) out.segment(b * d, d) = y.segment((b + 1) * d, d);
    out.segment((blocks - 1) * d, d) = top + integrals;
  };
  p.g = [f, d](double t, const Eigen::VectorXd& y, Eigen::Ref<Eigen::VectorXd> out) {
    const Eigen::VectorXd head = y.head(d);
    f(t, head, out);
  };
  p.jacobian = [df_dy, d, blocks](double t, const Eigen::VectorXd& y, const Eigen::VectorXd&,
                                  ProblemJacobian& jac) {
    jac.df_dy.setZero();
    for (Index b = 0; b + 1 < blocks; ++b) jac.df_dy.block(b * d, (b + 1) * d, d, d).setIdentity();
    jac.df_di.setZero();
    jac.df_di.bottomRows(d).setIdentity();
    jac.dg_dy.setZero();
    const Eigen::VectorXd head = y.head(d);
    Eigen::MatrixXd block(d, d);
    df_dy(t, head, block);
    jac.dg_dy.leftCols(d) = block;
  };
  return p;
}

FractionalIVP attach_integral_output(const FractionalIVP& p, Index j) {
  if (j < 0 || j >= p.num_integrals()) {
    throw std::out_of_range("attach_integral_output: integral index " + std::to_string(j) + " out of range");
  }
  if (p.layout != HeadLayout::dense) {
    throw std::invalid_argument("attach_integral_output: only dense layouts can be extended");
  }
  const Index d = p.dim;
  const Index di = p.num_integrals();

  FractionalIVP q;
  q.dim = d + 1;
  q.mass.resize(d + 1);
  q.mass << p.mass, 0.0;
  q.integrals = p.integrals;
  q.y0.resize(d + 1);
  q.y0 << p.y0, 0.0;
  q.t_end = p.t_end;
  q.layout = HeadLayout::dense;

  auto f = p.f;
  q.f = [f, d, j](double t, const Eigen::VectorXd& y, const Eigen::VectorXd& integrals,
                  Eigen::Ref<Eigen::VectorXd> out) {
    const Eigen::VectorXd base = y.head(d);
    Eigen::VectorXd replaced = integrals;
    replaced(j) = y(d);
    f(t, base, replaced, out.head(d));
    out(d) = integrals(j) - y(d);
  };
  auto g = p.g;
  q.g = [g, d](double t, const Eigen::VectorXd& y, Eigen::Ref<Eigen::VectorXd> out) {
    const Eigen::VectorXd base = y.head(d);
    g(t, base, out);
  };
  auto inner_jac = p.jacobian;
  q.jacobian = [inner_jac, d, di, j](double t, const Eigen::VectorXd& y, const Eigen::VectorXd& integrals,
                                     ProblemJacobian& jac) {
    const Eigen::VectorXd base = y.head(d);
    Eigen::VectorXd replaced = integrals;
    replaced(j) = y(d);
    ProblemJacobian inner = ProblemJacobian::zeros(HeadLayout::dense, d, di);
    inner_jac(t, base, replaced, inner);

    jac.df_dy.setZero();
    jac.df_dy.topLeftCorner(d, d) = inner.df_dy;
    jac.df_dy.block(0, d, d, 1) = inner.df_di.col(j);
    jac.df_dy(d, d) = -1.0;

    jac.df_di.setZero();
    jac.df_di.topRows(d) = inner.df_di;
    jac.df_di.block(0, j, d, 1).setZero();
    jac.df_di(d, j) = 1.0;

    jac.dg_dy.setZero();
    jac.dg_dy.leftCols(d) = inner.dg_dy;
  };
  return q;
}

InconsistentInitialValues::InconsistentInitialValues(Index row, double residual)
    : std::runtime_error("inconsistent initial values: algebraic row " + std::to_string(row) + " has residual " +
                         std::to_string(residual)),
      row_(row),
      residual_(residual) {}

Eigen::VectorXd evaluate_rhs(const FractionalIVP& p, double t, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& integrals) {
  Eigen::VectorXd out(p.dim);
  p.f(t, y, integrals, out);
  return out;
}

Eigen::VectorXd evaluate_integrands(const FractionalIVP& p, double t, const Eigen::VectorXd& y) {
  Eigen::VectorXd out(p.num_integrals());
  p.g(t, y, out);
  return out;
}

void check_consistency(const FractionalIVP& p, double tol) {
  const Eigen::VectorXd residual = evaluate_rhs(p, 0.0, p.y0, Eigen::VectorXd::Zero(p.num_integrals()));
  for (Index i = 0; i < p.dim; ++i) {
    if (p.mass(i) == 0.0 && !(std::abs(residual(i)) <= tol)) {
      throw InconsistentInitialValues(i, residual(i));
    }
  }
}

void validate(const FractionalIVP& p) {
  if (p.dim < 1) throw std::invalid_argument("problem dimension must be at least 1");
  if (p.mass.size() != p.dim) throw std::invalid_argument("mass diagonal has wrong length");
  if (p.y0.size() != p.dim) throw std::invalid_argument("initial value has wrong length");
  if (!p.f) throw std::invalid_argument("problem has no right-hand side");
  if (!p.jacobian) throw std::invalid_argument("problem has no Jacobian callback");
  if (p.num_integrals() > 0 && !p.g) throw std::invalid_argument("problem has integrals but no integrand");
  for (const auto& term : p.integrals) {
    if (!(term.alpha > 0.0)) throw std::invalid_argument("integral orders must be positive");
  }
  if (p.layout == HeadLayout::banded) {
    if (p.num_integrals() != 0 && p.num_integrals() != p.dim) {
      throw std::invalid_argument("banded layout requires one integral per component");
    }
    if (p.band.lower < 0 || p.band.upper < 0) throw std::invalid_argument("negative bandwidth");
  }
}

}  // namespace fode
