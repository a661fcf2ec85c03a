#include "fode/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fode {

Eigen::VectorXd BlockSpec::diagonal() const {
  Eigen::VectorXd out(size());
  for (Index i = 0; i < terms(); ++i) out.segment(i * chain, chain).setConstant(-exponents(i));
  return out;
}

Eigen::VectorXd BlockSpec::subdiagonal() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(std::max<Index>(size() - 1, 0));
  for (Index i = 0; i < terms(); ++i) {
    for (int k = 1; k < chain; ++k) out(i * chain + k - 1) = k;
  }
  return out;
}

Eigen::VectorXd BlockSpec::coupling_weights() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(size());
  for (Index i = 0; i < terms(); ++i) out(i * chain + chain - 1) = prefactor * weights(i);
  return out;
}

Index StructuredJacobian::total_dim() const {
  Index n = dim;
  for (const auto& b : *blocks) n += b.size();
  return n;
}

Eigen::VectorXd AugmentedSystem::initial_state() const {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(total_dim);
  y.head(dim()) = base.y0;
  return y;
}

Eigen::VectorXd AugmentedSystem::integrals(const Eigen::VectorXd& state) const {
  Eigen::VectorXd values(num_blocks());
  for (Index j = 0; j < num_blocks(); ++j) {
    const BlockSpec& b = (*blocks)[static_cast<std::size_t>(j)];
    const double* z = state.data() + b.offset + (b.chain - 1);
    double acc = 0.0;
    for (Index i = 0; i < b.terms(); ++i) acc += b.weights(i) * z[i * b.chain];
    values(j) = b.prefactor * acc;
  }
  return values;
}

AugmentedSystem augment(const FractionalIVP& p, double eps, double t_end) {
  validate(p);
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("augment: eps must lie in (0,1)");
  if (!(t_end > 0.0)) throw std::invalid_argument("augment: t_end must be positive");

  AugmentedSystem sys;
  sys.base = p;
  sys.eps = eps;
  sys.t_end = t_end;

  auto blocks = std::make_shared<BlockList>();
  Index offset = p.dim;
  for (const auto& term : p.integrals) {
    const double alpha = term.alpha;
    if (alpha >= 1.0 && alpha == std::floor(alpha)) {
      throw std::invalid_argument("augment: integer order " + std::to_string(alpha) +
                                  " has a polynomial kernel; write it as iterated ODEs");
    }
    auto it = sys.kernels.find(alpha);
    if (it == sys.kernels.end()) {
      const KernelParams params =
          alpha < 1.0 ? choose_parameters(alpha, eps, t_end) : choose_split_parameters(alpha, eps, t_end);
      it = sys.kernels.emplace(alpha, build_soe(params)).first;
    }
    const SumOfExponentials& soe = it->second;

    BlockSpec b;
    b.alpha = alpha;
    b.chain = alpha < 1.0 ? 1 : static_cast<int>(std::ceil(alpha));
    b.weights = soe.weights;
    b.exponents = soe.exponents;
    b.prefactor = 1.0;
    for (int k = 1; k < b.chain; ++k) b.prefactor /= (alpha - k);
    b.offset = offset;
    offset += b.size();
    blocks->push_back(std::move(b));
  }
  sys.blocks = std::move(blocks);
  sys.total_dim = offset;
  sys.mass = Eigen::VectorXd::Ones(offset);
  sys.mass.head(p.dim) = p.mass;
  return sys;
}

void rhs(const AugmentedSystem& sys, double t, const Eigen::VectorXd& state, Eigen::Ref<Eigen::VectorXd> out) {
  const Index d = sys.dim();
  const Eigen::VectorXd y = state.head(d);
  const Index nb = sys.num_blocks();
  Eigen::VectorXd integrals(nb);
  if (nb > 0) {
    // One pass over the auxiliary states gives both their derivatives and the integrals.
    Eigen::VectorXd g(nb);
    sys.base.g(t, y, g);
    for (Index j = 0; j < nb; ++j) {
      const BlockSpec& b = (*sys.blocks)[static_cast<std::size_t>(j)];
      const double* z = state.data() + b.offset;
      double* dz = out.data() + b.offset;
      const double* w = b.weights.data();
      const double* gam = b.exponents.data();
      const double gj = g(j);
      double acc = 0.0;
      if (b.chain == 1) {
        for (Index i = 0; i < b.terms(); ++i) {
          dz[i] = gj - gam[i] * z[i];
          acc += w[i] * z[i];
        }
      } else {
        for (Index i = 0; i < b.terms(); ++i) {
          const Index base = i * b.chain;
          dz[base] = gj - gam[i] * z[base];
          for (int k = 1; k < b.chain; ++k) dz[base + k] = k * z[base + k - 1] - gam[i] * z[base + k];
          acc += w[i] * z[base + b.chain - 1];
        }
      }
      integrals(j) = b.prefactor * acc;
    }
  }
  sys.base.f(t, y, integrals, out.head(d));
}

Eigen::VectorXd rhs(const AugmentedSystem& sys, double t, const Eigen::VectorXd& state) {
  Eigen::VectorXd out(sys.total_dim);
  rhs(sys, t, state, out);
  return out;
}

void jacobian(const AugmentedSystem& sys, double t, const Eigen::VectorXd& state, StructuredJacobian& out) {
  const Index d = sys.dim();
  if (out.blocks != sys.blocks || out.couplings.layout != sys.base.layout || out.dim != d) {
    out.couplings = sys.base.jacobian_storage();
    out.blocks = sys.blocks;
    out.dim = d;
  } else if (out.couplings.layout == HeadLayout::dense) {
    out.couplings.df_dy.setZero();
    out.couplings.df_di.setZero();
    out.couplings.dg_dy.setZero();
  } else {
    out.couplings.df_dy_band.setZero();
    out.couplings.df_di_diag.setZero();
    out.couplings.dg_dy_band.setZero();
  }
  const Eigen::VectorXd y = state.head(d);
  sys.base.jacobian(t, y, sys.integrals(state), out.couplings);
}

StructuredJacobian jacobian(const AugmentedSystem& sys, double t, const Eigen::VectorXd& state) {
  StructuredJacobian out;
  jacobian(sys, t, state, out);
  return out;
}

}  // namespace fode
