#include "fode/structlinalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

namespace fode {

const char* to_string(LinalgMode mode) {
  switch (mode) {
    case LinalgMode::full_dense: return "full_dense";
    case LinalgMode::dense_head: return "dense_head";
    case LinalgMode::banded_head: return "banded_head";
  }
  return "unknown";
}

LinalgMode linalg_mode_from_string(const std::string& name) {
  if (name == "dense" || name == "full_dense") return LinalgMode::full_dense;
  if (name == "structured" || name == "dense_head") return LinalgMode::dense_head;
  if (name == "banded" || name == "banded_head") return LinalgMode::banded_head;
  throw std::invalid_argument("unknown linear algebra mode '" + name + "' (dense, structured, banded)");
}

Eigen::MatrixXd dense_jacobian(const StructuredJacobian& jac, Index cap) {
  const Index n = jac.total_dim();
  if (n > cap) {
    throw std::length_error("dense_jacobian: total dimension " + std::to_string(n) + " exceeds cap " +
                            std::to_string(cap));
  }
  const Index d = jac.dim;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  out.topLeftCorner(d, d) = jac.head_dense();
  const BlockList& blocks = *jac.blocks;
  for (std::size_t jj = 0; jj < blocks.size(); ++jj) {
    const auto j = static_cast<Index>(jj);
    const BlockSpec& b = blocks[jj];
    const Index o = b.offset;
    const Eigen::VectorXd diag = b.diagonal();
    const Eigen::VectorXd sub = b.subdiagonal();
    for (Index k = 0; k < b.size(); ++k) out(o + k, o + k) = diag(k);
    for (Index k = 0; k + 1 < b.size(); ++k) out(o + k + 1, o + k) = sub(k);

    const Eigen::VectorXd f = jac.couplings.coupling_column(j);
    const Eigen::RowVectorXd g = jac.couplings.coupling_row(j);
    const Eigen::VectorXd w = b.coupling_weights();
    out.block(0, o, d, b.size()) = f * w.transpose();
    for (Index i = 0; i < b.terms(); ++i) out.block(o + i * b.chain, 0, 1, d) = g;
  }
  return out;
}

template <typename Scalar>
void StructuredFactorization<Scalar>::check_finite_pivots(const Matrix<Scalar>& lu) const {
  for (Index i = 0; i < lu.rows(); ++i) {
    const double p = std::abs(lu(i, i));
    if (p == 0.0 || !std::isfinite(p)) throw SingularMatrixError("structured factorization: singular matrix", i);
  }
}

template <typename Scalar>
void StructuredFactorization<Scalar>::compute(const StructuredJacobian& jac, const Eigen::VectorXd& mass, Scalar s,
                                              LinalgMode mode) {
  mode_ = mode;
  s_ = s;
  dim_ = jac.dim;
  total_ = jac.total_dim();
  layout_ = jac.layout();
  if (mass.size() != total_ && mass.size() != dim_) {
    throw std::invalid_argument("factorize: mass has wrong length");
  }
  if (mode == LinalgMode::banded_head && layout_ != HeadLayout::banded) {
    throw std::invalid_argument("factorize: banded_head mode needs a problem with banded layout");
  }

  if (mode == LinalgMode::full_dense) {
    Eigen::VectorXd full_mass = Eigen::VectorXd::Ones(total_);
    full_mass.head(dim_) = mass.head(dim_);
    head_dense_ = materialize_dense<Scalar>(jac, full_mass, s);
    dense_lu_.compute(head_dense_);
    check_finite_pivots(dense_lu_.matrixLU());
    blocks_.clear();
    kernels_.clear();
    chat_.resize(0);
    return;
  }

  const BlockList& specs = *jac.blocks;
  const auto nb = static_cast<Index>(specs.size());
  blocks_.resize(specs.size());
  std::size_t nk = 0;
  chat_.resize(nb);
  // Blocks are grouped by a cheap key; equal kernels are then found within each group.
  using Key = std::tuple<int, double, Index, double, double>;
  auto key_of = [](const BlockSpec& b) {
    const bool empty = b.weights.size() == 0;
    return Key{b.chain, b.prefactor, b.weights.size(), empty ? 0.0 : b.weights(0), empty ? 0.0 : b.exponents(0)};
  };
  std::vector<std::pair<Key, Index>> order(specs.size());
  for (Index j = 0; j < nb; ++j) order[static_cast<std::size_t>(j)] = {key_of(specs[static_cast<std::size_t>(j)]), j};
  std::sort(order.begin(), order.end());
  std::vector<Index> source(specs.size(), -1);
  for (std::size_t g = 0; g < order.size();) {
    std::size_t e = g + 1;
    while (e < order.size() && order[e].first == order[g].first) ++e;
    for (std::size_t p = g; p < e; ++p) {
      const Index j = order[p].second;
      const BlockSpec& spec = specs[static_cast<std::size_t>(j)];
      source[static_cast<std::size_t>(j)] = j;
      for (std::size_t q = g; q < p; ++q) {
        const Index r = order[q].second;
        const BlockSpec& other = specs[static_cast<std::size_t>(r)];
        if (source[static_cast<std::size_t>(r)] == r && other.weights == spec.weights &&
            other.exponents == spec.exponents) {
          source[static_cast<std::size_t>(j)] = r;
          break;
        }
      }
    }
    g = e;
  }

  std::vector<std::size_t> kernel_of(specs.size());
  for (Index j = 0; j < nb; ++j) {
    const BlockSpec& spec = specs[static_cast<std::size_t>(j)];
    Block& b = blocks_[static_cast<std::size_t>(j)];
    b.offset = spec.offset;
    const Index src = source[static_cast<std::size_t>(j)];
    if (src != j) {
      b.kernel = kernel_of[static_cast<std::size_t>(src)];
    } else {
      b.kernel = nk;
      kernel_of[static_cast<std::size_t>(j)] = nk;
      // Reuse storage from earlier factorizations.
      if (nk == kernels_.size()) kernels_.emplace_back();
      Kernel& k = kernels_[nk++];
      k.chain = spec.chain;
      k.weights = spec.prefactor * spec.weights;
      k.inv.resize(spec.terms());
      // Re(s) > 0 and gamma_i > 0 keep s + gamma_i away from zero.
      Scalar acc(0);
      double fact = 1.0;
      for (int q = 2; q < k.chain; ++q) fact *= q;
      for (Index i = 0; i < spec.terms(); ++i) {
        const Scalar r = Scalar(1) / (s + spec.exponents(i));
        k.inv(i) = r;
        Scalar rm = r;
        for (int q = 1; q < k.chain; ++q) rm *= r;
        acc += k.weights(i) * rm;
      }
      k.chat = Scalar(fact) * acc;
    }
    chat_(j) = kernels_[b.kernel].chat;
  }
  kernels_.resize(nk);

  if (layout_ == HeadLayout::dense) {
    df_di_ = jac.couplings.df_di;
    dg_dy_ = jac.couplings.dg_dy;
  } else {
    df_di_diag_ = jac.couplings.df_di_diag;
    dg_dy_band_ = jac.couplings.dg_dy_band;
  }

  if (mode == LinalgMode::dense_head) {
    head_dense_ = -jac.head_dense().cast<Scalar>();
    if (nb > 0) {
      if (layout_ == HeadLayout::dense) {
        head_dense_.noalias() -=
            (df_di_.cast<Scalar>() * chat_.asDiagonal()) * dg_dy_.cast<Scalar>();
      } else {
        for (Index i = 0; i < dim_; ++i) {
          const Scalar w = chat_(i) * df_di_diag_(i);
          for (Index c = dg_dy_band_.row_begin(i); c < dg_dy_band_.row_end(i); ++c) {
            head_dense_(i, c) -= w * dg_dy_band_.coeff(i, c);
          }
        }
      }
    }
    for (Index i = 0; i < dim_; ++i) head_dense_(i, i) += s * mass(i);
    dense_lu_.compute(head_dense_);
    check_finite_pivots(dense_lu_.matrixLU());
    return;
  }

  const BandMatrix<double>& head = jac.couplings.df_dy_band;
  const Index lower = std::max(head.lower(), nb > 0 ? dg_dy_band_.lower() : 0);
  const Index upper = std::max(head.upper(), nb > 0 ? dg_dy_band_.upper() : 0);
  head_band_ = BandMatrix<Scalar>(dim_, lower, upper);
  for (Index i = 0; i < dim_; ++i) {
    for (Index c = head.row_begin(i); c < head.row_end(i); ++c) head_band_(i, c) = -head.coeff(i, c);
    if (nb > 0) {
      const Scalar w = chat_(i) * df_di_diag_(i);
      for (Index c = dg_dy_band_.row_begin(i); c < dg_dy_band_.row_end(i); ++c) {
        head_band_(i, c) -= w * dg_dy_band_.coeff(i, c);
      }
    }
    head_band_(i, i) += s * mass(i);
  }
  band_lu_.compute(head_band_);
}

template <typename Scalar>
Scalar StructuredFactorization<Scalar>::apply_block_inverse(const Kernel& k, Scalar* x) const {
  const Index terms = k.inv.size();
  const Scalar* inv = k.inv.data();
  const double* w = k.weights.data();
  Scalar acc(0);
  if (k.chain == 1) {
    // Read only; the back-substitution applies 1/(s + gamma_i) together with the coupling.
    for (Index i = 0; i < terms; ++i) acc += w[i] * (x[i] * inv[i]);
    return acc;
  }
  for (Index i = 0; i < terms; ++i) {
    Scalar* z = x + i * k.chain;
    const Scalar r = inv[i];
    z[0] *= r;
    for (int q = 1; q < k.chain; ++q) z[q] = (z[q] + Scalar(q) * z[q - 1]) * r;
    acc += w[i] * z[k.chain - 1];
  }
  return acc;
}

template <typename Scalar>
void StructuredFactorization<Scalar>::solveInPlace(Vector<Scalar>& a) const {
  if (a.size() != total_) {
    throw std::invalid_argument("solve: right-hand side has length " + std::to_string(a.size()) + ", expected " +
                                std::to_string(total_));
  }
  if (mode_ == LinalgMode::full_dense) {
    a = dense_lu_.solve(a);
    return;
  }

  const auto nb = static_cast<Index>(blocks_.size());
  Vector<Scalar> beta(nb);
  for (Index j = 0; j < nb; ++j) {
    const Block& b = blocks_[static_cast<std::size_t>(j)];
    beta(j) = apply_block_inverse(kernels_[b.kernel], a.data() + b.offset);
  }

  auto u0 = a.head(dim_);
  if (nb > 0) {
    if (layout_ == HeadLayout::dense) {
      u0.noalias() += df_di_.cast<Scalar>() * beta;
    } else {
      for (Index i = 0; i < dim_; ++i) u0(i) += df_di_diag_(i) * beta(i);
    }
  }
  if (mode_ == LinalgMode::dense_head) {
    u0 = dense_lu_.solve(Vector<Scalar>(u0));
  } else {
    band_lu_.solveInPlace(u0);
  }

  for (Index j = 0; j < nb; ++j) {
    const Block& b = blocks_[static_cast<std::size_t>(j)];
    Scalar v(0);
    if (layout_ == HeadLayout::dense) {
      for (Index c = 0; c < dim_; ++c) v += dg_dy_(j, c) * u0(c);
    } else {
      v = dg_dy_band_.row_dot(j, u0);
    }
    const Kernel& k = kernels_[b.kernel];
    const Index terms = k.inv.size();
    const Scalar* inv = k.inv.data();
    Scalar* x = a.data() + b.offset;
    if (k.chain == 1) {
      for (Index i = 0; i < terms; ++i) x[i] = (x[i] + v) * inv[i];
      continue;
    }
    for (Index i = 0; i < terms; ++i) {
      Scalar* z = x + i * k.chain;
      const Scalar r = inv[i];
      Scalar w = v * r;
      z[0] += w;
      for (int q = 1; q < k.chain; ++q) {
        w *= Scalar(q) * r;
        z[q] += w;
      }
    }
  }
}

template class StructuredFactorization<double>;
template class StructuredFactorization<std::complex<double>>;

}  // namespace fode
