#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace fode {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Thrown when an LU factorization meets an exactly zero pivot.
class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(const std::string& what, Index pivot)
      : std::runtime_error(what + " (zero pivot at index " + std::to_string(pivot) + ")"),
        pivot_(pivot) {}

  Index pivot() const { return pivot_; }

 private:
  Index pivot_;
};

/// Square band matrix with `lower` subdiagonals and `upper` superdiagonals.
///
/// Entry (i, j) lives at row `upper + i - j` of column j of the packed
/// storage, the usual LAPACK general-band layout. Entries outside the band
/// are structurally zero and cannot be written.
template <typename Scalar>
class BandMatrix {
 public:
  BandMatrix() = default;

  BandMatrix(Index n, Index lower, Index upper)
      : n_(n), lower_(lower), upper_(upper), data_(Matrix<Scalar>::Zero(lower + upper + 1, n)) {
    if (n < 0 || lower < 0 || upper < 0) {
      throw std::invalid_argument("BandMatrix: negative size or bandwidth");
    }
  }

  Index rows() const { return n_; }
  Index cols() const { return n_; }
  Index lower() const { return lower_; }
  Index upper() const { return upper_; }

  bool in_band(Index i, Index j) const { return i - j <= lower_ && j - i <= upper_; }

  Scalar coeff(Index i, Index j) const {
    return in_band(i, j) ? data_(upper_ + i - j, j) : Scalar(0);
  }

  Scalar& operator()(Index i, Index j) {
    if (!in_band(i, j)) {
      throw std::out_of_range("BandMatrix: entry (" + std::to_string(i) + ", " + std::to_string(j) +
                              ") outside the band");
    }
    return data_(upper_ + i - j, j);
  }

  Scalar operator()(Index i, Index j) const { return coeff(i, j); }

  void setZero() { data_.setZero(); }

  /// First and one-past-last column index of row i inside the band.
  Index row_begin(Index i) const { return std::max<Index>(0, i - lower_); }
  Index row_end(Index i) const { return std::min<Index>(n_, i + upper_ + 1); }

  template <typename Target>
  BandMatrix<Target> cast() const {
    BandMatrix<Target> out(n_, lower_, upper_);
    out.packed() = data_.template cast<Target>();
    return out;
  }

  /// Copy into a band matrix with at least the given bandwidths.
  BandMatrix widened(Index lower, Index upper) const {
    BandMatrix out(n_, std::max(lower, lower_), std::max(upper, upper_));
    for (Index j = 0; j < n_; ++j) {
      for (Index i = std::max<Index>(0, j - upper_); i < std::min<Index>(n_, j + lower_ + 1); ++i) {
        out(i, j) = coeff(i, j);
      }
    }
    return out;
  }

  Matrix<Scalar> toDense() const {
    Matrix<Scalar> out = Matrix<Scalar>::Zero(n_, n_);
    for (Index j = 0; j < n_; ++j) {
      for (Index i = std::max<Index>(0, j - upper_); i < std::min<Index>(n_, j + lower_ + 1); ++i) {
        out(i, j) = data_(upper_ + i - j, j);
      }
    }
    return out;
  }

  /// Row i restricted to the band, as a dot product with x.
  template <typename Derived>
  typename Derived::Scalar row_dot(Index i, const Eigen::MatrixBase<Derived>& x) const {
    using R = typename Derived::Scalar;
    R acc(0);
    for (Index j = row_begin(i); j < row_end(i); ++j) {
      acc += data_(upper_ + i - j, j) * x(j);
    }
    return acc;
  }

  template <typename Derived>
  Vector<typename Derived::Scalar> operator*(const Eigen::MatrixBase<Derived>& x) const {
    Vector<typename Derived::Scalar> y(n_);
    for (Index i = 0; i < n_; ++i) y(i) = row_dot(i, x);
    return y;
  }

  Matrix<Scalar>& packed() { return data_; }
  const Matrix<Scalar>& packed() const { return data_; }

 private:
  Index n_ = 0;
  Index lower_ = 0;
  Index upper_ = 0;
  Matrix<Scalar> data_;
};

/// LU factorization of a band matrix with partial pivoting.
///
/// Row interchanges widen the upper band of U to `lower + upper`; the packed
/// array therefore carries `2 * lower + upper + 1` rows, and the multipliers
/// of L sit below the diagonal row exactly as in LAPACK's gbtrf.
template <typename Scalar>
class BandLU {
 public:
  BandLU() = default;

  explicit BandLU(const BandMatrix<Scalar>& a) { compute(a); }

  void compute(const BandMatrix<Scalar>& a) {
    n_ = a.rows();
    kl_ = a.lower();
    ku_ = a.upper();
    kv_ = kl_ + ku_;
    ab_.setZero(2 * kl_ + ku_ + 1, n_);
    ab_.bottomRows(kl_ + ku_ + 1) = a.packed();
    pivots_.assign(static_cast<std::size_t>(n_), 0);

    Index ju = 0;
    for (Index j = 0; j < n_; ++j) {
      const Index km = std::min(kl_, n_ - 1 - j);
      Index jp = 0;
      double best = std::abs(at(j, j));
      for (Index p = 1; p <= km; ++p) {
        const double v = std::abs(at(j + p, j));
        if (v > best) {
          best = v;
          jp = p;
        }
      }
      pivots_[static_cast<std::size_t>(j)] = j + jp;
      if (best == 0.0 || !std::isfinite(best)) {
        throw SingularMatrixError("BandLU: singular band matrix", j);
      }
      ju = std::max(ju, std::min(j + ku_ + jp, n_ - 1));
      if (jp != 0) {
        for (Index c = j; c <= ju; ++c) std::swap(at(j, c), at(j + jp, c));
      }
      if (km > 0) {
        const Scalar inv = Scalar(1) / at(j, j);
        for (Index i = 1; i <= km; ++i) at(j + i, j) *= inv;
        for (Index c = j + 1; c <= ju; ++c) {
          const Scalar u = at(j, c);
          if (u == Scalar(0)) continue;
          for (Index i = 1; i <= km; ++i) at(j + i, c) -= at(j + i, j) * u;
        }
      }
    }
  }

  Index rows() const { return n_; }

  template <typename Derived>
  void solveInPlace(Eigen::MatrixBase<Derived>& b) const {
    for (Index j = 0; j + 1 < n_; ++j) {
      const Index lm = std::min(kl_, n_ - 1 - j);
      const Index l = pivots_[static_cast<std::size_t>(j)];
      if (l != j) std::swap(b(l), b(j));
      const auto bj = b(j);
      for (Index i = 1; i <= lm; ++i) b(j + i) -= at(j + i, j) * bj;
    }
    for (Index j = n_ - 1; j >= 0; --j) {
      b(j) /= at(j, j);
      const auto bj = b(j);
      for (Index i = std::max<Index>(0, j - kv_); i < j; ++i) b(i) -= at(i, j) * bj;
    }
  }

  Vector<Scalar> solve(const Vector<Scalar>& rhs) const {
    Vector<Scalar> x = rhs;
    solveInPlace(x);
    return x;
  }

 private:
  Scalar& at(Index i, Index c) { return ab_(kv_ + i - c, c); }
  const Scalar& at(Index i, Index c) const { return ab_(kv_ + i - c, c); }

  Index n_ = 0;
  Index kl_ = 0;
  Index ku_ = 0;
  Index kv_ = 0;
  Matrix<Scalar> ab_;
  std::vector<Index> pivots_;
};

}  // namespace fode
