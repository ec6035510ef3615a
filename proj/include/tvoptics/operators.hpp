#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "tvoptics/errors.hpp"

namespace tvoptics {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Image grid of `rows` x `cols` pixels.
///
/// Pixels are vectorized column-major: pixel (r, c) sits at index r + c * rows.
/// This is Eigen's native storage order, so an image matrix maps onto the
/// solver vector without copying.
struct GridShape {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  GridShape() = default;
  GridShape(Eigen::Index r, Eigen::Index c) : rows(r), cols(c) {
    if (rows < 2 || cols < 2) {
      throw DimensionError("grid must be at least 2x2, got " + std::to_string(rows) + "x" +
                           std::to_string(cols));
    }
  }

  Eigen::Index size() const { return rows * cols; }
  bool operator==(const GridShape&) const = default;
};

/// Stacked circulant difference operator D = [D_v; D_h] in R^{2N x N}.
///
/// D_v and D_h are the circulant matrices whose first rows carry -1 at
/// column 0 and +1 at column N-1 (vertical) or N-rows (horizontal). Row k of
/// the product is therefore
///
///   (D_v x)_k = x_{(k-1) mod N}    - x_k
///   (D_h x)_k = x_{(k-rows) mod N} - x_k
///
/// i.e. the vertical difference runs along the stacked vector (so the top
/// pixel of a column wraps to the bottom pixel of the previous column) and the
/// horizontal difference is periodic across columns.
template <typename Scalar>
class DifferenceOperator {
 public:
  using VectorType = Vector<Scalar>;

  explicit DifferenceOperator(GridShape shape) : shape_(shape) {}

  const GridShape& shape() const { return shape_; }
  Eigen::Index pixels() const { return shape_.size(); }

  /// D x; the first N entries are vertical differences, the last N horizontal.
  VectorType apply(const Eigen::Ref<const VectorType>& x) const {
    const Eigen::Index n = pixels();
    const Eigen::Index r = shape_.rows;
    detail::require_size(x.size(), n, "DifferenceOperator::apply");
    VectorType out(2 * n);
    auto dv = out.head(n);
    auto dh = out.tail(n);
    dv(0) = x(n - 1) - x(0);
    dv.tail(n - 1) = x.head(n - 1) - x.tail(n - 1);
    dh.head(r) = x.tail(r) - x.head(r);
    dh.tail(n - r) = x.head(n - r) - x.tail(n - r);
    return out;
  }

  /// D^T z.
  VectorType apply_adjoint(const Eigen::Ref<const VectorType>& z) const {
    const Eigen::Index n = pixels();
    const Eigen::Index r = shape_.rows;
    detail::require_size(z.size(), 2 * n, "DifferenceOperator::apply_adjoint");
    const auto zv = z.head(n);
    const auto zh = z.tail(n);
    VectorType out(n);
    // (D_v^T zv)_k = zv_{k+1} - zv_k
    out.head(n - 1) = zv.tail(n - 1) - zv.head(n - 1);
    out(n - 1) = zv(0) - zv(n - 1);
    // (D_h^T zh)_k = zh_{k+rows} - zh_k
    out.head(n - r) += zh.tail(n - r) - zh.head(n - r);
    out.tail(r) += zh.head(r) - zh.tail(r);
    return out;
  }

  /// Dense D^T D, used to assemble the ADMM system matrix.
  Matrix<Scalar> gram() const {
    const Eigen::Index n = pixels();
    Matrix<Scalar> g(n, n);
    VectorType e = VectorType::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      e(j) = Scalar(1);
      g.col(j) = apply_adjoint(apply(e));
      e(j) = Scalar(0);
    }
    return g;
  }

 private:
  GridShape shape_;
};

template <typename Scalar>
Vector<Scalar> apply_D(const DifferenceOperator<Scalar>& op,
                       const Eigen::Ref<const Vector<Scalar>>& x) {
  return op.apply(x);
}

template <typename Scalar>
Vector<Scalar> apply_Dt(const DifferenceOperator<Scalar>& op,
                        const Eigen::Ref<const Vector<Scalar>>& z) {
  return op.apply_adjoint(z);
}

/// Mixed l_{1,2} norm of a stacked [vertical; horizontal] difference vector,
/// grouping entry i with entry N + i.
template <typename Scalar>
Scalar l12_norm(const Eigen::Ref<const Vector<Scalar>>& z) {
  if (z.size() % 2 != 0) throw DimensionError("grouped vector must have even length");
  const Eigen::Index n = z.size() / 2;
  return (z.head(n).array().square() + z.tail(n).array().square()).sqrt().sum();
}

/// Isotropic TV seminorm: sum_i sqrt(dv_i^2 + dh_i^2) with (dv, dh) = D x.
template <typename Scalar>
Scalar tv_seminorm(const DifferenceOperator<Scalar>& op, const Eigen::Ref<const Vector<Scalar>>& x) {
  return l12_norm<Scalar>(op.apply(x));
}

/// The degradation operator A of y = A x + e. Either the identity (the
/// denoising case) or an explicit dense M x N matrix.
template <typename Scalar>
class Observation {
 public:
  using VectorType = Vector<Scalar>;

  static Observation identity(Eigen::Index n) { return Observation(n); }
  static Observation dense(Matrix<Scalar> a) { return Observation(std::move(a)); }

  bool is_identity() const { return !matrix_.has_value(); }
  Eigen::Index rows() const { return matrix_ ? matrix_->rows() : n_; }
  Eigen::Index cols() const { return matrix_ ? matrix_->cols() : n_; }
  const Matrix<Scalar>& matrix() const { return *matrix_; }

  VectorType apply(const Eigen::Ref<const VectorType>& x) const {
    detail::require_size(x.size(), cols(), "Observation::apply");
    if (!matrix_) return x;
    return *matrix_ * x;
  }

  VectorType apply_adjoint(const Eigen::Ref<const VectorType>& r) const {
    detail::require_size(r.size(), rows(), "Observation::apply_adjoint");
    if (!matrix_) return r;
    return matrix_->transpose() * r;
  }

  /// A^T A as a dense matrix.
  Matrix<Scalar> gram() const {
    if (!matrix_) return Matrix<Scalar>::Identity(n_, n_);
    return matrix_->transpose() * *matrix_;
  }

  /// Lipschitz constant of x -> A^T (A x - y): the largest eigenvalue of A^T A.
  Scalar lipschitz() const {
    if (!matrix_) return Scalar(1);
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(gram(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
  }

 private:
  explicit Observation(Eigen::Index n) : n_(n) {}
  explicit Observation(Matrix<Scalar> a) : n_(a.cols()), matrix_(std::move(a)) {}

  Eigen::Index n_ = 0;
  std::optional<Matrix<Scalar>> matrix_;
};

/// Prefactorized solver for (A^T A + (1/gamma) D^T D) x = r.
///
/// The system matrix is constant across iterations, so it is Cholesky
/// factorized once and reused for every x-update.
template <typename Scalar>
class AdmmLinearSolver {
 public:
  using VectorType = Vector<Scalar>;

  AdmmLinearSolver(const Observation<Scalar>& a, const DifferenceOperator<Scalar>& d,
                   Scalar gamma)
      : gamma_(gamma) {
    if (!(gamma > Scalar(0))) throw DomainError("gamma must be > 0");
    if (a.cols() != d.pixels()) {
      throw DimensionError("observation has " + std::to_string(a.cols()) +
                           " columns but the grid has " + std::to_string(d.pixels()) + " pixels");
    }
    system_ = a.gram() + d.gram() / gamma;
    llt_.compute(system_);
    // A positive semidefinite but singular matrix can slip through LLT with a
    // round-off sized pivot, so check the conditioning as well.
    const Scalar eps = std::numeric_limits<Scalar>::epsilon();
    if (llt_.info() != Eigen::Success || !(llt_.rcond() > Scalar(100) * eps)) {
      throw FactorizationError(
          "A^T A + (1/gamma) D^T D is not positive definite; A must not annihilate constant "
          "images");
    }
  }

  Scalar gamma() const { return gamma_; }
  Eigen::Index size() const { return system_.rows(); }
  const Matrix<Scalar>& system_matrix() const { return system_; }

  VectorType solve(const Eigen::Ref<const VectorType>& rhs) const {
    detail::require_size(rhs.size(), size(), "AdmmLinearSolver::solve");
    return llt_.solve(rhs);
  }

 private:
  Scalar gamma_;
  Matrix<Scalar> system_;
  Eigen::LLT<Matrix<Scalar>> llt_;
};

template <typename Scalar>
AdmmLinearSolver<Scalar> build_admm_solver(const Observation<Scalar>& a,
                                           const DifferenceOperator<Scalar>& d, Scalar gamma) {
  return AdmmLinearSolver<Scalar>(a, d, gamma);
}

}  // namespace tvoptics
