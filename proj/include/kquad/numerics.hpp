#pragma once

#include <Eigen/Dense>

namespace kquad {

/// Spectrum of a symmetric matrix, eigenvalues in descending order and the
/// matching orthonormal eigenvectors as columns.
struct SymmetricEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

/// Full eigendecomposition of (A + A^T) / 2. Throws NumericalError on
/// non-finite input or solver failure.
[[nodiscard]] SymmetricEigen eig_sym(const Eigen::Ref<const Eigen::MatrixXd>& a);

/// Default relative cutoff for pseudo-inverses of an m x m matrix: 1e-10 * m.
[[nodiscard]] double default_pinv_tolerance(Eigen::Index size) noexcept;

/// A^+ b for symmetric PSD A; eigenvalues at or below rel_tol * lambda_max
/// (and all nonpositive ones) are treated as zero. An all-zero A yields the
/// zero vector.
[[nodiscard]] Eigen::VectorXd pinv_apply(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                         const Eigen::Ref<const Eigen::VectorXd>& b, double rel_tol);
[[nodiscard]] Eigen::VectorXd pinv_apply(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                         const Eigen::Ref<const Eigen::VectorXd>& b);
[[nodiscard]] Eigen::VectorXd pinv_apply(const SymmetricEigen& eig, const Eigen::Ref<const Eigen::VectorXd>& b,
                                         double rel_tol);

/// Explicit pseudo-inverse matrix, same truncation rule as pinv_apply.
[[nodiscard]] Eigen::MatrixXd pinv(const Eigen::Ref<const Eigen::MatrixXd>& a, double rel_tol);

}  // namespace kquad
