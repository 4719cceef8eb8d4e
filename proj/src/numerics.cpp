#include "kquad/numerics.hpp"

#include <string>

#include "kquad/errors.hpp"

namespace kquad {

namespace {

void check_rel_tol(double rel_tol) {
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw InputError("pseudo-inverse tolerance must lie in (0, 1)");
}

// Inverted spectrum with truncation; zero where the eigenvalue is dropped.
Eigen::VectorXd inverted_spectrum(const Eigen::VectorXd& values, double rel_tol) {
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(values.size());
  if (values.size() == 0) return inv;
  const double top = values[0];
  if (!(top > 0.0)) return inv;
  const double cutoff = rel_tol * top;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values[i] > cutoff) inv[i] = 1.0 / values[i];
  }
  return inv;
}

}  // namespace

SymmetricEigen eig_sym(const Eigen::Ref<const Eigen::MatrixXd>& a) {
  if (a.rows() != a.cols()) throw InputError("eig_sym: matrix is not square");
  if (!a.allFinite()) throw NumericalError("eig_sym: matrix has non-finite entries");
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw NumericalError("eig_sym: eigensolver did not converge");
  // Eigen returns ascending order.
  SymmetricEigen out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

double default_pinv_tolerance(Eigen::Index size) noexcept {
  return 1e-10 * static_cast<double>(size > 0 ? size : 1);
}

Eigen::VectorXd pinv_apply(const SymmetricEigen& eig, const Eigen::Ref<const Eigen::VectorXd>& b, double rel_tol) {
  check_rel_tol(rel_tol);
  if (b.size() != eig.vectors.rows()) throw InputError("pinv_apply: right-hand side length mismatch");
  const Eigen::VectorXd inv = inverted_spectrum(eig.values, rel_tol);
  const Eigen::VectorXd coeffs = inv.cwiseProduct(eig.vectors.transpose() * b);
  return eig.vectors * coeffs;
}

Eigen::VectorXd pinv_apply(const Eigen::Ref<const Eigen::MatrixXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                           double rel_tol) {
  check_rel_tol(rel_tol);
  if (a.rows() != b.size()) throw InputError("pinv_apply: right-hand side length mismatch");
  return pinv_apply(eig_sym(a), b, rel_tol);
}

Eigen::VectorXd pinv_apply(const Eigen::Ref<const Eigen::MatrixXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
  return pinv_apply(a, b, default_pinv_tolerance(a.rows()));
}

Eigen::MatrixXd pinv(const Eigen::Ref<const Eigen::MatrixXd>& a, double rel_tol) {
  check_rel_tol(rel_tol);
  const SymmetricEigen eig = eig_sym(a);
  const Eigen::VectorXd inv = inverted_spectrum(eig.values, rel_tol);
  return eig.vectors * inv.asDiagonal() * eig.vectors.transpose();
}

}  // namespace kquad
