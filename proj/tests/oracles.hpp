#pragma once

// Reference computations used only by the tests. They avoid the library's
// code paths on purpose: series instead of closed forms, dense LU solves
// instead of eigendecompositions, brute-force enumeration instead of
// incremental updates.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// 1 + 2 sum_{k=1}^{terms} cos(2 pi k t) / k^(2s), summed from the smallest
/// term up in long double. k * t is exact in long double for k < 2^11 * 2^53
/// / t-mantissa, so the fractional part carries no reduction error.
inline long double sobolev_series(int s, double t, long terms) {
  const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
  long double acc = 0.0L;
  for (long k = terms; k >= 1; --k) {
    const long double kt = static_cast<long double>(k) * static_cast<long double>(t);
    const long double frac = kt - std::floor(kt);
    const long double kk = static_cast<long double>(k);
    long double denom = kk * kk;
    if (s >= 2) denom *= kk * kk;
    if (s >= 3) denom *= kk * kk;
    acc += std::cos(two_pi * frac) / denom;
  }
  return 1.0L + 2.0L * acc;
}

/// Uniform points in [lo, hi)^d, stored d x n.
inline Eigen::MatrixXd random_points(std::mt19937_64& rng, Eigen::Index d, Eigen::Index n, double lo = 0.0,
                                     double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd x(d, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < d; ++k) x(k, j) = u(rng);
  }
  return x;
}

/// Gaussian kernel Gram matrix written out directly.
inline Eigen::MatrixXd gaussian_gram(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double sigma) {
  Eigen::MatrixXd k(x.cols(), y.cols());
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    for (Eigen::Index j = 0; j < y.cols(); ++j) k(i, j) = std::exp(-(x.col(i) - y.col(j)).squaredNorm() / (2 * sigma * sigma));
  }
  return k;
}

/// diag(K (K + lambda n I)^-1) by a dense LU solve.
inline Eigen::VectorXd leverage_by_solve(const Eigen::MatrixXd& k, double lambda) {
  const Eigen::Index n = k.rows();
  Eigen::MatrixXd reg = k;
  reg.diagonal().array() += lambda * static_cast<double>(n);
  const Eigen::MatrixXd h = reg.fullPivLu().solve(k);  // (K + lambda n I)^-1 K, same diagonal
  return h.diagonal();
}

/// Squared worst-case error of weights w on nodes z against masses a on
/// support x, from the joint Gram matrix in one quadratic form.
inline double squared_mmd_joint(const Eigen::MatrixXd& joint_gram, const Eigen::VectorXd& a, const Eigen::VectorXd& w) {
  Eigen::VectorXd c(a.size() + w.size());
  c << a, -w;
  return c.dot(joint_gram * c);
}

/// All size-k subsets of {0..n-1} in lexicographic order.
inline std::vector<std::vector<std::size_t>> subsets(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  auto rec = [&](auto&& self, std::size_t start) -> void {
    if (cur.size() == k) {
      out.push_back(cur);
      return;
    }
    for (std::size_t i = start; i < n; ++i) {
      cur.push_back(i);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

}  // namespace oracle
