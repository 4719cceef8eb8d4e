#include <doctest.h>

#include <random>

#include "kquad/errors.hpp"
#include "kquad/numerics.hpp"

using namespace kquad;

namespace {

Eigen::MatrixXd random_psd(std::mt19937_64& rng, int n, int rank) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd b(n, rank);
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = nd(rng);
  return b * b.transpose();
}

}  // namespace

TEST_CASE("eig_sym small cases") {
  const auto id = eig_sym(Eigen::Matrix3d::Identity());
  CHECK((id.values - Eigen::Vector3d::Ones()).norm() == 0.0);

  Eigen::Matrix2d a;
  a << 2, 1, 1, 2;
  const auto e = eig_sym(a);
  CHECK(e.values[0] == doctest::Approx(3.0));
  CHECK(e.values[1] == doctest::Approx(1.0));

  const auto r1 = eig_sym(Eigen::Matrix2d::Ones());
  CHECK(r1.values[0] == doctest::Approx(2.0));
  CHECK(std::abs(r1.values[1]) <= 1e-15);
}

TEST_CASE("eig_sym reconstruction and orthogonality") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd a = random_psd(rng, 12, 12 - trial) - 0.5 * Eigen::MatrixXd::Identity(12, 12);
    const auto e = eig_sym(a);
    for (Eigen::Index i = 1; i < e.values.size(); ++i) CHECK(e.values[i - 1] >= e.values[i]);
    const Eigen::MatrixXd back = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    CHECK((back - a).cwiseAbs().maxCoeff() <= 1e-8 * (1 + a.cwiseAbs().maxCoeff()));
    CHECK((e.vectors.transpose() * e.vectors - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("eig_sym rejects non-finite input") {
  Eigen::Matrix2d a = Eigen::Matrix2d::Identity();
  a(0, 1) = a(1, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS((void)eig_sym(a), NumericalError);
}

TEST_CASE("pinv_apply examples") {
  Eigen::Vector2d b(1, 2);
  CHECK((pinv_apply(Eigen::Matrix2d::Identity(), b) - b).norm() <= 1e-15);

  Eigen::Matrix2d d = Eigen::Matrix2d::Zero();
  d(0, 0) = 4;
  const Eigen::VectorXd x = pinv_apply(d, Eigen::Vector2d(8, 5));
  CHECK(x[0] == doctest::Approx(2.0));
  CHECK(x[1] == 0.0);

  const Eigen::VectorXd y = pinv_apply(Eigen::Matrix2d::Ones(), Eigen::Vector2d(2, 2));
  CHECK(y[0] == doctest::Approx(1.0));
  CHECK(y[1] == doctest::Approx(1.0));

  CHECK(pinv_apply(Eigen::Matrix2d::Zero(), b).norm() == 0.0);
  CHECK_THROWS_AS((void)pinv_apply(d, Eigen::Vector3d::Ones()), InputError);
  CHECK_THROWS_AS((void)pinv_apply(d, b, 0.0), InputError);
  CHECK(default_pinv_tolerance(5) == doctest::Approx(5e-10));
}

TEST_CASE("Penrose conditions") {
  std::mt19937_64 rng(6);
  for (int rank : {6, 4, 2}) {
    const Eigen::MatrixXd a = random_psd(rng, 6, rank);
    const Eigen::MatrixXd x = pinv(a, default_pinv_tolerance(6));
    CHECK((a * x * a - a).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((x * a * x - x).cwiseAbs().maxCoeff() <= 1e-6 * (1 + x.cwiseAbs().maxCoeff()));
    const Eigen::MatrixXd ax = a * x;
    const Eigen::MatrixXd xa = x * a;
    CHECK((ax - ax.transpose()).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((xa - xa.transpose()).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("pinv_apply returns the minimum-norm preimage") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  const Eigen::MatrixXd a = random_psd(rng, 8, 3);
  Eigen::VectorXd w(8);
  for (auto& v : w) v = nd(rng);
  const Eigen::VectorXd sol = pinv_apply(a, a * w);
  // Null space of A from a full-pivot LU, independent of the eigensolver.
  const Eigen::MatrixXd null = Eigen::FullPivLU<Eigen::MatrixXd>(a).kernel();
  REQUIRE(null.cols() == 5);
  const Eigen::MatrixXd q = null.householderQr().householderQ() * Eigen::MatrixXd::Identity(8, 5);
  CHECK((q.transpose() * sol).norm() <= 1e-8);
  CHECK((a * sol - a * w).norm() <= 1e-8 * (1 + (a * w).norm()));
}

TEST_CASE("pinv_apply agrees with a dense solve on SPD systems") {
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd a = random_psd(rng, 10, 10) + Eigen::MatrixXd::Identity(10, 10);
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(10, -3, 2);
  CHECK((pinv_apply(a, b) - a.partialPivLu().solve(b)).norm() <= 1e-10);
}
