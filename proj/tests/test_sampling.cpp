#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "kquad/errors.hpp"
#include "kquad/numerics.hpp"
#include "kquad/sampling.hpp"
#include "kquad/spectral.hpp"
#include "oracles.hpp"

using namespace kquad;

TEST_CASE("uniform subsampling") {
  Rng rng(1);
  IndexList perm = uniform_subsample(5, 5, false, rng);
  std::sort(perm.begin(), perm.end());
  CHECK(perm == IndexList{0, 1, 2, 3, 4});
  CHECK(uniform_subsample(1, 3, true, rng) == IndexList{0, 0, 0});

  Rng a(42), b(42);
  CHECK(uniform_subsample(10000, 100, false, a) == uniform_subsample(10000, 100, false, b));

  Rng c(3);
  IndexList s = uniform_subsample(50, 20, false, c);
  std::sort(s.begin(), s.end());
  CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
  CHECK(s.back() < 50);

  CHECK_THROWS_AS((void)uniform_subsample(3, 4, false, rng), InputError);
  CHECK_THROWS_AS((void)uniform_subsample(3, 0, true, rng), InputError);
  CHECK_THROWS_AS((void)uniform_subsample(0, 1, true, rng), InputError);
}

TEST_CASE("exact leverage scores closed forms") {
  const double lambda = 0.05;
  for (int n : {1, 4, 9}) {
    const auto s = exact_rls(Eigen::MatrixXd::Identity(n, n), lambda);
    for (Eigen::Index i = 0; i < n; ++i) CHECK(std::abs(s.values[i] - 1.0 / (1.0 + lambda * n)) <= 1e-12);
    CHECK(s.mode == ScoreMode::exact);
    CHECK(d_infinity_empirical(s) == doctest::Approx(n / (1.0 + lambda * n)));
  }
  const auto dup = exact_rls(Eigen::Matrix2d::Ones(), lambda);
  CHECK(dup.values[0] == doctest::Approx(1.0 / (2.0 + 2.0 * lambda)));
  CHECK(dup.values[1] == doctest::Approx(1.0 / (2.0 + 2.0 * lambda)));
}

TEST_CASE("exact leverage scores match the dense-solve oracle and the trace identity") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 8 + 6 * trial;
    const Eigen::MatrixXd x = oracle::random_points(rng, 2, n);
    const auto k = KernelSpec::gaussian(0.3 + 0.05 * trial);
    const Eigen::MatrixXd g = gram(k, x);
    for (double lambda : {1e-4, 1e-2, 0.3}) {
      const auto s = exact_rls(g, lambda);
      const Eigen::VectorXd ref = oracle::leverage_by_solve(g, lambda);
      CHECK((s.values - ref).cwiseAbs().maxCoeff() <= 1e-8);
      CHECK(std::abs(s.values.sum() - effective_dimension(empirical_spectrum(g), lambda)) <= 1e-8);
      CHECK(s.values.minCoeff() > 0.0);
      CHECK(s.values.maxCoeff() < 1.0);
      CHECK(s.values.sum() <= n);
    }
  }
}

TEST_CASE("whitened feature identity on the data span") {
  // C_n = Phi Phi^T / n. With the SVD of Phi in the span of the features,
  // phi(x_i)^T (C_n + lambda I)^-1 phi(x_i) = sum_j s_j^2 / (s_j^2/n + lambda) U_ij^2,
  // where K = U diag(s^2) U^T. Here it is evaluated through a Cholesky
  // feature map Phi = L^T instead.
  std::mt19937_64 rng(12);
  const int n = 12;
  const Eigen::MatrixXd x = oracle::random_points(rng, 1, n);
  const Eigen::MatrixXd g = gram(KernelSpec::periodic_sobolev(1, 1), x);
  const Eigen::MatrixXd phi = Eigen::LLT<Eigen::MatrixXd>(g).matrixU();  // columns = features, K = Phi^T Phi
  REQUIRE((phi.transpose() * phi - g).cwiseAbs().maxCoeff() <= 1e-10);
  const double lambda = 0.01;
  Eigen::MatrixXd c = phi * phi.transpose() / n;
  c.diagonal().array() += lambda;
  const Eigen::MatrixXd whitened = c.llt().solve(phi);
  const auto s = exact_rls(g, lambda);
  for (int i = 0; i < n; ++i) {
    CHECK(n * s.values[i] == doctest::Approx(phi.col(i).dot(whitened.col(i))).epsilon(1e-9));
  }
}

TEST_CASE("exact scores strictly decrease in lambda") {
  std::mt19937_64 rng(13);
  const Eigen::MatrixXd x = oracle::random_points(rng, 2, 20);
  const Eigen::MatrixXd g = gram(KernelSpec::laplacian(0.5), x);
  Eigen::VectorXd prev = exact_rls(g, 1e-5).values;
  for (double lambda : {1e-4, 1e-3, 1e-2, 1e-1, 1.0}) {
    const Eigen::VectorXd cur = exact_rls(g, lambda).values;
    CHECK((prev - cur).minCoeff() > 0.0);
    prev = cur;
  }
}

TEST_CASE("exact scores reject indefinite matrices") {
  Eigen::Matrix2d a;
  a << 1, 2, 2, 1;
  CHECK_THROWS_AS((void)exact_rls(a, 0.1), NumericalError);
  CHECK_THROWS_AS((void)exact_rls(Eigen::Matrix2d::Identity(), 0.0), InputError);
}

TEST_CASE("pilot estimator with the full pilot reproduces exact scores") {
  std::mt19937_64 rng(14);
  const Eigen::MatrixXd x = oracle::random_points(rng, 2, 16);
  const auto k = KernelSpec::gaussian(0.4);
  const double lambda = 1e-3;
  Rng r(1);
  const auto approx = approx_rls_pilot(x, k, lambda, 16, r);
  const auto exact = exact_rls(gram(k, x), lambda);
  CHECK((approx.values - exact.values).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(approx.mode == ScoreMode::pilot);
  CHECK(approx.pilot_size == 16);
}

TEST_CASE("pilot estimator scalar and duplicate cases") {
  Eigen::MatrixXd one(1, 1);
  one << 0.2;
  const auto k = KernelSpec::periodic_sobolev(1, 1);
  const double lambda = 0.3;
  const auto s = approx_rls_with_pilot(one, k, lambda, {0});
  CHECK(s.values[0] == doctest::Approx(k.diagonal() / (k.diagonal() + lambda)).epsilon(1e-12));

  std::mt19937_64 rng(15);
  const Eigen::MatrixXd base = oracle::random_points(rng, 2, 10);
  Eigen::MatrixXd twice(2, 20);
  twice << base, base;
  IndexList pilot(10);
  std::iota(pilot.begin(), pilot.end(), 0);
  const auto dup = approx_rls_with_pilot(twice, KernelSpec::gaussian(0.5), 1e-3, pilot);
  for (int i = 0; i < 10; ++i) CHECK(std::abs(dup.values[i] - dup.values[i + 10]) <= 1e-6);
}

TEST_CASE("pilot estimator stays within a factor 100 of exact with half pilots") {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 32 + 24 * trial;
    const Eigen::MatrixXd x = oracle::random_points(rng, 2, n);
    const auto k = KernelSpec::gaussian(0.5);
    const double lambda = arls_default_lambda(n, 1.0, 0.1);
    Rng r(trial);
    const auto approx = approx_rls_pilot(x, k, lambda, n / 2, r);
    const auto exact = exact_rls(gram(k, x), lambda);
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      const double ratio = approx.values[i] / exact.values[i];
      worst = std::max({worst, ratio, 1.0 / ratio});
    }
    MESSAGE("n=" << n << " worst multiplicative deviation " << worst);
    CHECK(std::isfinite(worst));
    CHECK(worst <= 100.0);
  }
}

TEST_CASE("pilot estimator survives a singular pilot Gram through jitter") {
  Eigen::MatrixXd x(1, 6);
  x << 0.1, 0.1, 0.1, 0.4, 0.4, 0.7;
  const auto s = approx_rls_with_pilot(x, KernelSpec::gaussian(0.3), 1e-3, {0, 1, 2, 3});
  CHECK(s.values.allFinite());
  CHECK(s.values.minCoeff() >= 0.0);
}

TEST_CASE("proportional sampling") {
  Rng rng(21);
  LeverageScores point;
  point.values = Eigen::Vector3d(1, 0, 0);
  CHECK(sample_proportional(point, 4, rng) == IndexList{0, 0, 0, 0});

  LeverageScores flat;
  flat.values = Eigen::Vector4d::Constant(0.3);
  const IndexList draws = sample_proportional(flat, 100000, rng);
  for (std::size_t i = 0; i < 4; ++i) {
    const double freq = static_cast<double>(std::count(draws.begin(), draws.end(), i)) / 1e5;
    CHECK(std::abs(freq - 0.25) <= 0.01);
  }
  LeverageScores skew;
  skew.values = Eigen::Vector2d(3, 1);
  const IndexList d2 = sample_proportional(skew, 100000, rng);
  const double f0 = static_cast<double>(std::count(d2.begin(), d2.end(), 0u)) / 1e5;
  CHECK(f0 >= 0.74);
  CHECK(f0 <= 0.76);

  LeverageScores bad;
  bad.values = Eigen::Vector2d(-1, 2);
  CHECK_THROWS_AS((void)sample_proportional(bad, 3, rng), InputError);
  bad.values = Eigen::Vector2d::Zero();
  CHECK_THROWS_AS((void)sample_proportional(bad, 3, rng), InputError);
}

TEST_CASE("sampler strings and defaults") {
  CHECK(parse_sampler("uniform").strategy == SamplingStrategy::uniform_without_replacement);
  CHECK(parse_sampler("uniform-wr").strategy == SamplingStrategy::uniform_with_replacement);
  const auto a = parse_sampler("arls:lambda=0.01,pilot=64,delta=0.05");
  CHECK(a.strategy == SamplingStrategy::arls);
  CHECK(*a.lambda == 0.01);
  CHECK(*a.pilot_size == 64);
  CHECK(a.delta == 0.05);
  CHECK(!parse_sampler("arls:lambda=auto").lambda);
  CHECK_THROWS_AS((void)parse_sampler("arls:delta=2"), InputError);
  CHECK_THROWS_AS((void)parse_sampler("dpp"), InputError);
  CHECK(default_pilot_size(100) == 40);
  CHECK(default_pilot_size(10) == 10);
  CHECK(arls_default_lambda(10000, 1.0, 0.1) == doctest::Approx(19.0 * std::log(3.2e6) / 1e4));
}

TEST_CASE("node selection is reproducible") {
  std::mt19937_64 rng(22);
  const Eigen::MatrixXd x = oracle::random_points(rng, 2, 200);
  const auto k = KernelSpec::gaussian(0.3);
  for (const char* spec : {"uniform", "uniform-wr", "arls"}) {
    SamplerConfig c = parse_sampler(spec);
    c.m = 25;
    c.seed = 99;
    const IndexList a = select_nodes(x, k, c);
    CHECK(a == select_nodes(x, k, c));
    CHECK(a.size() == 25);
    CHECK(*std::max_element(a.begin(), a.end()) < 200);
  }
}
