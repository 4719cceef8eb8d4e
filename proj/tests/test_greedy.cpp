#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "kquad/errors.hpp"
#include "kquad/greedy.hpp"
#include "oracles.hpp"

using namespace kquad;

namespace {

double det_of(const KernelSpec& k, const Eigen::MatrixXd& x, const IndexList& idx) {
  return gram(k, gather_points(x, idx)).fullPivLu().determinant();
}

// f - interpolant of f on the selected points, by a dense solve.
Eigen::VectorXd residual_by_solve(const KernelSpec& k, const Eigen::MatrixXd& x, const IndexList& sel,
                                  const Eigen::VectorXd& f) {
  if (sel.empty()) return f;
  const Eigen::MatrixXd nodes = gather_points(x, sel);
  Eigen::VectorXd fs(static_cast<Eigen::Index>(sel.size()));
  for (std::size_t j = 0; j < sel.size(); ++j) fs[static_cast<Eigen::Index>(j)] = f[static_cast<Eigen::Index>(sel[j])];
  const Eigen::VectorXd c = gram(k, nodes).fullPivLu().solve(fs);
  return f - gram(k, x, nodes) * c;
}

}  // namespace

TEST_CASE("p-greedy first pick is index 0 for translation invariant kernels") {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd x = oracle::random_points(rng, 2, 12);
  CHECK(greedy_select(x, KernelSpec::gaussian(0.3), Eigen::VectorXd(), 1, GreedyVariant::p).indices ==
        IndexList{0});
  CHECK(greedy_select(x.topRows(1), KernelSpec::periodic_sobolev(2, 1), Eigen::VectorXd(), 1, GreedyVariant::p)
            .indices == IndexList{0});
}

TEST_CASE("p-greedy maximizes the determinant at every step") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd x = oracle::random_points(rng, 2, 10);
    const auto k = KernelSpec::gaussian(0.5);
    const IndexList sel = greedy_select(x, k, Eigen::VectorXd(), 5, GreedyVariant::p).indices;
    REQUIRE(sel.size() == 5);
    for (std::size_t t = 1; t <= 5; ++t) {
      IndexList prefix(sel.begin(), sel.begin() + static_cast<std::ptrdiff_t>(t - 1));
      double best = -1.0;
      for (std::size_t cand = 0; cand < 10; ++cand) {
        if (std::find(prefix.begin(), prefix.end(), cand) != prefix.end()) continue;
        IndexList s = prefix;
        s.push_back(cand);
        best = std::max(best, det_of(k, x, s));
      }
      IndexList chosen(sel.begin(), sel.begin() + static_cast<std::ptrdiff_t>(t));
      CHECK(det_of(k, x, chosen) >= best * (1 - 1e-8));
    }
  }
}

TEST_CASE("power function update equals the determinant ratio") {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd x = oracle::random_points(rng, 2, 8);
  const auto k = KernelSpec::gaussian(0.6);
  GreedyState state(x, k, Eigen::VectorXd(), 3);
  for (std::size_t step = 0; step < 3; ++step) {
    state.add(*state.next_candidate(GreedyVariant::p));
    for (Eigen::Index i = 0; i < 8; ++i) {
      const double brute = power_function_bruteforce(state.selected(), x.col(i), k, x);
      CHECK(std::abs(state.power2()[i] - std::max(brute, 0.0)) <= 1e-8);
      if (std::find(state.selected().begin(), state.selected().end(), static_cast<std::size_t>(i)) ==
          state.selected().end()) {
        IndexList with = state.selected();
        with.push_back(static_cast<std::size_t>(i));
        CHECK(brute == doctest::Approx(det_of(k, x, with) / det_of(k, x, state.selected())).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("power function brute force basics") {
  Eigen::MatrixXd x(1, 3);
  x << 0.1, 0.5, 0.8;
  const auto k = KernelSpec::periodic_sobolev(1, 1);
  CHECK(power_function_bruteforce({}, x.col(0), k, x) == k(x.col(0), x.col(0)));
  CHECK(k(x.col(0), x.col(0)) == doctest::Approx(k.diagonal()).epsilon(1e-15));
  CHECK(std::abs(power_function_bruteforce({0, 2}, x.col(2), k, x)) <= 1e-10);
  CHECK_THROWS_AS((void)power_function_bruteforce({1, 1}, x.col(0), k, x), NumericalError);
}

TEST_CASE("incremental state matches dense oracles") {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd x = oracle::random_points(rng, 2, 24);
  const auto k = KernelSpec::laplacian(0.7);
  const Eigen::MatrixXd g = gram(k, x);
  const Eigen::VectorXd f = g.rowwise().mean();
  for (const auto variant : {GreedyVariant::f, GreedyVariant::p, GreedyVariant::f_over_p}) {
    GreedyState state(x, k, f, 10);
    Eigen::VectorXd prev_power = state.power2();
    for (int t = 1; t <= 10; ++t) {
      const auto next = state.next_candidate(variant);
      REQUIRE(next);
      state.add(*next);
      // C^T C equals the Gram matrix projected onto the selected span.
      const Eigen::MatrixXd c = state.coefficients().topRows(t);
      const Eigen::MatrixXd nodes = gather_points(x, state.selected());
      const Eigen::MatrixXd kxs = gram(k, x, nodes);
      const Eigen::MatrixXd projected = kxs * gram(k, nodes).fullPivLu().solve(kxs.transpose());
      CHECK((c.transpose() * c - projected).cwiseAbs().maxCoeff() <= 1e-6);
      CHECK((state.residual() - residual_by_solve(k, x, state.selected(), f)).cwiseAbs().maxCoeff() <= 1e-8);
      CHECK((state.power2() - prev_power).maxCoeff() <= 0.0);
      CHECK(state.power2().minCoeff() >= 0.0);
      for (const auto j : state.selected()) CHECK(state.power2()[static_cast<Eigen::Index>(j)] <= 1e-8);
      prev_power = state.power2();
    }
  }
}

TEST_CASE("f over p criterion is the residual norm decrease") {
  // |P_{t+x}^perp f|^2 = |P_t^perp f|^2 - r(x)^2 / power2(x), with f the
  // kernel mean embedding so that |P^perp f|^2 has a closed form.
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd x = oracle::random_points(rng, 1, 20);
  const auto k = KernelSpec::periodic_sobolev(1, 1);
  const Eigen::MatrixXd g = gram(k, x);
  const Eigen::VectorXd f = g.rowwise().mean();
  const double f_norm2 = f.mean();  // |mu|^2 = 1^T K 1 / n^2
  const auto residual_norm2 = [&](const IndexList& sel) {
    const Eigen::MatrixXd kxs = gram(k, x, gather_points(x, sel));
    const Eigen::VectorXd fs = kxs.transpose().rowwise().mean();
    return f_norm2 - fs.dot(gram(k, gather_points(x, sel)).fullPivLu().solve(fs));
  };
  GreedyState state(x, k, f, 6);
  state.add(3);
  state.add(11);
  const double base = residual_norm2(state.selected());
  CHECK(base == doctest::Approx(f_norm2 - state.f_coefficients().squaredNorm()).epsilon(1e-9));
  for (Eigen::Index i = 0; i < 20; ++i) {
    if (i == 3 || i == 11) continue;
    IndexList with = state.selected();
    with.push_back(static_cast<std::size_t>(i));
    const double predicted = base - state.residual()[i] * state.residual()[i] / state.power2()[i];
    CHECK(residual_norm2(with) == doctest::Approx(predicted).epsilon(1e-7));
  }
}

TEST_CASE("full selection interpolates exactly") {
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd x = oracle::random_points(rng, 1, 16);
  const auto k = KernelSpec::periodic_sobolev(1, 1);
  const Eigen::VectorXd f = gram(k, x).rowwise().mean();
  for (const auto variant : {GreedyVariant::f, GreedyVariant::p, GreedyVariant::f_over_p}) {
    GreedyState state(x, k, f, 16);
    while (const auto next = state.next_candidate(variant)) state.add(*next);
    CHECK(state.size() == 16);
    CHECK(state.residual().cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(state.power2().maxCoeff() <= 1e-6);
    const GreedyQuadrature q = greedy_quadrature(x, k, 16, variant);
    CHECK(worst_case_error(q.rule, TargetMeasure::empirical(x), k) <= 1e-6);
  }
}

TEST_CASE("greedy residual norms never increase") {
  std::mt19937_64 rng(7);
  const Eigen::MatrixXd x = oracle::random_points(rng, 2, 60);
  const auto k = KernelSpec::gaussian(0.25);
  const Eigen::VectorXd f = gram(k, x).rowwise().mean();
  const double f_norm2 = f.mean();
  for (const auto variant : {GreedyVariant::f, GreedyVariant::f_over_p}) {
    GreedyState state(x, k, f, 20);
    double prev = f_norm2;
    while (const auto next = state.next_candidate(variant)) {
      state.add(*next);
      const double cur = f_norm2 - state.f_coefficients().squaredNorm();
      CHECK(cur <= prev + 1e-12);
      prev = cur;
    }
  }
}

TEST_CASE("f-greedy beats the worst random node set") {
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd x = oracle::random_points(rng, 2, 16);
  const auto k = KernelSpec::gaussian(0.3);
  const auto target = TargetMeasure::empirical(x);
  const double greedy = worst_case_error(greedy_quadrature(x, k, 4, GreedyVariant::f).rule, target, k);
  double worst = 0.0;
  Rng r(123);
  for (int i = 0; i < 50; ++i) {
    const IndexList idx = uniform_subsample(16, 4, false, r);
    worst = std::max(worst, worst_case_error(optimal_weights(k, x, idx, target), target, k));
  }
  CHECK(greedy <= worst);
}

TEST_CASE("greedy stops when the span is exhausted") {
  Eigen::MatrixXd x(1, 4);
  x << 0.2, 0.2, 0.2, 0.2;
  const GreedySelection s = greedy_select(x, KernelSpec::gaussian(1.0), Eigen::VectorXd(), 3, GreedyVariant::p);
  CHECK(s.indices == IndexList{0});
  CHECK(s.truncated);
}

TEST_CASE("greedy input validation") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(2, 5);
  const auto k = KernelSpec::gaussian(1.0);
  CHECK_THROWS_AS((void)greedy_select(x, k, Eigen::VectorXd(), 6, GreedyVariant::p), InputError);
  CHECK_THROWS_AS((void)greedy_select(x, k, Eigen::VectorXd(), 2, GreedyVariant::f), InputError);
  CHECK_THROWS_AS((void)parse_greedy_variant("q-greedy"), InputError);
  CHECK(parse_greedy_variant("fp-greedy") == GreedyVariant::f_over_p);
  CHECK(to_string(GreedyVariant::f) == "f-greedy");
  GreedyState state(x, k, Eigen::VectorXd(), 2);
  state.add(1);
  CHECK_THROWS_AS(state.add(1), InputError);
}
