#include "kquad/greedy.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "kquad/errors.hpp"

namespace kquad {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

GreedyVariant parse_greedy_variant(std::string_view name) {
  if (name == "f-greedy") return GreedyVariant::f;
  if (name == "p-greedy") return GreedyVariant::p;
  if (name == "fp-greedy") return GreedyVariant::f_over_p;
  throw InputError("unknown greedy method '" + std::string(name) + "' (expected f-greedy, p-greedy or fp-greedy)");
}

std::string_view to_string(GreedyVariant variant) noexcept {
  switch (variant) {
    case GreedyVariant::f: return "f-greedy";
    case GreedyVariant::p: return "p-greedy";
    case GreedyVariant::f_over_p: return "fp-greedy";
  }
  return "?";
}

GreedyState::GreedyState(const PointMatrix& points, const KernelSpec& kernel, Eigen::VectorXd f_at_points,
                         std::size_t capacity)
    : points_(points), kernel_(kernel) {
  kernel_.check_points(points_);
  const Eigen::Index n = points_.cols();
  if (n == 0) throw InputError("greedy: no candidate points");
  if (f_at_points.size() == 0) f_at_points = Eigen::VectorXd::Zero(n);
  if (f_at_points.size() != n) throw InputError("greedy: expected one function value per point");
  if (!f_at_points.allFinite()) throw InputError("greedy: non-finite function values");
  const auto cap = static_cast<Eigen::Index>(std::min<std::size_t>(capacity, static_cast<std::size_t>(n)));
  coeffs_ = Eigen::MatrixXd::Zero(cap, n);
  residual_ = std::move(f_at_points);
  power2_ = Eigen::VectorXd::Constant(n, kernel_.diagonal());
  f_coeffs_ = Eigen::VectorXd::Zero(cap);
  in_selection_.assign(static_cast<std::size_t>(n), false);
  selected_.reserve(static_cast<std::size_t>(cap));
}

std::optional<std::size_t> GreedyState::next_candidate(GreedyVariant variant) const {
  if (static_cast<Eigen::Index>(size()) >= coeffs_.rows()) return std::nullopt;
  std::optional<std::size_t> best;
  double best_score = 0.0;
  for (Eigen::Index i = 0; i < power2_.size(); ++i) {
    const double p2 = power2_[i];
    if (in_selection_[static_cast<std::size_t>(i)] || !(p2 > kGreedyStabilityFloor)) continue;
    double score = 0.0;
    switch (variant) {
      case GreedyVariant::p: score = p2; break;
      case GreedyVariant::f: score = std::abs(residual_[i]); break;
      case GreedyVariant::f_over_p: score = residual_[i] * residual_[i] / p2; break;
    }
    // strict comparison keeps the lowest index on ties
    if (!best || score > best_score) {
      best = static_cast<std::size_t>(i);
      best_score = score;
    }
  }
  return best;
}

void GreedyState::add(std::size_t j) {
  const Eigen::Index n = points_.cols();
  const auto k = static_cast<Eigen::Index>(size());
  if (k >= coeffs_.rows()) throw InputError("greedy: selection capacity reached");
  if (j >= static_cast<std::size_t>(n)) throw InputError("greedy: candidate index out of range");
  const auto jj = static_cast<Eigen::Index>(j);
  if (in_selection_[j] || !(power2_[jj] > kGreedyStabilityFloor)) {
    throw InputError("greedy: candidate " + std::to_string(j) + " is already in the span");
  }

  const double norm = std::sqrt(power2_[jj]);
  const Eigen::Index d = points_.rows();
  const double* xj = points_.col(jj).data();

  // <u_{k+1}, phi(x_i)> = (kappa(x_j, x_i) - <P_k phi(x_j), P_k phi(x_i)>) / |P_k^perp phi(x_j)|
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
  const Eigen::VectorXd cj = coeffs_.topRows(k).col(jj);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(power2_[i] > kGreedyStabilityFloor)) continue;
    const double projected = k > 0 ? cj.dot(coeffs_.topRows(k).col(i)) : 0.0;
    row[i] = (kernel_.eval(xj, points_.col(i).data(), d) - projected) / norm;
  }
  coeffs_.row(k) = row;

  f_coeffs_[k] = residual_[jj] / norm;
  residual_ -= f_coeffs_[k] * row.transpose();
  power2_ -= row.transpose().cwiseAbs2();
  power2_ = power2_.cwiseMax(0.0);

  selected_.push_back(j);
  in_selection_[j] = true;
}

GreedySelection greedy_select(const PointMatrix& points, const KernelSpec& kernel,
                              const Eigen::Ref<const Eigen::VectorXd>& f_at_points, std::size_t m,
                              GreedyVariant variant) {
  const auto n = static_cast<std::size_t>(points.cols());
  if (m == 0) throw InputError("greedy: m must be at least 1");
  if (m > n) throw InputError("greedy: m = " + std::to_string(m) + " exceeds n = " + std::to_string(n));
  if (variant != GreedyVariant::p && f_at_points.size() != points.cols()) {
    throw InputError("greedy: the f and fp variants need one function value per point");
  }
  GreedyState state(points, kernel, f_at_points, m);
  GreedySelection out;
  while (state.size() < m) {
    const auto next = state.next_candidate(variant);
    if (!next) {
      out.truncated = true;
      break;
    }
    state.add(*next);
  }
  out.indices = state.selected();
  return out;
}

double power_function_bruteforce(const IndexList& selected, const Eigen::Ref<const Eigen::VectorXd>& x,
                                 const KernelSpec& kernel, const PointMatrix& points) {
  const double kxx = kernel(x, x);
  if (selected.empty()) return kxx;
  const PointMatrix nodes = gather_points(points, selected);
  const Eigen::MatrixXd kt = gram(kernel, nodes);
  PointMatrix xm(x.size(), 1);
  xm.col(0) = x;
  const Eigen::VectorXd kx = gram(kernel, nodes, xm).col(0);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(kt);
  if (!lu.isInvertible()) throw NumericalError("power function: selected Gram matrix is singular");
  return kxx - kx.dot(lu.solve(kx));
}

GreedyQuadrature greedy_quadrature(const PointMatrix& points, const KernelSpec& kernel, std::size_t m,
                                   GreedyVariant variant, const TargetMeasure& target) {
  GreedyQuadrature out;
  const auto t0 = Clock::now();
  Eigen::VectorXd f;
  if (variant != GreedyVariant::p) f = kernel_mean(kernel, points, target);
  out.selection = greedy_select(points, kernel, f, m, variant);
  out.select_seconds = seconds_since(t0);
  const auto t1 = Clock::now();
  out.rule = optimal_weights(kernel, points, out.selection.indices, target);
  out.weight_seconds = seconds_since(t1);
  return out;
}

GreedyQuadrature greedy_quadrature(const PointMatrix& points, const KernelSpec& kernel, std::size_t m,
                                   GreedyVariant variant) {
  return greedy_quadrature(points, kernel, m, variant, TargetMeasure::empirical(points));
}

}  // namespace kquad
