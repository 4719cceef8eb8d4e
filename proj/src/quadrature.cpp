#include "kquad/quadrature.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "kquad/errors.hpp"
#include "kquad/numerics.hpp"

namespace kquad {

namespace {

constexpr Eigen::Index kRowBlock = 1024;
constexpr double kNegativeSquareTolerance = 1e-8;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// a^T K(x, x) a using symmetry; each row block is reduced separately and the
// block totals are then added in order.
double quadratic_form(const KernelSpec& kernel, const PointMatrix& x, const Eigen::VectorXd& a) {
  const Eigen::Index n = x.cols();
  const Eigen::Index d = x.rows();
  const double diag = kernel.diagonal();
  long double total = 0.0L;
  for (Eigen::Index start = 0; start < n; start += kRowBlock) {
    const Eigen::Index stop = std::min(n, start + kRowBlock);
    long double block = 0.0L;
    for (Eigen::Index i = start; i < stop; ++i) {
      const double* xi = x.col(i).data();
      long double row = 0.0L;
      for (Eigen::Index j = 0; j < i; ++j) row += static_cast<long double>(kernel.eval(xi, x.col(j).data(), d)) * a[j];
      block += static_cast<long double>(a[i]) * (2.0L * row + static_cast<long double>(diag) * a[i]);
    }
    total += block;
  }
  return static_cast<double>(total);
}

void check_rule(const QuadratureRule& rule, const KernelSpec& kernel) {
  if (rule.nodes.cols() != rule.weights.size()) throw InputError("quadrature rule: node and weight counts differ");
  if (rule.size() == 0) throw InputError("quadrature rule is empty");
  if (!rule.weights.allFinite()) throw InputError("quadrature rule has non-finite weights");
  kernel.check_points(rule.nodes);
}

void check_target_kernel(const TargetMeasure& target, const KernelSpec& kernel) {
  if (!target.is_discrete() && kernel.family() != KernelFamily::periodic_sobolev) {
    throw InputError("the uniform unit-cube target needs a periodic Sobolev kernel (analytic moments)");
  }
  if (kernel.dimension() != 0 && target.dimension() != kernel.dimension()) {
    throw InputError("target dimension does not match the kernel");
  }
}

double clamp_squared_error(double e2) {
  if (e2 < -kNegativeSquareTolerance) {
    std::ostringstream os;
    os << "worst-case error: squared error " << e2 << " is negative beyond rounding";
    throw NumericalError(os.str());
  }
  return std::sqrt(std::max(e2, 0.0));
}

double squared_error(const QuadratureRule& rule, const TargetMeasure& target, const KernelSpec& kernel,
                     double energy) {
  check_rule(rule, kernel);
  check_target_kernel(target, kernel);
  if (rule.nodes.rows() != target.dimension()) throw InputError("rule and target dimensions differ");
  const Eigen::VectorXd mean = kernel_mean(kernel, rule.nodes, target);
  const double self = quadratic_form(kernel, rule.nodes, rule.weights);
  return energy - 2.0 * rule.weights.dot(mean) + self;
}

}  // namespace

TargetMeasure TargetMeasure::empirical(PointMatrix points) {
  const Eigen::Index n = points.cols();
  if (n == 0) throw InputError("empirical target needs at least one point");
  Eigen::VectorXd masses = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  return TargetMeasure(Discrete{std::move(points), std::move(masses)});
}

TargetMeasure TargetMeasure::discrete(PointMatrix points, Eigen::VectorXd masses) {
  if (points.cols() == 0) throw InputError("discrete target needs at least one point");
  if (masses.size() != points.cols()) throw InputError("discrete target: mass count differs from point count");
  if (!masses.allFinite() || masses.minCoeff() < 0.0) throw InputError("discrete target: masses must be nonnegative");
  if (std::abs(masses.sum() - 1.0) > 1e-12) throw InputError("discrete target: masses must sum to 1");
  if (!points.allFinite()) throw InputError("discrete target: non-finite coordinates");
  return TargetMeasure(Discrete{std::move(points), std::move(masses)});
}

TargetMeasure TargetMeasure::uniform_unit_cube(Eigen::Index dimension) {
  if (dimension < 1) throw InputError("uniform target dimension must be at least 1");
  return TargetMeasure(UniformUnitCube{dimension});
}

Eigen::Index TargetMeasure::dimension() const noexcept {
  if (const auto* d = std::get_if<Discrete>(&state_)) return d->points.rows();
  return std::get<UniformUnitCube>(state_).dimension;
}

const PointMatrix& TargetMeasure::points() const {
  if (const auto* d = std::get_if<Discrete>(&state_)) return d->points;
  throw InputError("target has no discrete support");
}

const Eigen::VectorXd& TargetMeasure::masses() const {
  if (const auto* d = std::get_if<Discrete>(&state_)) return d->masses;
  throw InputError("target has no discrete support");
}

Eigen::VectorXd kernel_mean(const KernelSpec& kernel, const PointMatrix& nodes, const TargetMeasure& target) {
  check_target_kernel(target, kernel);
  kernel.check_points(nodes);
  if (nodes.rows() != target.dimension()) throw InputError("node and target dimensions differ");
  // Every 1-d periodic Sobolev factor integrates to 1 over a period.
  if (!target.is_discrete()) return Eigen::VectorXd::Ones(nodes.cols());
  return gram_times(kernel, nodes, target.points(), target.masses());
}

double target_energy(const KernelSpec& kernel, const TargetMeasure& target) {
  check_target_kernel(target, kernel);
  if (!target.is_discrete()) return 1.0;
  kernel.check_points(target.points());
  return quadratic_form(kernel, target.points(), target.masses());
}

QuadratureRule optimal_weights(const KernelSpec& kernel, const PointMatrix& nodes, const TargetMeasure& target) {
  if (nodes.cols() == 0) throw InputError("optimal_weights: no nodes");
  const Eigen::VectorXd mean = kernel_mean(kernel, nodes, target);
  const Eigen::MatrixXd km = gram(kernel, nodes);
  QuadratureRule rule;
  rule.weights = pinv_apply(km, mean, default_pinv_tolerance(km.rows()));
  rule.nodes = nodes;
  return rule;
}

QuadratureRule optimal_weights(const KernelSpec& kernel, const PointMatrix& points, const IndexList& node_indices,
                               const TargetMeasure& target) {
  QuadratureRule rule = optimal_weights(kernel, gather_points(points, node_indices), target);
  rule.source_indices = node_indices;
  return rule;
}

QuadratureRule equal_weight_rule(const PointMatrix& points, const IndexList& node_indices) {
  if (node_indices.empty()) throw InputError("equal_weight_rule: no nodes");
  QuadratureRule rule;
  rule.nodes = gather_points(points, node_indices);
  rule.weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(node_indices.size()),
                                           1.0 / static_cast<double>(node_indices.size()));
  rule.source_indices = node_indices;
  return rule;
}

double integrate(const QuadratureRule& rule, const Eigen::Ref<const Eigen::VectorXd>& f_at_nodes) {
  if (f_at_nodes.size() != rule.weights.size()) throw InputError("integrate: expected one value per node");
  return rule.weights.dot(f_at_nodes);
}

double worst_case_error(const QuadratureRule& rule, const TargetMeasure& target, const KernelSpec& kernel) {
  return clamp_squared_error(squared_error(rule, target, kernel, target_energy(kernel, target)));
}

ErrorEvaluator::ErrorEvaluator(KernelSpec kernel, TargetMeasure target)
    : kernel_(kernel), target_(std::move(target)), energy_(kquad::target_energy(kernel_, target_)) {}

double ErrorEvaluator::operator()(const QuadratureRule& rule) const {
  return clamp_squared_error(squared_error(rule, target_, kernel_, energy_));
}

Witness worst_case_witness(const QuadratureRule& rule, const TargetMeasure& target, const KernelSpec& kernel) {
  check_rule(rule, kernel);
  const PointMatrix& support = target.points();
  if (support.rows() != rule.nodes.rows()) throw InputError("rule and target dimensions differ");
  const Eigen::Index n = support.cols();
  const Eigen::Index m = rule.size();

  Witness out;
  out.centers.resize(support.rows(), n + m);
  out.centers << support, rule.nodes;
  Eigen::VectorXd diff(n + m);
  diff << target.masses(), -rule.weights;

  const Eigen::MatrixXd joint = gram(kernel, out.centers);
  const double norm2 = diff.dot(joint * diff);
  const double scale = diff.cwiseAbs().dot(joint.cwiseAbs() * diff.cwiseAbs());
  if (!(norm2 > 64.0 * std::numeric_limits<double>::epsilon() * scale)) {
    out.coefficients = Eigen::VectorXd::Zero(n + m);
    out.gap = 0.0;
    return out;
  }
  out.coefficients = diff / std::sqrt(norm2);

  // f*(z) at every center, then both integrals of f*.
  const Eigen::VectorXd values = joint * out.coefficients;
  const double target_integral = target.masses().dot(values.head(n));
  const double rule_integral = rule.weights.dot(values.tail(m));
  out.gap = std::abs(target_integral - rule_integral);
  return out;
}

double mmd(const WeightedPoints& a, const WeightedPoints& b, const KernelSpec& kernel) {
  if (a.points.cols() != a.weights.size() || b.points.cols() != b.weights.size()) {
    throw InputError("mmd: point and weight counts differ");
  }
  if (!a.weights.allFinite() || !b.weights.allFinite()) throw InputError("mmd: non-finite weights");
  kernel.check_points(a.points);
  kernel.check_points(b.points);
  if (a.points.rows() != b.points.rows()) throw InputError("mmd: point sets have different dimensions");
  const double aa = quadratic_form(kernel, a.points, a.weights);
  const double bb = quadratic_form(kernel, b.points, b.weights);
  const double ab = a.weights.dot(gram_times(kernel, a.points, b.points, b.weights));
  return clamp_squared_error(aa - 2.0 * ab + bb);
}

Compression compress(const PointMatrix& points, const KernelSpec& kernel, const SamplerConfig& sampler,
                     const TargetMeasure& target) {
  kernel.check_points(points);
  Compression out;
  const auto t0 = Clock::now();
  const IndexList nodes = select_nodes(points, kernel, sampler);
  out.sample_seconds = seconds_since(t0);
  const auto t1 = Clock::now();
  out.rule = optimal_weights(kernel, points, nodes, target);
  out.weight_seconds = seconds_since(t1);
  return out;
}

Compression compress(const PointMatrix& points, const KernelSpec& kernel, const SamplerConfig& sampler) {
  return compress(points, kernel, sampler, TargetMeasure::empirical(points));
}

}  // namespace kquad
