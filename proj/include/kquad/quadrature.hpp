#pragma once

#include <variant>

#include <Eigen/Dense>

#include "kquad/kernels.hpp"
#include "kquad/sampling.hpp"

namespace kquad {

/// m nodes (columns) with real weights of unconstrained sign and sum.
struct QuadratureRule {
  PointMatrix nodes;
  Eigen::VectorXd weights;
  /// Row of each node in the dataset it was drawn from; empty when the
  /// nodes were supplied directly.
  IndexList source_indices;

  [[nodiscard]] Eigen::Index size() const noexcept { return weights.size(); }
};

/// Integration target: a discrete measure or the uniform distribution on
/// [0,1)^d (analytic moments, periodic Sobolev kernels only).
class TargetMeasure {
 public:
  /// Uniform masses 1/n on the given points.
  static TargetMeasure empirical(PointMatrix points);
  static TargetMeasure discrete(PointMatrix points, Eigen::VectorXd masses);
  static TargetMeasure uniform_unit_cube(Eigen::Index dimension);

  [[nodiscard]] bool is_discrete() const noexcept { return std::holds_alternative<Discrete>(state_); }
  [[nodiscard]] Eigen::Index dimension() const noexcept;
  /// Support and masses of a discrete target; InputError otherwise.
  [[nodiscard]] const PointMatrix& points() const;
  [[nodiscard]] const Eigen::VectorXd& masses() const;

 private:
  struct Discrete {
    PointMatrix points;
    Eigen::VectorXd masses;
  };
  struct UniformUnitCube {
    Eigen::Index dimension;
  };
  explicit TargetMeasure(std::variant<Discrete, UniformUnitCube> s) : state_(std::move(s)) {}

  std::variant<Discrete, UniformUnitCube> state_;
};

/// Kernel mean embedding of the target evaluated at each node:
/// v_j = E_{x ~ target} kappa(node_j, x).
[[nodiscard]] Eigen::VectorXd kernel_mean(const KernelSpec& kernel, const PointMatrix& nodes,
                                          const TargetMeasure& target);

/// Double integral of the kernel against the target, sum_ij a_i a_j k(x_i, x_j)
/// for a discrete target (row blocks of 1024, long double accumulation).
[[nodiscard]] double target_energy(const KernelSpec& kernel, const TargetMeasure& target);

/// w = K_m^+ v with v = kernel_mean(nodes, target); the minimum norm
/// solution when K_m is singular (repeated nodes and the like).
[[nodiscard]] QuadratureRule optimal_weights(const KernelSpec& kernel, const PointMatrix& nodes,
                                             const TargetMeasure& target);
[[nodiscard]] QuadratureRule optimal_weights(const KernelSpec& kernel, const PointMatrix& points,
                                             const IndexList& node_indices, const TargetMeasure& target);

/// Rule with equal weights 1/m on the selected points (Monte-Carlo estimator).
[[nodiscard]] QuadratureRule equal_weight_rule(const PointMatrix& points, const IndexList& node_indices);

/// sum_j w_j f(node_j).
[[nodiscard]] double integrate(const QuadratureRule& rule, const Eigen::Ref<const Eigen::VectorXd>& f_at_nodes);

/// Worst-case integration error over the unit ball of the RKHS:
/// sqrt(iint k - 2 sum_j w_j int k(., x_j) + w^T K_m w). Squared values in
/// [-1e-8, 0) are clamped to zero, lower ones raise NumericalError.
[[nodiscard]] double worst_case_error(const QuadratureRule& rule, const TargetMeasure& target,
                                      const KernelSpec& kernel);

/// Caches the target's double integral so repeated error evaluations on the
/// same target only pay the O(mn) cross term.
class ErrorEvaluator {
 public:
  ErrorEvaluator(KernelSpec kernel, TargetMeasure target);

  [[nodiscard]] double operator()(const QuadratureRule& rule) const;
  [[nodiscard]] double target_energy() const noexcept { return energy_; }
  [[nodiscard]] const TargetMeasure& target() const noexcept { return target_; }
  [[nodiscard]] const KernelSpec& kernel() const noexcept { return kernel_; }

 private:
  KernelSpec kernel_;
  TargetMeasure target_;
  double energy_;
};

/// Unit-norm RKHS function attaining the worst-case error, expanded over the
/// target support followed by the nodes.
struct Witness {
  PointMatrix centers;
  Eigen::VectorXd coefficients;
  /// |I(f*) - I_rule(f*)|, computed by evaluating f* pointwise.
  double gap = 0.0;
};

[[nodiscard]] Witness worst_case_witness(const QuadratureRule& rule, const TargetMeasure& target,
                                         const KernelSpec& kernel);

struct WeightedPoints {
  PointMatrix points;
  Eigen::VectorXd weights;
};

/// RKHS distance between the embeddings of two weighted point sets.
[[nodiscard]] double mmd(const WeightedPoints& a, const WeightedPoints& b, const KernelSpec& kernel);

struct Compression {
  QuadratureRule rule;
  double sample_seconds = 0.0;
  double weight_seconds = 0.0;
  [[nodiscard]] double total_seconds() const noexcept { return sample_seconds + weight_seconds; }
};

/// Samples m nodes from the dataset and fits optimal weights against its
/// empirical measure.
[[nodiscard]] Compression compress(const PointMatrix& points, const KernelSpec& kernel, const SamplerConfig& sampler);

/// Same, against an arbitrary target (e.g. the analytic uniform measure).
[[nodiscard]] Compression compress(const PointMatrix& points, const KernelSpec& kernel, const SamplerConfig& sampler,
                                   const TargetMeasure& target);

}  // namespace kquad
