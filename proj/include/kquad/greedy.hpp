#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include <Eigen/Dense>

#include "kquad/kernels.hpp"
#include "kquad/quadrature.hpp"
#include "kquad/sampling.hpp"

namespace kquad {

/// f: largest |residual|; p: largest power function (determinant growth);
/// f_over_p: largest residual^2 / power^2 (steepest residual-norm decrease).
enum class GreedyVariant { f, p, f_over_p };

/// Accepts `f-greedy`, `p-greedy` and `fp-greedy`.
[[nodiscard]] GreedyVariant parse_greedy_variant(std::string_view name);
[[nodiscard]] std::string_view to_string(GreedyVariant variant) noexcept;

/// Points whose squared power function is at or below this value are treated
/// as already in the span and are neither updated nor selected.
inline constexpr double kGreedyStabilityFloor = 1e-10;

/// Incremental Newton-basis state for greedy selection over a fixed
/// candidate set. After t selections:
///   coefficients().topRows(t)  coordinates of every projected feature in the
///                              orthonormal basis u_1..u_t
///   residual()                 f - (interpolant of f on the selected points)
///   power2()                   squared norm of the projected-out feature part
///   f_coefficients()           coordinates of f in u_1..u_t
/// The referenced points must outlive the state.
class GreedyState {
 public:
  GreedyState(const PointMatrix& points, const KernelSpec& kernel, Eigen::VectorXd f_at_points, std::size_t capacity);

  /// Index the variant would select next, or nothing when every remaining
  /// candidate has power2 <= kGreedyStabilityFloor (or capacity is reached).
  [[nodiscard]] std::optional<std::size_t> next_candidate(GreedyVariant variant) const;

  /// Adds point j to the selection and updates all quantities in O(n t).
  void add(std::size_t j);

  [[nodiscard]] std::size_t size() const noexcept { return selected_.size(); }
  [[nodiscard]] const IndexList& selected() const noexcept { return selected_; }
  [[nodiscard]] const Eigen::MatrixXd& coefficients() const noexcept { return coeffs_; }
  [[nodiscard]] const Eigen::VectorXd& residual() const noexcept { return residual_; }
  [[nodiscard]] const Eigen::VectorXd& power2() const noexcept { return power2_; }
  [[nodiscard]] Eigen::VectorXd f_coefficients() const { return f_coeffs_.head(static_cast<Eigen::Index>(size())); }

 private:
  const PointMatrix& points_;
  KernelSpec kernel_;
  Eigen::MatrixXd coeffs_;
  Eigen::VectorXd residual_;
  Eigen::VectorXd power2_;
  Eigen::VectorXd f_coeffs_;
  IndexList selected_;
  std::vector<bool> in_selection_;
};

struct GreedySelection {
  IndexList indices;
  /// Set when the candidates' span was exhausted before m selections.
  bool truncated = false;
};

/// Runs the chosen greedy rule for up to m steps. f_at_points may be empty
/// for the p variant.
[[nodiscard]] GreedySelection greedy_select(const PointMatrix& points, const KernelSpec& kernel,
                                            const Eigen::Ref<const Eigen::VectorXd>& f_at_points, std::size_t m,
                                            GreedyVariant variant);

/// kappa(x,x) - k_t^T K_t^-1 k_t by a dense solve; the determinant ratio
/// det(K_{t+x}) / det(K_t). Throws NumericalError if K_t is singular.
[[nodiscard]] double power_function_bruteforce(const IndexList& selected, const Eigen::Ref<const Eigen::VectorXd>& x,
                                               const KernelSpec& kernel, const PointMatrix& points);

struct GreedyQuadrature {
  QuadratureRule rule;
  GreedySelection selection;
  double select_seconds = 0.0;
  double weight_seconds = 0.0;
};

/// Greedy node selection applied to the target's kernel mean embedding,
/// followed by optimal weights. Uses the empirical measure of `points` by
/// default.
[[nodiscard]] GreedyQuadrature greedy_quadrature(const PointMatrix& points, const KernelSpec& kernel, std::size_t m,
                                                 GreedyVariant variant);
[[nodiscard]] GreedyQuadrature greedy_quadrature(const PointMatrix& points, const KernelSpec& kernel, std::size_t m,
                                                 GreedyVariant variant, const TargetMeasure& target);

}  // namespace kquad
