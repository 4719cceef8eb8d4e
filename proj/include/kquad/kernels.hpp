#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "kquad/random.hpp"

namespace kquad {

/// Point sets are stored column-wise: a d x n matrix holds n points of
/// dimension d, so that every point is a contiguous column.
using PointMatrix = Eigen::MatrixXd;

/// Columns of `points` at the given indices, in order.
[[nodiscard]] PointMatrix gather_points(const PointMatrix& points, const std::vector<std::size_t>& indices);

enum class KernelFamily { gaussian, laplacian, periodic_sobolev };

/// Positive-definite kernel selector. Immutable once built.
///
///   gaussian          exp(-|x-y|^2 / (2 sigma^2))
///   laplacian         exp(-|x-y| / sigma)
///   periodic_sobolev  prod_k k_s({x_k - y_k}) with
///                     k_s(t) = 1 + (-1)^(s-1) (2 pi)^(2s) / (2s)! B_2s(t)
class KernelSpec {
 public:
  static KernelSpec gaussian(double bandwidth);
  static KernelSpec laplacian(double scale);
  /// Orders 1, 2 and 3 are supported.
  static KernelSpec periodic_sobolev(int order, int dimension);

  [[nodiscard]] KernelFamily family() const noexcept { return family_; }
  [[nodiscard]] double scale() const noexcept { return scale_; }
  [[nodiscard]] int order() const noexcept { return order_; }
  /// Input dimension the kernel is bound to, or 0 if any dimension works.
  [[nodiscard]] Eigen::Index dimension() const noexcept { return dimension_; }

  /// Checked evaluation: dimensions must agree and coordinates be finite.
  [[nodiscard]] double operator()(const Eigen::Ref<const Eigen::VectorXd>& x,
                                  const Eigen::Ref<const Eigen::VectorXd>& y) const;

  /// Raw evaluation on two length-`dim` coordinate arrays. Symmetric in its
  /// arguments bit for bit.
  [[nodiscard]] double eval(const double* x, const double* y, Eigen::Index dim) const noexcept;

  /// kappa(x, x); the same for every x in all three families.
  [[nodiscard]] double diagonal() const noexcept;

  /// K = sup_x sqrt(kappa(x, x)).
  [[nodiscard]] double sup_norm_bound() const noexcept { return std::sqrt(diagonal()); }

  /// Throws InputError unless `points` has a compatible dimension and only
  /// finite coordinates.
  void check_points(const PointMatrix& points) const;

  [[nodiscard]] std::string describe() const;

 private:
  KernelSpec(KernelFamily family, double scale, int order, Eigen::Index dimension)
      : family_(family), scale_(scale), order_(order), dimension_(dimension) {}

  KernelFamily family_;
  double scale_;
  int order_;
  Eigen::Index dimension_;
};

/// 1-d periodic Sobolev kernel of the given order at offset t, through the
/// Bernoulli polynomial closed form. t is reduced to its fractional part.
[[nodiscard]] double periodic_sobolev_1d(int order, double t);

/// Symmetric Gram matrix of the columns of `x`; each unordered pair is
/// evaluated once.
[[nodiscard]] Eigen::MatrixXd gram(const KernelSpec& kernel, const PointMatrix& x);

/// Cross Gram matrix, entry (i, j) = kappa(x_i, y_j).
[[nodiscard]] Eigen::MatrixXd gram(const KernelSpec& kernel, const PointMatrix& x, const PointMatrix& y);

/// Streams K(x, y) * w in row blocks without materializing the cross Gram
/// matrix. Accumulates in long double.
[[nodiscard]] Eigen::VectorXd gram_times(const KernelSpec& kernel, const PointMatrix& x, const PointMatrix& y,
                                         const Eigen::Ref<const Eigen::VectorXd>& w);

inline constexpr std::size_t kDefaultMedianSubset = 1000;

/// Median of the pairwise Euclidean distances over a uniformly drawn subset
/// of min(subset_size, n) points. Even pair counts use the midpoint.
[[nodiscard]] double median_heuristic(const PointMatrix& x, std::size_t subset_size, Rng& rng);

/// Parsed but unresolved kernel string; the scale may still be "median".
struct KernelDescriptor {
  KernelFamily family = KernelFamily::gaussian;
  std::optional<double> scale;  // empty = median heuristic
  int order = 1;
  int dimension = 1;
};

/// Parses `gaussian:sigma=<float|median>`, `laplacian:sigma=<float|median>`
/// and `sobolev:s=<int>,d=<int>`. The Greek key `σ` is accepted too.
[[nodiscard]] KernelDescriptor parse_kernel(std::string_view text);

/// Builds the kernel, running the median heuristic on `points` when needed.
[[nodiscard]] KernelSpec resolve_kernel(const KernelDescriptor& desc, const PointMatrix& points, Rng& rng,
                                        std::size_t median_subset = kDefaultMedianSubset);

}  // namespace kquad
