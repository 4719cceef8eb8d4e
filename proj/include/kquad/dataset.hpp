#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "kquad/kernels.hpp"

namespace kquad {

struct Dataset {
  PointMatrix points;  // d x n
  std::string name;
  bool standardized = false;
  /// Per-feature mean and population standard deviation removed by
  /// standardize(); empty otherwise.
  Eigen::VectorXd means;
  Eigen::VectorXd scales;
  /// Generating component of each point (synthetic mixtures only).
  std::vector<int> labels;

  [[nodiscard]] Eigen::Index size() const noexcept { return points.cols(); }
  [[nodiscard]] Eigen::Index dimension() const noexcept { return points.rows(); }
};

/// Centers every feature and scales it to unit population variance.
/// Constant features are only centered.
void standardize(Dataset& dataset);

/// Reads a numeric table, one point per row. A first row that does not parse
/// as numbers is taken as a header.
[[nodiscard]] Dataset load_csv(std::istream& in, bool standardize_features, char delimiter = ',',
                               std::string name = "csv");
[[nodiscard]] Dataset load_csv(const std::filesystem::path& path, bool standardize_features, char delimiter = ',');

enum class SyntheticKind { uniform_cube, gaussian_mixture };

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::uniform_cube;
  int dimension = 1;
  int components = 1;       // gaussian_mixture
  double separation = 5.0;  // gaussian_mixture
};

/// Accepts `uniform_cube:d=<int>` and `gaussian_mixture:d=<int>,k=<int>,sep=<float>`.
[[nodiscard]] SyntheticSpec parse_synthetic(std::string_view text);

/// Component means of the mixture: k points spread evenly on a circle of
/// radius `separation` in the first two coordinates (on a line with spacing
/// `separation` when d = 1).
[[nodiscard]] PointMatrix mixture_centers(int dimension, int components, double separation);

/// uniform_cube: i.i.d. uniform on [0,1)^d. gaussian_mixture: equal-weight
/// mixture of unit-covariance Gaussians around mixture_centers().
/// Deterministic given the seed.
[[nodiscard]] Dataset gen_synthetic(const SyntheticSpec& spec, std::size_t n, std::uint64_t seed);

}  // namespace kquad
