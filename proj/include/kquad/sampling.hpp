#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "kquad/kernels.hpp"
#include "kquad/random.hpp"

namespace kquad {

using IndexList = std::vector<std::size_t>;

enum class ScoreMode { exact, pilot };

/// Ridge leverage scores diag(K (K + lambda n I)^-1) at one regularization,
/// either exact or estimated from a uniform pilot subset.
struct LeverageScores {
  double lambda = 0.0;
  Eigen::VectorXd values;
  ScoreMode mode = ScoreMode::exact;
  std::size_t pilot_size = 0;  // meaningful for ScoreMode::pilot
};

enum class SamplingStrategy { uniform_without_replacement, uniform_with_replacement, arls };

struct SamplerConfig {
  SamplingStrategy strategy = SamplingStrategy::uniform_without_replacement;
  std::size_t m = 1;
  std::optional<double> lambda;            // ARLS only; default from arls_default_lambda
  std::optional<std::size_t> pilot_size;   // ARLS only; default min(n, ceil(4 sqrt n))
  double z_claim = 1.0;
  double lambda0 = 0.0;
  double delta = 0.1;
  std::uint64_t seed = 0;
};

/// Parses `uniform`, `uniform-wr`, `arls:lambda=<float|auto>,pilot=<int|auto>`
/// into a config with m = 1 and seed = 0 (callers fill those in).
[[nodiscard]] SamplerConfig parse_sampler(std::string_view text);
[[nodiscard]] std::string describe(const SamplerConfig& config);

/// m indices in [0, n). Without replacement uses a partial Fisher-Yates
/// shuffle and yields distinct indices.
[[nodiscard]] IndexList uniform_subsample(std::size_t n, std::size_t m, bool with_replacement, Rng& rng);

/// Exact scores from the Gram matrix via its eigendecomposition:
/// l_i = sum_j s_j / (s_j + lambda n) V_ij^2.
[[nodiscard]] LeverageScores exact_rls(const Eigen::Ref<const Eigen::MatrixXd>& gram_matrix, double lambda);

/// Pilot-subset Nystrom estimate of the scores. Draws p pilot points, maps
/// every point to b_i = L^-1 k_p(x_i) with K_p = L L^T and returns
/// b_i^T (B^T B + lambda n I)^-1 b_i. Reduces to exact_rls when p = n.
[[nodiscard]] LeverageScores approx_rls_pilot(const PointMatrix& points, const KernelSpec& kernel, double lambda,
                                              std::size_t pilot_size, Rng& rng);

/// Same estimator with an explicit pilot index set.
[[nodiscard]] LeverageScores approx_rls_with_pilot(const PointMatrix& points, const KernelSpec& kernel, double lambda,
                                                   const IndexList& pilot);

/// m i.i.d. draws with probabilities proportional to the scores.
[[nodiscard]] IndexList sample_proportional(const LeverageScores& scores, std::size_t m, Rng& rng);

/// 19 K^2 log(32 n / delta) / n.
[[nodiscard]] double arls_default_lambda(std::size_t n, double sup_norm_bound, double delta);
/// min(n, ceil(4 sqrt n)).
[[nodiscard]] std::size_t default_pilot_size(std::size_t n);

/// Node indices for a dataset according to `config` (uses config.seed).
[[nodiscard]] IndexList select_nodes(const PointMatrix& points, const KernelSpec& kernel, const SamplerConfig& config);

}  // namespace kquad
