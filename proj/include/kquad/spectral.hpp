#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "kquad/sampling.hpp"

namespace kquad {

enum class DecayKind { polynomial, exponential };

/// Eigenvalue decay hypothesis: sigma_i <= a i^(-1/gamma) (polynomial, rate =
/// gamma in (0,1]) or sigma_i <= a exp(-beta i) (exponential, rate = beta).
/// Indices i start at 1.
struct DecayModel {
  DecayKind kind = DecayKind::polynomial;
  double rate = 1.0;
  double amplitude = 1.0;

  static DecayModel polynomial(double gamma, double a_gamma);
  static DecayModel exponential(double beta, double a_beta);

  /// Bound on the i-th eigenvalue (1-based).
  [[nodiscard]] double eigenvalue_bound(std::size_t i) const;
};

/// Sum_j sigma_j / (sigma_j + lambda).
[[nodiscard]] double effective_dimension(const Eigen::Ref<const Eigen::VectorXd>& spectrum, double lambda);

/// Eigenvalues of K_n divided by n, descending; the empirical proxy for the
/// covariance spectrum shared by the leverage-score and lambda rules.
[[nodiscard]] Eigen::VectorXd empirical_spectrum(const Eigen::Ref<const Eigen::MatrixXd>& gram_matrix);

/// n * max_i l_i, the empirical counterpart of sup_x |C_lambda^-1/2 phi(x)|^2.
[[nodiscard]] double d_infinity_empirical(const LeverageScores& scores);

/// Effective-dimension bound implied by the model:
///   polynomial, gamma < 1:  a / (1 - gamma) * lambda^-gamma
///   polynomial, gamma = 1:  K^2 / lambda   (needs sup_norm_bound)
///   exponential:            log(1 + a / lambda) / beta
[[nodiscard]] double effective_dimension_bound(const DecayModel& model, double lambda,
                                               std::optional<double> sup_norm_bound = std::nullopt);

struct DecayBoundRow {
  double lambda = 0.0;
  double effective_dimension = 0.0;
  double bound = 0.0;
  [[nodiscard]] double margin() const noexcept { return bound - effective_dimension; }
};

struct DecayBoundReport {
  std::vector<DecayBoundRow> rows;
  [[nodiscard]] bool all_hold() const noexcept;
};

/// Verifies the spectrum against the model (InputError naming the first
/// offending index otherwise), then compares d_eff to the model's bound at
/// each lambda.
[[nodiscard]] DecayBoundReport check_decay_bounds(const DecayModel& model,
                                                  const Eigen::Ref<const Eigen::VectorXd>& spectrum,
                                                  const std::vector<double>& lambdas,
                                                  std::optional<double> sup_norm_bound = std::nullopt);

/// Diagnostic fits over the leading half of the eigenvalues above
/// 1e-12 * sigma_1. The rate comes from least squares on the log spectrum;
/// the amplitude is the smallest one making the model hold on that range.
[[nodiscard]] DecayModel fit_polynomial_decay(const Eigen::Ref<const Eigen::VectorXd>& spectrum);
[[nodiscard]] DecayModel fit_exponential_decay(const Eigen::Ref<const Eigen::VectorXd>& spectrum);

enum class LambdaRule { uniform, arls };

/// uniform: 12 K^2 log(count / delta) / count, count = m;
/// arls:    19 K^2 log(32 count / delta) / count, count = n.
[[nodiscard]] double lambda_rule(LambdaRule rule, double count, double sup_norm_bound, double delta);

/// Subsample size prescribed for leverage-score sampling, rounded up:
///   polynomial:  n^g log(32n/delta)^(1-g) 78 c_g z^2 / (19 K^2)^g
///   exponential: max(334, 78 z^2 / beta) log(max(2a/(19K^2), 48/delta) n)^2
[[nodiscard]] std::size_t subsample_size_rule(double n, const DecayModel& model, double z, double delta,
                                              double sup_norm_bound);

enum class RateShape {
  monte_carlo,          // m^-1/2
  sobolev,              // (log m / m)^(s/d)
  uniform_polynomial,   // (log m / m)^(1 - gamma/2)
  uniform_exponential,  // log m / m
  arls_polynomial,      // (log m / m)^(1 / (2 gamma))
  arls_exponential,     // m^(1/4) exp(-sqrt(m) / c)
};

struct RateModel {
  RateShape shape = RateShape::monte_carlo;
  double s = 1.0;      // sobolev
  double d = 1.0;      // sobolev
  double gamma = 1.0;  // polynomial shapes
  double c = 1.0;      // arls_exponential

  [[nodiscard]] double operator()(double m) const;
  [[nodiscard]] std::string label() const;
};

/// Accepts `monte-carlo`, `sobolev:s=<int>,d=<int>`, `uniform-poly:gamma=<x>`,
/// `uniform-exp`, `arls-poly:gamma=<x>`, `arls-exp:c=<x>`.
[[nodiscard]] RateModel parse_rate_model(std::string_view text);

struct RatePrediction {
  std::vector<double> m_values;
  std::vector<double> predicted_error;
  std::string label;
};

/// constant * shape(m) for every m (each m >= 2).
[[nodiscard]] RatePrediction theoretical_rate_curve(const RateModel& model, const std::vector<double>& m_values,
                                                    double constant = 1.0);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Coefficient of determination; 0 by convention when the errors are
  /// constant.
  double r2 = 0.0;
};

/// Least squares of log(error) on log(m). Needs at least three pairs with
/// positive errors and at least two distinct m.
[[nodiscard]] SlopeFit rate_slope(const std::vector<double>& m_values, const std::vector<double>& errors);

}  // namespace kquad
