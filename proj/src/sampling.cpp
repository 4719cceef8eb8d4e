#include "kquad/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "kquad/errors.hpp"
#include "kquad/numerics.hpp"
#include "kquad/options.hpp"

namespace kquad {

namespace {

constexpr int kMaxJitterRetries = 6;

bool usable_factor(const Eigen::LLT<Eigen::MatrixXd>& llt, double floor) {
  if (llt.info() != Eigen::Success) return false;
  const Eigen::VectorXd diag = llt.matrixLLT().diagonal();
  return diag.allFinite() && diag.minCoeff() * diag.minCoeff() > floor;
}

}  // namespace

SamplerConfig parse_sampler(std::string_view text) {
  const OptionString opt = parse_option_string(text);
  SamplerConfig config;
  if (opt.head == "uniform") {
    config.strategy = SamplingStrategy::uniform_without_replacement;
  } else if (opt.head == "uniform-wr") {
    config.strategy = SamplingStrategy::uniform_with_replacement;
  } else if (opt.head == "arls") {
    config.strategy = SamplingStrategy::arls;
    if (opt.has("lambda") && opt.at("lambda", text) != "auto") {
      config.lambda = parse_double(opt.at("lambda", text), "ARLS lambda");
      if (!(*config.lambda > 0.0) || !std::isfinite(*config.lambda)) throw InputError("ARLS lambda must be positive and finite");
    }
    if (opt.has("pilot") && opt.at("pilot", text) != "auto") {
      const auto p = parse_int(opt.at("pilot", text), "ARLS pilot size");
      if (p < 1) throw InputError("ARLS pilot size must be at least 1");
      config.pilot_size = static_cast<std::size_t>(p);
    }
    if (opt.has("z")) config.z_claim = parse_double(opt.at("z", text), "ARLS z");
    if (opt.has("delta")) config.delta = parse_double(opt.at("delta", text), "ARLS delta");
    if (opt.has("lambda0")) config.lambda0 = parse_double(opt.at("lambda0", text), "ARLS lambda0");
    if (config.z_claim < 1.0) throw InputError("ARLS z must be at least 1");
    if (!(config.delta > 0.0 && config.delta < 1.0)) throw InputError("ARLS delta must lie in (0, 1)");
  } else {
    throw InputError("unknown sampling strategy '" + opt.head + "' (expected uniform, uniform-wr or arls)");
  }
  return config;
}

std::string describe(const SamplerConfig& config) {
  switch (config.strategy) {
    case SamplingStrategy::uniform_without_replacement: return "uniform";
    case SamplingStrategy::uniform_with_replacement: return "uniform-wr";
    case SamplingStrategy::arls: break;
  }
  std::ostringstream os;
  os.precision(17);
  os << "arls:lambda=";
  if (config.lambda) os << *config.lambda; else os << "auto";
  os << ",pilot=";
  if (config.pilot_size) os << *config.pilot_size; else os << "auto";
  return os.str();
}

IndexList uniform_subsample(std::size_t n, std::size_t m, bool with_replacement, Rng& rng) {
  if (n == 0) throw InputError("uniform_subsample: empty population");
  if (m == 0) throw InputError("uniform_subsample: m must be at least 1");
  IndexList out(m);
  if (with_replacement) {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (auto& v : out) v = pick(rng);
    return out;
  }
  if (m > n) {
    throw InputError("uniform_subsample: m = " + std::to_string(m) + " exceeds n = " + std::to_string(n) +
                     " without replacement");
  }
  IndexList perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(perm[i], perm[pick(rng)]);
  }
  std::copy_n(perm.begin(), m, out.begin());
  return out;
}

LeverageScores exact_rls(const Eigen::Ref<const Eigen::MatrixXd>& gram_matrix, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InputError("exact_rls: lambda must be positive");
  const Eigen::Index n = gram_matrix.rows();
  if (n == 0 || gram_matrix.cols() != n) throw InputError("exact_rls: Gram matrix must be square and nonempty");

  const SymmetricEigen eig = eig_sym(gram_matrix);
  const double scale = std::max(std::abs(eig.values[0]), gram_matrix.cwiseAbs().maxCoeff());
  const double tol = 64.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon() * scale;
  const double smallest = eig.values[n - 1];
  if (smallest < -tol) {
    std::ostringstream os;
    os << "exact_rls: Gram matrix is not positive semidefinite (eigenvalue " << smallest << ")";
    throw NumericalError(os.str());
  }

  const double ridge = lambda * static_cast<double>(n);
  Eigen::VectorXd filter(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double s = std::max(eig.values[j], 0.0);
    filter[j] = s / (s + ridge);
  }
  LeverageScores out;
  out.lambda = lambda;
  out.mode = ScoreMode::exact;
  out.values = eig.vectors.cwiseAbs2() * filter;
  return out;
}

LeverageScores approx_rls_with_pilot(const PointMatrix& points, const KernelSpec& kernel, double lambda,
                                     const IndexList& pilot) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InputError("approx_rls: lambda must be positive");
  kernel.check_points(points);
  const auto n = static_cast<std::size_t>(points.cols());
  if (pilot.empty() || pilot.size() > n) throw InputError("approx_rls: pilot size must lie in [1, n]");
  for (const auto i : pilot) {
    if (i >= n) throw InputError("approx_rls: pilot index out of range");
  }

  const PointMatrix pilot_points = gather_points(points, pilot);
  Eigen::MatrixXd kp = gram(kernel, pilot_points);
  const auto p = static_cast<Eigen::Index>(pilot.size());
  const double mean_diag = kp.trace() / static_cast<double>(p);
  const double floor = 1e-14 * mean_diag;

  Eigen::LLT<Eigen::MatrixXd> llt(kp);
  double jitter = 1e-12 * mean_diag;
  for (int retry = 0; !usable_factor(llt, floor); ++retry) {
    if (retry == kMaxJitterRetries) {
      throw NumericalError("approx_rls: pilot Gram matrix is numerically singular even with jitter; "
                           "use a larger pilot or a larger lambda");
    }
    llt.compute(kp + jitter * Eigen::MatrixXd::Identity(p, p));
    jitter *= 10.0;
  }

  // Columns of bt are the pilot features b_i = L^-1 k_p(x_i).
  Eigen::MatrixXd bt = gram(kernel, pilot_points, points);
  llt.matrixL().solveInPlace(bt);

  Eigen::MatrixXd reg = bt * bt.transpose();
  reg.diagonal().array() += lambda * static_cast<double>(n);
  const Eigen::LLT<Eigen::MatrixXd> reg_llt(reg);
  if (reg_llt.info() != Eigen::Success) throw NumericalError("approx_rls: regularized system is not positive definite");
  reg_llt.matrixL().solveInPlace(bt);

  LeverageScores out;
  out.lambda = lambda;
  out.mode = ScoreMode::pilot;
  out.pilot_size = pilot.size();
  out.values = bt.colwise().squaredNorm().transpose();
  return out;
}

LeverageScores approx_rls_pilot(const PointMatrix& points, const KernelSpec& kernel, double lambda,
                                std::size_t pilot_size, Rng& rng) {
  const auto n = static_cast<std::size_t>(points.cols());
  if (pilot_size < 1 || pilot_size > n) throw InputError("approx_rls: pilot size must lie in [1, n]");
  const IndexList pilot = uniform_subsample(n, pilot_size, false, rng);
  return approx_rls_with_pilot(points, kernel, lambda, pilot);
}

IndexList sample_proportional(const LeverageScores& scores, std::size_t m, Rng& rng) {
  if (m == 0) throw InputError("sample_proportional: m must be at least 1");
  const Eigen::VectorXd& v = scores.values;
  if (v.size() == 0 || !v.allFinite() || v.minCoeff() < 0.0) {
    throw InputError("sample_proportional: scores must be finite and nonnegative");
  }
  if (!(v.sum() > 0.0)) throw InputError("sample_proportional: all scores are zero");
  std::discrete_distribution<std::size_t> dist(v.data(), v.data() + v.size());
  IndexList out(m);
  for (auto& i : out) i = dist(rng);
  return out;
}

double arls_default_lambda(std::size_t n, double sup_norm_bound, double delta) {
  const double nn = static_cast<double>(n);
  return 19.0 * sup_norm_bound * sup_norm_bound * std::log(32.0 * nn / delta) / nn;
}

std::size_t default_pilot_size(std::size_t n) {
  const auto p = static_cast<std::size_t>(std::ceil(4.0 * std::sqrt(static_cast<double>(n))));
  return std::min(n, p);
}

IndexList select_nodes(const PointMatrix& points, const KernelSpec& kernel, const SamplerConfig& config) {
  const auto n = static_cast<std::size_t>(points.cols());
  Rng rng(config.seed);
  switch (config.strategy) {
    case SamplingStrategy::uniform_without_replacement: return uniform_subsample(n, config.m, false, rng);
    case SamplingStrategy::uniform_with_replacement: return uniform_subsample(n, config.m, true, rng);
    case SamplingStrategy::arls: {
      const double lambda = config.lambda ? *config.lambda
                                          : arls_default_lambda(n, kernel.sup_norm_bound(), config.delta);
      const std::size_t p = config.pilot_size ? std::min(*config.pilot_size, n) : default_pilot_size(n);
      const LeverageScores scores = approx_rls_pilot(points, kernel, lambda, p, rng);
      return sample_proportional(scores, config.m, rng);
    }
  }
  throw InputError("unknown sampling strategy");
}

}  // namespace kquad
