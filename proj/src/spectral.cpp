#include "kquad/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kquad/errors.hpp"
#include "kquad/numerics.hpp"
#include "kquad/options.hpp"

namespace kquad {

namespace {

constexpr double kNegativeSpectrumTolerance = 1e-12;
constexpr double kFitThreshold = 1e-12;

struct LineFit {
  double slope;
  double intercept;
  double r2;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InputError("slope fit needs at least two distinct abscissae");
  const double slope = sxy / sxx;
  const double r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 0.0;
  return {slope, my - slope * mx, r2};
}

// Leading half of the eigenvalues above the relative threshold.
std::size_t fit_range(const Eigen::Ref<const Eigen::VectorXd>& spectrum) {
  if (spectrum.size() == 0 || !(spectrum[0] > 0.0)) throw InputError("decay fit: spectrum must start positive");
  std::size_t above = 0;
  while (above < static_cast<std::size_t>(spectrum.size()) &&
         spectrum[static_cast<Eigen::Index>(above)] > kFitThreshold * spectrum[0]) {
    ++above;
  }
  const std::size_t count = above / 2;
  if (count < 3) throw InputError("decay fit: fewer than three usable eigenvalues");
  return count;
}

}  // namespace

DecayModel DecayModel::polynomial(double gamma, double a_gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InputError("polynomial decay exponent gamma must lie in (0, 1]");
  if (!(a_gamma > 0.0)) throw InputError("polynomial decay amplitude must be positive");
  return {DecayKind::polynomial, gamma, a_gamma};
}

DecayModel DecayModel::exponential(double beta, double a_beta) {
  if (!(beta > 0.0)) throw InputError("exponential decay rate beta must be positive");
  if (!(a_beta > 0.0)) throw InputError("exponential decay amplitude must be positive");
  return {DecayKind::exponential, beta, a_beta};
}

double DecayModel::eigenvalue_bound(std::size_t i) const {
  const auto x = static_cast<double>(i);
  if (kind == DecayKind::polynomial) return amplitude * std::pow(x, -1.0 / rate);
  return amplitude * std::exp(-rate * x);
}

double effective_dimension(const Eigen::Ref<const Eigen::VectorXd>& spectrum, double lambda) {
  if (!(lambda > 0.0)) throw InputError("effective dimension: lambda must be positive");
  double total = 0.0;
  for (Eigen::Index j = 0; j < spectrum.size(); ++j) {
    const double s = spectrum[j];
    if (s < -kNegativeSpectrumTolerance) throw InputError("effective dimension: negative spectrum entry");
    const double sp = std::max(s, 0.0);
    total += sp / (sp + lambda);
  }
  return total;
}

Eigen::VectorXd empirical_spectrum(const Eigen::Ref<const Eigen::MatrixXd>& gram_matrix) {
  const SymmetricEigen eig = eig_sym(gram_matrix);
  return eig.values / static_cast<double>(gram_matrix.rows());
}

double d_infinity_empirical(const LeverageScores& scores) {
  if (scores.values.size() == 0) throw InputError("d_infinity: empty scores");
  return static_cast<double>(scores.values.size()) * scores.values.maxCoeff();
}

double effective_dimension_bound(const DecayModel& model, double lambda, std::optional<double> sup_norm_bound) {
  if (!(lambda > 0.0)) throw InputError("effective dimension bound: lambda must be positive");
  if (model.kind == DecayKind::exponential) return std::log1p(model.amplitude / lambda) / model.rate;
  if (model.rate < 1.0) return model.amplitude / (1.0 - model.rate) * std::pow(lambda, -model.rate);
  if (!sup_norm_bound) throw InputError("effective dimension bound for gamma = 1 needs the kernel bound K");
  return (*sup_norm_bound) * (*sup_norm_bound) / lambda;
}

bool DecayBoundReport::all_hold() const noexcept {
  return std::all_of(rows.begin(), rows.end(), [](const DecayBoundRow& r) { return r.margin() >= 0.0; });
}

DecayBoundReport check_decay_bounds(const DecayModel& model, const Eigen::Ref<const Eigen::VectorXd>& spectrum,
                                    const std::vector<double>& lambdas, std::optional<double> sup_norm_bound) {
  for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
    const double bound = model.eigenvalue_bound(static_cast<std::size_t>(i + 1));
    if (spectrum[i] > bound * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "spectrum violates the decay model at index " << (i + 1) << ": " << spectrum[i] << " > " << bound;
      throw InputError(os.str());
    }
  }
  DecayBoundReport report;
  report.rows.reserve(lambdas.size());
  for (const double lambda : lambdas) {
    report.rows.push_back({lambda, effective_dimension(spectrum, lambda),
                           effective_dimension_bound(model, lambda, sup_norm_bound)});
  }
  return report;
}

DecayModel fit_polynomial_decay(const Eigen::Ref<const Eigen::VectorXd>& spectrum) {
  const std::size_t count = fit_range(spectrum);
  std::vector<double> x(count);
  std::vector<double> y(count);
  for (std::size_t i = 0; i < count; ++i) {
    x[i] = std::log(static_cast<double>(i + 1));
    y[i] = std::log(spectrum[static_cast<Eigen::Index>(i)]);
  }
  const LineFit fit = least_squares(x, y);
  const double gamma = fit.slope < -1.0 ? -1.0 / fit.slope : 1.0;
  double amplitude = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    amplitude = std::max(amplitude, spectrum[static_cast<Eigen::Index>(i)] * std::pow(static_cast<double>(i + 1), 1.0 / gamma));
  }
  return DecayModel::polynomial(gamma, amplitude);
}

DecayModel fit_exponential_decay(const Eigen::Ref<const Eigen::VectorXd>& spectrum) {
  const std::size_t count = fit_range(spectrum);
  std::vector<double> x(count);
  std::vector<double> y(count);
  for (std::size_t i = 0; i < count; ++i) {
    x[i] = static_cast<double>(i + 1);
    y[i] = std::log(spectrum[static_cast<Eigen::Index>(i)]);
  }
  const LineFit fit = least_squares(x, y);
  if (!(fit.slope < 0.0)) throw InputError("exponential decay fit: spectrum is not decreasing");
  const double beta = -fit.slope;
  double amplitude = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    amplitude = std::max(amplitude, spectrum[static_cast<Eigen::Index>(i)] * std::exp(beta * static_cast<double>(i + 1)));
  }
  return DecayModel::exponential(beta, amplitude);
}

double lambda_rule(LambdaRule rule, double count, double sup_norm_bound, double delta) {
  if (!(count > 0.0) || !(sup_norm_bound > 0.0)) throw InputError("lambda rule: arguments must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("lambda rule: delta must lie in (0, 1)");
  const double k2 = sup_norm_bound * sup_norm_bound;
  if (rule == LambdaRule::uniform) return 12.0 * k2 * std::log(count / delta) / count;
  return 19.0 * k2 * std::log(32.0 * count / delta) / count;
}

std::size_t subsample_size_rule(double n, const DecayModel& model, double z, double delta, double sup_norm_bound) {
  if (!(n > 0.0) || !(sup_norm_bound > 0.0)) throw InputError("subsample size rule: arguments must be positive");
  if (z < 1.0) throw InputError("subsample size rule: z must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("subsample size rule: delta must lie in (0, 1)");
  const double k2 = sup_norm_bound * sup_norm_bound;
  double m = 0.0;
  if (model.kind == DecayKind::polynomial) {
    const double g = model.rate;
    const double c_gamma = g < 1.0 ? model.amplitude / (1.0 - g) : k2;
    m = std::pow(n, g) * std::pow(std::log(32.0 * n / delta), 1.0 - g) * 78.0 * c_gamma * z * z /
        std::pow(19.0 * k2, g);
  } else {
    const double lead = std::max(334.0, 78.0 * z * z / model.rate);
    const double inner = std::log(std::max(2.0 * model.amplitude / (19.0 * k2), 48.0 / delta) * n);
    m = lead * inner * inner;
  }
  return static_cast<std::size_t>(std::ceil(m));
}

double RateModel::operator()(double m) const {
  if (!(m >= 2.0)) throw InputError("rate curves need m >= 2");
  const double lm = std::log(m);
  switch (shape) {
    case RateShape::monte_carlo: return 1.0 / std::sqrt(m);
    case RateShape::sobolev: return std::pow(lm / m, s / d);
    case RateShape::uniform_polynomial: return std::pow(lm / m, 1.0 - gamma / 2.0);
    case RateShape::uniform_exponential: return lm / m;
    case RateShape::arls_polynomial: return std::pow(lm / m, 1.0 / (2.0 * gamma));
    case RateShape::arls_exponential: return std::pow(m, 0.25) * std::exp(-std::sqrt(m) / c);
  }
  return 0.0;
}

std::string RateModel::label() const {
  std::ostringstream os;
  switch (shape) {
    case RateShape::monte_carlo: os << "monte-carlo"; break;
    case RateShape::sobolev: os << "sobolev:s=" << s << ",d=" << d; break;
    case RateShape::uniform_polynomial: os << "uniform-poly:gamma=" << gamma; break;
    case RateShape::uniform_exponential: os << "uniform-exp"; break;
    case RateShape::arls_polynomial: os << "arls-poly:gamma=" << gamma; break;
    case RateShape::arls_exponential: os << "arls-exp:c=" << c; break;
  }
  return os.str();
}

RateModel parse_rate_model(std::string_view text) {
  const OptionString opt = parse_option_string(text);
  RateModel model;
  auto gamma = [&] {
    const double g = parse_double(opt.at("gamma", text), "decay exponent gamma");
    if (!(g > 0.0 && g <= 1.0)) throw InputError("gamma must lie in (0, 1]");
    return g;
  };
  if (opt.head == "monte-carlo") {
    model.shape = RateShape::monte_carlo;
  } else if (opt.head == "sobolev") {
    model.shape = RateShape::sobolev;
    model.s = parse_double(opt.at("s", text), "Sobolev order");
    model.d = opt.has("d") ? parse_double(opt.at("d", text), "dimension") : 1.0;
    if (!(model.s > 0.0 && model.d > 0.0)) throw InputError("sobolev rate needs positive s and d");
  } else if (opt.head == "uniform-poly") {
    model.shape = RateShape::uniform_polynomial;
    model.gamma = gamma();
  } else if (opt.head == "uniform-exp") {
    model.shape = RateShape::uniform_exponential;
  } else if (opt.head == "arls-poly") {
    model.shape = RateShape::arls_polynomial;
    model.gamma = gamma();
  } else if (opt.head == "arls-exp") {
    model.shape = RateShape::arls_exponential;
    model.c = parse_double(opt.at("c", text), "rate constant c");
    if (!(model.c > 0.0)) throw InputError("arls-exp needs c > 0");
  } else {
    throw InputError("unknown rate model '" + opt.head + "'");
  }
  return model;
}

RatePrediction theoretical_rate_curve(const RateModel& model, const std::vector<double>& m_values, double constant) {
  RatePrediction out;
  out.label = model.label();
  out.m_values = m_values;
  out.predicted_error.reserve(m_values.size());
  for (const double m : m_values) out.predicted_error.push_back(constant * model(m));
  return out;
}

SlopeFit rate_slope(const std::vector<double>& m_values, const std::vector<double>& errors) {
  if (m_values.size() != errors.size()) throw InputError("rate_slope: m and error counts differ");
  if (m_values.size() < 3) throw InputError("rate_slope: need at least three points");
  std::vector<double> x(m_values.size());
  std::vector<double> y(errors.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(m_values[i] > 0.0)) throw InputError("rate_slope: m values must be positive");
    if (!(errors[i] > 0.0)) throw InputError("rate_slope: errors must be positive");
    x[i] = std::log(m_values[i]);
    y[i] = std::log(errors[i]);
  }
  const LineFit fit = least_squares(x, y);
  return {fit.slope, fit.intercept, fit.r2};
}

}  // namespace kquad
