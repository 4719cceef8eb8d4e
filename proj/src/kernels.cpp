#include "kquad/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <vector>

#include "kquad/errors.hpp"
#include "kquad/options.hpp"

namespace kquad {

namespace {

constexpr double kPi = std::numbers::pi;

// (-1)^(s-1) (2 pi)^(2s) / (2s)!
constexpr double sobolev_coefficient(int order) {
  switch (order) {
    case 1: return 2.0 * kPi * kPi;
    case 2: return -2.0 * kPi * kPi * kPi * kPi / 3.0;
    default: return 4.0 * kPi * kPi * kPi * kPi * kPi * kPi / 45.0;
  }
}

// Bernoulli polynomials B_2, B_4, B_6 in Horner form.
double bernoulli_even(int order, double t) {
  switch (order) {
    case 1: return (t - 1.0) * t + 1.0 / 6.0;
    case 2: return ((t - 2.0) * t + 1.0) * t * t - 1.0 / 30.0;
    default: return ((((t - 3.0) * t + 2.5) * t) * t - 0.5) * t * t + 1.0 / 42.0;
  }
}

// 1 + 2 zeta(2s)
double sobolev_diagonal_1d(int order) {
  switch (order) {
    case 1: return 1.0 + kPi * kPi / 3.0;
    case 2: return 1.0 + std::pow(kPi, 4) / 45.0;
    default: return 1.0 + 2.0 * std::pow(kPi, 6) / 945.0;
  }
}

}  // namespace

KernelSpec KernelSpec::gaussian(double bandwidth) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw InputError("gaussian bandwidth must be positive and finite");
  }
  return KernelSpec(KernelFamily::gaussian, bandwidth, 0, 0);
}

KernelSpec KernelSpec::laplacian(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InputError("laplacian scale must be positive and finite");
  return KernelSpec(KernelFamily::laplacian, scale, 0, 0);
}

KernelSpec KernelSpec::periodic_sobolev(int order, int dimension) {
  if (order < 1 || order > 3) throw InputError("periodic Sobolev order must be 1, 2 or 3");
  if (dimension < 1) throw InputError("periodic Sobolev dimension must be at least 1");
  return KernelSpec(KernelFamily::periodic_sobolev, 0.0, order, dimension);
}

double periodic_sobolev_1d(int order, double t) {
  double f = t - std::floor(t);
  f = std::min(f, 1.0 - f);  // B_2s is symmetric about 1/2
  return 1.0 + sobolev_coefficient(order) * bernoulli_even(order, f);
}

double KernelSpec::eval(const double* x, const double* y, Eigen::Index dim) const noexcept {
  switch (family_) {
    case KernelFamily::gaussian: {
      double r2 = 0.0;
      for (Eigen::Index k = 0; k < dim; ++k) {
        const double dx = x[k] - y[k];
        r2 += dx * dx;
      }
      return std::exp(-r2 / (2.0 * scale_ * scale_));
    }
    case KernelFamily::laplacian: {
      double r2 = 0.0;
      for (Eigen::Index k = 0; k < dim; ++k) {
        const double dx = x[k] - y[k];
        r2 += dx * dx;
      }
      return std::exp(-std::sqrt(r2) / scale_);
    }
    case KernelFamily::periodic_sobolev: {
      double v = 1.0;
      for (Eigen::Index k = 0; k < dim; ++k) v *= periodic_sobolev_1d(order_, std::abs(x[k] - y[k]));
      return v;
    }
  }
  return 0.0;
}

double KernelSpec::operator()(const Eigen::Ref<const Eigen::VectorXd>& x,
                              const Eigen::Ref<const Eigen::VectorXd>& y) const {
  if (x.size() != y.size()) throw InputError("kernel evaluation: point dimensions differ");
  if (dimension_ != 0 && x.size() != dimension_) {
    throw InputError("kernel evaluation: expected dimension " + std::to_string(dimension_) + ", got " +
                     std::to_string(x.size()));
  }
  if (!x.allFinite() || !y.allFinite()) throw InputError("kernel evaluation: non-finite coordinate");
  return eval(x.data(), y.data(), x.size());
}

double KernelSpec::diagonal() const noexcept {
  if (family_ != KernelFamily::periodic_sobolev) return 1.0;
  return std::pow(sobolev_diagonal_1d(order_), static_cast<double>(dimension_));
}

void KernelSpec::check_points(const PointMatrix& points) const {
  if (dimension_ != 0 && points.rows() != dimension_) {
    throw InputError("kernel expects points of dimension " + std::to_string(dimension_) + ", got " +
                     std::to_string(points.rows()));
  }
  if (points.rows() == 0) throw InputError("points have dimension 0");
  if (!points.allFinite()) throw InputError("points contain non-finite coordinates");
}

std::string KernelSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (family_) {
    case KernelFamily::gaussian: os << "gaussian:sigma=" << scale_; break;
    case KernelFamily::laplacian: os << "laplacian:sigma=" << scale_; break;
    case KernelFamily::periodic_sobolev: os << "sobolev:s=" << order_ << ",d=" << dimension_; break;
  }
  return os.str();
}

PointMatrix gather_points(const PointMatrix& points, const std::vector<std::size_t>& indices) {
  PointMatrix out(points.rows(), static_cast<Eigen::Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (indices[j] >= static_cast<std::size_t>(points.cols())) throw InputError("point index out of range");
    out.col(static_cast<Eigen::Index>(j)) = points.col(static_cast<Eigen::Index>(indices[j]));
  }
  return out;
}

Eigen::MatrixXd gram(const KernelSpec& kernel, const PointMatrix& x) {
  kernel.check_points(x);
  const Eigen::Index n = x.cols();
  const Eigen::Index d = x.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double* xj = x.col(j).data();
    for (Eigen::Index i = j; i < n; ++i) {
      const double v = kernel.eval(x.col(i).data(), xj, d);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Eigen::MatrixXd gram(const KernelSpec& kernel, const PointMatrix& x, const PointMatrix& y) {
  kernel.check_points(x);
  kernel.check_points(y);
  if (x.rows() != y.rows()) throw InputError("gram: point sets have different dimensions");
  const Eigen::Index d = x.rows();
  Eigen::MatrixXd k(x.cols(), y.cols());
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    const double* yj = y.col(j).data();
    for (Eigen::Index i = 0; i < x.cols(); ++i) k(i, j) = kernel.eval(x.col(i).data(), yj, d);
  }
  return k;
}

Eigen::VectorXd gram_times(const KernelSpec& kernel, const PointMatrix& x, const PointMatrix& y,
                           const Eigen::Ref<const Eigen::VectorXd>& w) {
  kernel.check_points(x);
  kernel.check_points(y);
  if (x.rows() != y.rows()) throw InputError("gram_times: point sets have different dimensions");
  if (w.size() != y.cols()) throw InputError("gram_times: weight vector length does not match the point count");
  const Eigen::Index d = x.rows();
  Eigen::VectorXd out(x.cols());
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    const double* xi = x.col(i).data();
    long double acc = 0.0L;
    for (Eigen::Index j = 0; j < y.cols(); ++j) acc += static_cast<long double>(kernel.eval(xi, y.col(j).data(), d)) * w[j];
    out[i] = static_cast<double>(acc);
  }
  return out;
}

double median_heuristic(const PointMatrix& x, std::size_t subset_size, Rng& rng) {
  const auto n = static_cast<std::size_t>(x.cols());
  if (n < 2) throw InputError("median heuristic needs at least two points");
  if (subset_size < 2) throw InputError("median heuristic subset size must be at least 2");
  if (!x.allFinite()) throw InputError("median heuristic: non-finite coordinates");

  const std::size_t s = std::min(subset_size, n);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (s < n) {
    for (std::size_t i = 0; i < s; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
  }

  std::vector<double> dist;
  dist.reserve(s * (s - 1) / 2);
  for (std::size_t a = 0; a < s; ++a) {
    for (std::size_t b = a + 1; b < s; ++b) {
      dist.push_back((x.col(static_cast<Eigen::Index>(idx[a])) - x.col(static_cast<Eigen::Index>(idx[b]))).norm());
    }
  }
  const std::size_t mid = dist.size() / 2;
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
  double median = dist[mid];
  if (dist.size() % 2 == 0) {
    const double lower = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (lower + median);
  }
  if (!(median > 0.0)) throw InputError("median heuristic: median pairwise distance is zero");
  return median;
}

KernelDescriptor parse_kernel(std::string_view text) {
  const OptionString opt = parse_option_string(text);
  KernelDescriptor desc;
  if (opt.head == "gaussian" || opt.head == "laplacian") {
    desc.family = opt.head == "gaussian" ? KernelFamily::gaussian : KernelFamily::laplacian;
    std::string value = "median";
    if (opt.has("sigma")) {
      value = opt.at("sigma", text);
    } else if (opt.has("σ")) {
      value = opt.at("σ", text);
    }
    if (value != "median") {
      desc.scale = parse_double(value, "kernel scale");
      if (!(*desc.scale > 0.0)) throw InputError("kernel scale must be positive");
    }
  } else if (opt.head == "sobolev") {
    desc.family = KernelFamily::periodic_sobolev;
    desc.order = static_cast<int>(parse_int(opt.at("s", text), "Sobolev order"));
    desc.dimension = static_cast<int>(parse_int(opt.has("d") ? opt.at("d", text) : "1", "Sobolev dimension"));
    (void)KernelSpec::periodic_sobolev(desc.order, desc.dimension);
  } else {
    throw InputError("unknown kernel '" + opt.head + "' (expected gaussian, laplacian or sobolev)");
  }
  return desc;
}

KernelSpec resolve_kernel(const KernelDescriptor& desc, const PointMatrix& points, Rng& rng,
                          std::size_t median_subset) {
  switch (desc.family) {
    case KernelFamily::periodic_sobolev: return KernelSpec::periodic_sobolev(desc.order, desc.dimension);
    case KernelFamily::gaussian:
      return KernelSpec::gaussian(desc.scale ? *desc.scale : median_heuristic(points, median_subset, rng));
    case KernelFamily::laplacian:
      return KernelSpec::laplacian(desc.scale ? *desc.scale : median_heuristic(points, median_subset, rng));
  }
  throw InputError("unknown kernel family");
}

}  // namespace kquad
