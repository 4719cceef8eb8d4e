#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "kquad/errors.hpp"
#include "kquad/experiment.hpp"
#include "kquad/greedy.hpp"
#include "kquad/kernels.hpp"
#include "kquad/quadrature.hpp"
#include "kquad/sampling.hpp"
#include "kquad/spectral.hpp"

namespace py = pybind11;

namespace {

// numpy arrays arrive as n x d (one point per row); the library stores d x n.
using RowPoints = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

kquad::PointMatrix to_points(const Eigen::Ref<const RowPoints>& x) { return x.transpose(); }

RowPoints from_points(const kquad::PointMatrix& p) { return p.transpose(); }

kquad::TargetMeasure make_target(const Eigen::Ref<const RowPoints>& x, const std::optional<Eigen::VectorXd>& masses,
                                 bool uniform_cube) {
  if (uniform_cube) return kquad::TargetMeasure::uniform_unit_cube(x.cols());
  if (masses) return kquad::TargetMeasure::discrete(to_points(x), *masses);
  return kquad::TargetMeasure::empirical(to_points(x));
}

}  // namespace

PYBIND11_MODULE(_kquad, m) {
  m.doc() = "Kernel quadrature by Nystrom subsampling (C++ core).";

  py::register_exception<kquad::InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<kquad::NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<kquad::KernelSpec>(m, "Kernel")
      .def_static("gaussian", &kquad::KernelSpec::gaussian, py::arg("sigma"))
      .def_static("laplacian", &kquad::KernelSpec::laplacian, py::arg("sigma"))
      .def_static("periodic_sobolev", &kquad::KernelSpec::periodic_sobolev, py::arg("s"), py::arg("d") = 1)
      .def_property_readonly("scale", &kquad::KernelSpec::scale)
      .def_property_readonly("diagonal", &kquad::KernelSpec::diagonal)
      .def_property_readonly("sup_norm_bound", &kquad::KernelSpec::sup_norm_bound)
      .def("__call__",
           [](const kquad::KernelSpec& k, const Eigen::VectorXd& x, const Eigen::VectorXd& y) { return k(x, y); })
      .def("__repr__", [](const kquad::KernelSpec& k) { return "<Kernel " + k.describe() + ">"; })
      .def("describe", &kquad::KernelSpec::describe);

  m.def(
      "make_kernel",
      [](const std::string& spec, const Eigen::Ref<const RowPoints>& x, std::uint64_t seed, std::size_t subset) {
        kquad::Rng rng(kquad::median_seed(seed));
        return kquad::resolve_kernel(kquad::parse_kernel(spec), to_points(x), rng, subset);
      },
      py::arg("spec"), py::arg("x"), py::arg("seed") = 0, py::arg("median_subset") = kquad::kDefaultMedianSubset,
      "Builds a kernel from a spec string; 'median' bandwidths are estimated on x.");

  m.def("periodic_sobolev_1d", &kquad::periodic_sobolev_1d, py::arg("s"), py::arg("t"));

  m.def(
      "gram", [](const kquad::KernelSpec& k, const Eigen::Ref<const RowPoints>& x) { return kquad::gram(k, to_points(x)); },
      py::arg("kernel"), py::arg("x"));

  m.def(
      "median_heuristic",
      [](const Eigen::Ref<const RowPoints>& x, std::size_t subset, std::uint64_t seed) {
        kquad::Rng rng(seed);
        return kquad::median_heuristic(to_points(x), subset, rng);
      },
      py::arg("x"), py::arg("subset") = kquad::kDefaultMedianSubset, py::arg("seed") = 0);

  m.def(
      "compress",
      [](const Eigen::Ref<const RowPoints>& x, const kquad::KernelSpec& k, const std::string& method, std::size_t size,
         std::uint64_t seed) {
        const kquad::MethodSpec spec = kquad::parse_method(method);
        const kquad::PointMatrix points = to_points(x);
        const kquad::TargetMeasure target = kquad::TargetMeasure::empirical(points);
        const kquad::MethodRun run =
            kquad::run_method(spec, points, k, target, size, kquad::trial_seed(seed, spec.name, size, 0));
        return py::make_tuple(from_points(run.rule.nodes), run.rule.weights, run.rule.source_indices);
      },
      py::arg("x"), py::arg("kernel"), py::arg("method"), py::arg("m"), py::arg("seed") = 0,
      "Returns (nodes, weights, source_indices) of an m-node rule for the empirical measure of x.");

  m.def(
      "optimal_weights",
      [](const kquad::KernelSpec& k, const Eigen::Ref<const RowPoints>& nodes, const Eigen::Ref<const RowPoints>& x,
         std::optional<Eigen::VectorXd> masses, bool uniform_cube) {
        return kquad::optimal_weights(k, to_points(nodes), make_target(x, masses, uniform_cube)).weights;
      },
      py::arg("kernel"), py::arg("nodes"), py::arg("x"), py::arg("masses") = py::none(),
      py::arg("uniform_cube") = false);

  m.def(
      "worst_case_error",
      [](const kquad::KernelSpec& k, const Eigen::Ref<const RowPoints>& nodes, const Eigen::VectorXd& weights,
         const Eigen::Ref<const RowPoints>& x, std::optional<Eigen::VectorXd> masses, bool uniform_cube) {
        kquad::QuadratureRule rule;
        rule.nodes = to_points(nodes);
        rule.weights = weights;
        return kquad::worst_case_error(rule, make_target(x, masses, uniform_cube), k);
      },
      py::arg("kernel"), py::arg("nodes"), py::arg("weights"), py::arg("x"), py::arg("masses") = py::none(),
      py::arg("uniform_cube") = false);

  m.def(
      "mmd",
      [](const kquad::KernelSpec& k, const Eigen::Ref<const RowPoints>& a, const Eigen::VectorXd& wa,
         const Eigen::Ref<const RowPoints>& b, const Eigen::VectorXd& wb) {
        return kquad::mmd({to_points(a), wa}, {to_points(b), wb}, k);
      },
      py::arg("kernel"), py::arg("a"), py::arg("wa"), py::arg("b"), py::arg("wb"));

  m.def(
      "exact_rls", [](const Eigen::MatrixXd& gram, double lambda) { return kquad::exact_rls(gram, lambda).values; },
      py::arg("gram"), py::arg("lam"));

  m.def(
      "approx_rls",
      [](const Eigen::Ref<const RowPoints>& x, const kquad::KernelSpec& k, double lambda, std::size_t pilot,
         std::uint64_t seed) {
        kquad::Rng rng(seed);
        return kquad::approx_rls_pilot(to_points(x), k, lambda, pilot, rng).values;
      },
      py::arg("x"), py::arg("kernel"), py::arg("lam"), py::arg("pilot"), py::arg("seed") = 0);

  m.def(
      "greedy_select",
      [](const Eigen::Ref<const RowPoints>& x, const kquad::KernelSpec& k, std::size_t size, const std::string& variant,
         std::optional<Eigen::VectorXd> f) {
        const kquad::PointMatrix points = to_points(x);
        const Eigen::VectorXd values = f ? *f : Eigen::VectorXd();
        return kquad::greedy_select(points, k, values, size, kquad::parse_greedy_variant(variant)).indices;
      },
      py::arg("x"), py::arg("kernel"), py::arg("m"), py::arg("variant") = "p-greedy", py::arg("f") = py::none());

  m.def("effective_dimension", [](const Eigen::VectorXd& s, double lambda) { return kquad::effective_dimension(s, lambda); },
        py::arg("spectrum"), py::arg("lam"));

  m.def(
      "lambda_rule",
      [](const std::string& rule, double count, double sup_norm_bound, double delta) {
        if (rule != "uniform" && rule != "arls") throw kquad::InputError("rule must be 'uniform' or 'arls'");
        return kquad::lambda_rule(rule == "uniform" ? kquad::LambdaRule::uniform : kquad::LambdaRule::arls, count,
                                  sup_norm_bound, delta);
      },
      py::arg("rule"), py::arg("count"), py::arg("sup_norm_bound"), py::arg("delta") = 0.1);

  m.def(
      "rate_slope",
      [](const std::vector<double>& ms, const std::vector<double>& errors) {
        const kquad::SlopeFit fit = kquad::rate_slope(ms, errors);
        return py::make_tuple(fit.slope, fit.intercept, fit.r2);
      },
      py::arg("m"), py::arg("errors"), "Returns (slope, intercept, r2) of log(error) against log(m).");

  m.def(
      "run_experiment",
      [](const std::string& config_path, std::size_t workers) {
        kquad::ExperimentConfig config = kquad::load_config(config_path);
        if (workers > 0) config.workers = workers;
        kquad::ExperimentResult result;
        {
          py::gil_scoped_release release;
          result = kquad::run_experiment(config);
        }
        py::list rows;
        for (const auto& r : result.rows) {
          py::dict d;
          d["method"] = r.method;
          d["m"] = r.m;
          d["trial"] = r.trial;
          d["error"] = r.error;
          d["sample_time_s"] = r.sample_time_s;
          d["weight_time_s"] = r.weight_time_s;
          d["total_time_s"] = r.total_time_s;
          rows.append(d);
        }
        return rows;
      },
      py::arg("config"), py::arg("workers") = 0, "Runs a config file and returns the raw rows as dicts.");
}
