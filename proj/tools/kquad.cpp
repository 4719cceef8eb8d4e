// kquad: command line front end.
//
//   kquad run <config> [--workers N] [--output raw.csv] [--summary summary.csv]
//   kquad compress --input data.csv --kernel <spec> --method <name> --m <int> --seed <int> --output rule.csv
//   kquad rates --summary summary.csv --model <spec> [--output rates.csv]
//
// Exit status: 0 ok, 1 bad input, 2 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>

#include "kquad/errors.hpp"
#include "kquad/experiment.hpp"
#include "kquad/quadrature.hpp"
#include "kquad/rule_io.hpp"

namespace {

constexpr int kExitInput = 1;
constexpr int kExitNumerical = 2;

struct RunArgs {
  std::string config;
  std::size_t workers = 0;
  std::string output;
  std::string summary;
};

struct CompressArgs {
  std::string input;
  std::string kernel;
  std::string method;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  std::string output;
  bool standardize = false;
  std::string delimiter = "comma";
};

struct RatesArgs {
  std::string summary;
  std::string model;
  std::string output;
};

void cmd_run(const RunArgs& args) {
  kquad::ExperimentConfig config = kquad::load_config(args.config);
  if (args.workers > 0) config.workers = args.workers;
  if (!args.output.empty()) config.output = args.output;
  if (!args.summary.empty()) config.summary = args.summary;
  if (config.output.empty()) throw kquad::InputError("no output path: set 'output' in the config or pass --output");
  if (config.summary.empty()) {
    config.summary = config.output;
    config.summary.replace_filename(config.output.stem().string() + "_summary.csv");
  }

  const kquad::ExperimentResult result = kquad::run_experiment(config);
  std::ostringstream raw;
  kquad::write_raw_csv(raw, result);
  kquad::write_csv_file(config.output, raw.str());
  std::ostringstream summary;
  kquad::write_summary_csv(summary, kquad::summarize(result));
  kquad::write_csv_file(config.summary, summary.str());

  std::cerr << "dataset " << result.dataset_name << " (n=" << result.n << "), kernel " << result.kernel << "\n"
            << result.rows.size() << " rows -> " << config.output.string() << "\n"
            << "summary -> " << config.summary.string() << "\n";
}

char delimiter_char(const std::string& name) {
  if (name == "comma" || name == ",") return ',';
  if (name == "semicolon" || name == ";") return ';';
  if (name == "tab") return '\t';
  if (name == "space") return ' ';
  throw kquad::InputError("unknown delimiter '" + name + "'");
}

void cmd_compress(const CompressArgs& args) {
  const kquad::Dataset data = kquad::load_csv(args.input, args.standardize, delimiter_char(args.delimiter));
  const auto n = static_cast<std::size_t>(data.size());
  if (args.m < 1) throw kquad::InputError("--m must be at least 1");
  if (args.m > n) throw kquad::InputError("--m = " + std::to_string(args.m) + " exceeds n = " + std::to_string(n));

  kquad::Rng median_rng(kquad::median_seed(args.seed));
  const kquad::KernelSpec kernel = kquad::resolve_kernel(kquad::parse_kernel(args.kernel), data.points, median_rng);
  const kquad::MethodSpec method = kquad::parse_method(args.method);
  const kquad::ErrorEvaluator evaluate(kernel, kquad::TargetMeasure::empirical(data.points));
  const kquad::MethodRun run = kquad::run_method(method, data.points, kernel, evaluate.target(), args.m,
                                                 kquad::trial_seed(args.seed, method.name, args.m, 0));
  kquad::write_rule_csv(args.output, run.rule);

  std::cerr << "n=" << n << " d=" << data.dimension() << " m=" << run.rule.size() << " kernel=" << kernel.describe()
            << " method=" << method.name << "\n"
            << "worst_case_error=" << kquad::format_double(evaluate(run.rule))
            << " weight_sum=" << kquad::format_double(run.rule.weights.sum()) << "\n";
}

void cmd_rates(const RatesArgs& args) {
  const auto summary = kquad::read_summary_csv(std::filesystem::path(args.summary));
  const kquad::RateModel model = kquad::parse_rate_model(args.model);
  const kquad::RateReport report = kquad::rate_report(summary, model);

  std::ostringstream csv;
  kquad::write_rate_csv(csv, report);
  if (args.output.empty()) {
    std::cout << csv.str();
  } else {
    kquad::write_csv_file(args.output, csv.str());
  }
  for (const auto& fit : report.fits) {
    std::cerr << fit.method << ": constant=" << kquad::format_double(fit.constant);
    if (fit.has_slope) {
      std::cerr << " slope=" << kquad::format_double(fit.slope.slope) << " r2=" << kquad::format_double(fit.slope.r2);
    } else {
      std::cerr << " slope=n/a (fewer than 3 positive errors)";
    }
    std::cerr << " model=" << report.model << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel quadrature by Nystrom subsampling"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run an experiment sweep described by a config file");
  run->add_option("config", run_args.config, "Config file")->required();
  run->add_option("--workers", run_args.workers, "Worker threads (KQUAD_THREADS still caps this)");
  run->add_option("--output", run_args.output, "Raw CSV path (overrides the config)");
  run->add_option("--summary", run_args.summary, "Summary CSV path (overrides the config)");

  CompressArgs compress_args;
  auto* compress = app.add_subcommand("compress", "Compress a CSV sample into a weighted quadrature rule");
  compress->add_option("--input", compress_args.input, "Input CSV, one point per row")->required();
  compress->add_option("--kernel", compress_args.kernel, "Kernel spec, e.g. gaussian:sigma=median")->required();
  compress->add_option("--method", compress_args.method, "uniform, uniform-wr, arls, monte-carlo, p-greedy, ...")
      ->required();
  compress->add_option("--m", compress_args.m, "Number of nodes")->required();
  compress->add_option("--seed", compress_args.seed, "Random seed")->required();
  compress->add_option("--output", compress_args.output, "Output rule CSV")->required();
  compress->add_flag("--standardize", compress_args.standardize, "Center and scale every column first");
  compress->add_option("--delimiter", compress_args.delimiter, "comma, semicolon, tab or space");

  RatesArgs rates_args;
  auto* rates = app.add_subcommand("rates", "Fit convergence slopes and overlay a theoretical rate");
  rates->add_option("--summary", rates_args.summary, "Summary CSV written by 'kquad run'")->required();
  rates->add_option("--model", rates_args.model, "Rate model, e.g. sobolev:s=1,d=1 or monte-carlo")->required();
  rates->add_option("--output", rates_args.output, "Output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*run) cmd_run(run_args);
    if (*compress) cmd_compress(compress_args);
    if (*rates) cmd_rates(rates_args);
  } catch (const kquad::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const kquad::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
