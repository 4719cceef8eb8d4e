#include "kquad/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "kquad/errors.hpp"
#include "kquad/greedy.hpp"
#include "kquad/options.hpp"
#include "kquad/rule_io.hpp"

namespace kquad {

namespace {

using Clock = std::chrono::steady_clock;

// Stream tags; kept fixed so existing configs keep their numbers.
constexpr std::uint64_t kDatasetStream = 1;
constexpr std::uint64_t kMedianStream = 2;
constexpr std::uint64_t kTrialStream = 3;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::string_view> split_any(std::string_view text, std::string_view separators) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto start = text.find_first_not_of(separators, pos);
    if (start == std::string_view::npos) break;
    const auto stop = text.find_first_of(separators, start);
    out.push_back(text.substr(start, stop - start));
    pos = stop == std::string_view::npos ? text.size() : stop;
  }
  return out;
}

char parse_delimiter(std::string_view name) {
  if (name == "comma" || name == ",") return ',';
  if (name == "semicolon" || name == ";") return ';';
  if (name == "tab") return '\t';
  if (name == "space" || name == "whitespace") return ' ';
  throw InputError("unknown delimiter '" + std::string(name) + "' (expected comma, semicolon, tab or space)");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  std::filesystem::path p(value);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p;
}

std::string cell_context(const std::string& method, std::size_t m, std::size_t trial) {
  return "method=" + method + ", m=" + std::to_string(m) + ", trial=" + std::to_string(trial) + ": ";
}

}  // namespace

bool MethodSpec::deterministic() const noexcept {
  return kind == MethodKind::f_greedy || kind == MethodKind::p_greedy || kind == MethodKind::fp_greedy;
}

MethodSpec parse_method(std::string_view text) {
  OptionString opt = parse_option_string(text);
  MethodSpec spec;
  spec.name = opt.head;
  if (opt.has("name")) {
    spec.name = opt.at("name", text);
    opt.options.erase("name");
    if (spec.name.find_first_of(",\"\n\r") != std::string::npos) {
      throw InputError("method name '" + spec.name + "' must not contain commas, quotes or newlines");
    }
  }
  const std::string& head = opt.head;
  if (head == "monte-carlo") {
    spec.kind = MethodKind::monte_carlo;
  } else if (head == "uniform") {
    spec.kind = MethodKind::uniform;
  } else if (head == "uniform-wr") {
    spec.kind = MethodKind::uniform_wr;
  } else if (head == "arls") {
    spec.kind = MethodKind::arls;
  } else if (head == "f-greedy") {
    spec.kind = MethodKind::f_greedy;
  } else if (head == "p-greedy") {
    spec.kind = MethodKind::p_greedy;
  } else if (head == "fp-greedy") {
    spec.kind = MethodKind::fp_greedy;
  } else {
    throw InputError("unknown method '" + head +
                     "' (expected monte-carlo, uniform, uniform-wr, arls, f-greedy, p-greedy or fp-greedy)");
  }
  if (spec.kind == MethodKind::arls) {
    std::string sampler_text = "arls";
    char sep = ':';
    for (const auto& [k, v] : opt.options) {
      sampler_text += sep + k + "=" + v;
      sep = ',';
    }
    spec.sampler = parse_sampler(sampler_text);
  } else if (!opt.options.empty()) {
    throw InputError("method '" + head + "' takes no options besides name");
  } else if (spec.kind == MethodKind::uniform) {
    spec.sampler.strategy = SamplingStrategy::uniform_without_replacement;
  } else {
    spec.sampler.strategy = SamplingStrategy::uniform_with_replacement;
  }
  return spec;
}

MethodRun run_method(const MethodSpec& method, const PointMatrix& points, const KernelSpec& kernel,
                     const TargetMeasure& target, std::size_t m, std::uint64_t seed) {
  MethodRun out;
  switch (method.kind) {
    case MethodKind::monte_carlo: {
      const auto t0 = Clock::now();
      Rng rng(seed);
      const IndexList nodes = uniform_subsample(static_cast<std::size_t>(points.cols()), m, true, rng);
      out.sample_seconds = seconds_since(t0);
      const auto t1 = Clock::now();
      out.rule = equal_weight_rule(points, nodes);
      out.weight_seconds = seconds_since(t1);
      return out;
    }
    case MethodKind::uniform:
    case MethodKind::uniform_wr:
    case MethodKind::arls: {
      SamplerConfig sampler = method.sampler;
      sampler.m = m;
      sampler.seed = seed;
      Compression c = compress(points, kernel, sampler, target);
      out.rule = std::move(c.rule);
      out.sample_seconds = c.sample_seconds;
      out.weight_seconds = c.weight_seconds;
      return out;
    }
    case MethodKind::f_greedy:
    case MethodKind::p_greedy:
    case MethodKind::fp_greedy: {
      const GreedyVariant variant = method.kind == MethodKind::f_greedy   ? GreedyVariant::f
                                    : method.kind == MethodKind::p_greedy ? GreedyVariant::p
                                                                          : GreedyVariant::f_over_p;
      GreedyQuadrature g = greedy_quadrature(points, kernel, m, variant, target);
      out.rule = std::move(g.rule);
      out.sample_seconds = g.select_seconds;
      out.weight_seconds = g.weight_seconds;
      return out;
    }
  }
  throw InputError("unknown method");
}

Dataset load_dataset(std::string_view spec, std::uint64_t seed, const std::filesystem::path& base_dir) {
  OptionString opt = parse_option_string(spec);
  const auto take = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = opt.options.find(key);
    if (it == opt.options.end()) return std::nullopt;
    std::string v = it->second;
    opt.options.erase(it);
    return v;
  };
  const auto standardize_opt = take("standardize");

  Dataset data;
  if (opt.head == "csv") {
    const auto path = take("path");
    if (!path) throw InputError("csv dataset needs path=<file>");
    const auto delimiter = take("delimiter");
    if (!opt.options.empty()) throw InputError("unknown csv dataset option '" + opt.options.begin()->first + "'");
    const bool standardize_features = standardize_opt ? parse_bool(*standardize_opt, "standardize") : true;
    data = load_csv(resolve(base_dir, *path), standardize_features, delimiter ? parse_delimiter(*delimiter) : ',');
  } else {
    const auto n_text = take("n");
    if (!n_text) throw InputError("synthetic dataset needs n=<count>");
    const auto n = parse_int(*n_text, "dataset size");
    if (n < 1) throw InputError("dataset size must be at least 1");
    std::string rest = opt.head;
    char sep = ':';
    for (const auto& [k, v] : opt.options) {
      rest += sep + k + "=" + v;
      sep = ',';
    }
    const SyntheticSpec synth = parse_synthetic(rest);
    for (const auto& [k, v] : opt.options) {
      const bool known = k == "d" || (synth.kind == SyntheticKind::gaussian_mixture && (k == "k" || k == "sep"));
      if (!known) throw InputError("unknown option '" + k + "' for dataset " + opt.head);
    }
    data = gen_synthetic(synth, static_cast<std::size_t>(n), derive_seed(seed, {kDatasetStream}));
    if (standardize_opt && parse_bool(*standardize_opt, "standardize")) standardize(data);
  }
  return data;
}

void ExperimentConfig::validate() const {
  if (dataset.empty()) throw InputError("config: dataset is required");
  if (kernel.empty()) throw InputError("config: kernel is required");
  if (methods.empty()) throw InputError("config: at least one method is required");
  if (m_grid.empty()) throw InputError("config: m_grid is empty");
  if (trials < 1) throw InputError("config: trials must be at least 1");
  if (m_grid.front() < 1) throw InputError("config: m_grid entries must be at least 1");
  for (std::size_t i = 1; i < m_grid.size(); ++i) {
    if (m_grid[i] <= m_grid[i - 1]) throw InputError("config: m_grid must be strictly increasing");
  }
  if (median_subset < 2) throw InputError("config: median_subset must be at least 2");
  if (max_points < 1) throw InputError("config: max_n must be at least 1");
  std::set<std::string> names;
  for (const auto& method : methods) {
    if (!names.insert(method.name).second) {
      throw InputError("config: method name '" + method.name + "' appears twice (use name=<label>)");
    }
  }
}

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  ExperimentConfig config;
  config.base_dir = base_dir;
  std::set<std::string, std::less<>> seen;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "config line " + std::to_string(line_no);
    if (eq == std::string_view::npos) throw InputError(where + ": expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw InputError(where + ": empty key");
    if (value.empty()) throw InputError(where + ": empty value for '" + key + "'");
    if (!seen.insert(key).second) throw InputError(where + ": duplicate key '" + key + "'");

    if (key == "dataset") {
      config.dataset = value;
    } else if (key == "kernel") {
      (void)parse_kernel(value);
      config.kernel = value;
    } else if (key == "methods") {
      for (const auto token : split_any(value, " \t;")) config.methods.push_back(parse_method(token));
    } else if (key == "m_grid") {
      for (const auto token : split_any(value, " \t,")) {
        const auto m = parse_int(token, "m_grid entry");
        if (m < 1) throw InputError(where + ": m_grid entries must be at least 1");
        config.m_grid.push_back(static_cast<std::size_t>(m));
      }
    } else if (key == "trials") {
      const auto t = parse_int(value, "trials");
      if (t < 1) throw InputError(where + ": trials must be at least 1");
      config.trials = static_cast<std::size_t>(t);
    } else if (key == "seed") {
      config.master_seed = parse_uint(value, "seed");
    } else if (key == "target") {
      if (value == "empirical") {
        config.target = TargetKind::empirical;
      } else if (value == "uniform_cube") {
        config.target = TargetKind::uniform_cube;
      } else {
        throw InputError(where + ": target must be empirical or uniform_cube");
      }
    } else if (key == "median_subset") {
      config.median_subset = static_cast<std::size_t>(parse_uint(value, "median_subset"));
    } else if (key == "max_n") {
      config.max_points = static_cast<std::size_t>(parse_uint(value, "max_n"));
    } else if (key == "workers") {
      config.workers = static_cast<std::size_t>(parse_uint(value, "workers"));
    } else if (key == "timings") {
      config.timings = parse_bool(value, "timings");
    } else if (key == "output") {
      config.output = resolve(base_dir, value);
    } else if (key == "summary") {
      config.summary = resolve(base_dir, value);
    } else {
      throw InputError(where + ": unknown key '" + key + "'");
    }
  }
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open config '" + path.string() + "'");
  return parse_config(in, path.parent_path());
}

std::size_t resolve_workers(std::size_t requested) {
  std::size_t workers = requested;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("KQUAD_THREADS"); env != nullptr && *env != '\0') {
    const auto cap = parse_int(env, "KQUAD_THREADS");
    if (cap < 1) throw InputError("KQUAD_THREADS must be a positive integer");
    workers = std::min(workers, static_cast<std::size_t>(cap));
  }
  return workers;
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::string_view method, std::size_t m, std::size_t trial) {
  return derive_seed(master_seed, {kTrialStream, fnv1a(method), m, trial});
}

std::uint64_t median_seed(std::uint64_t master_seed) { return derive_seed(master_seed, {kMedianStream}); }

ExperimentResult run_experiment(const ExperimentConfig& config, const Dataset& dataset) {
  config.validate();
  const PointMatrix& points = dataset.points;
  const auto n = static_cast<std::size_t>(points.cols());
  if (n > config.max_points) {
    throw InputError("dataset has " + std::to_string(n) + " points, above max_n = " +
                     std::to_string(config.max_points) + " (error evaluation is quadratic in n)");
  }
  if (config.m_grid.back() > n) {
    throw InputError("m_grid maximum " + std::to_string(config.m_grid.back()) + " exceeds n = " + std::to_string(n));
  }

  Rng median_rng(median_seed(config.master_seed));
  const KernelSpec kernel = resolve_kernel(parse_kernel(config.kernel), points, median_rng, config.median_subset);
  kernel.check_points(points);
  TargetMeasure target = config.target == TargetKind::uniform_cube
                             ? TargetMeasure::uniform_unit_cube(points.rows())
                             : TargetMeasure::empirical(points);
  const ErrorEvaluator evaluate(kernel, std::move(target));
  const TargetMeasure& target_ref = evaluate.target();

  struct Task {
    std::size_t method;
    std::size_t m;
    std::size_t trial;
  };
  std::vector<Task> tasks;
  for (std::size_t a = 0; a < config.methods.size(); ++a) {
    for (const std::size_t m : config.m_grid) {
      const std::size_t runs = config.methods[a].deterministic() ? 1 : config.trials;
      for (std::size_t t = 0; t < runs; ++t) tasks.push_back({a, m, t});
    }
  }

  std::vector<ExperimentRow> done(tasks.size());
  std::vector<std::exception_ptr> failures(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};

  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size() || failed.load()) return;
      const Task& task = tasks[i];
      const MethodSpec& method = config.methods[task.method];
      try {
        const auto t0 = Clock::now();
        const MethodRun run = run_method(method, points, kernel, target_ref, task.m,
                                         trial_seed(config.master_seed, method.name, task.m, task.trial));
        const double total = seconds_since(t0);
        ExperimentRow& row = done[i];
        row.method = method.name;
        row.m = task.m;
        row.trial = task.trial;
        row.error = evaluate(run.rule);
        if (config.timings) {
          row.sample_time_s = run.sample_seconds;
          row.weight_time_s = run.weight_seconds;
          row.total_time_s = total;
        }
      } catch (const InputError& e) {
        failures[i] = std::make_exception_ptr(InputError(cell_context(method.name, task.m, task.trial) + e.what()));
        failed = true;
      } catch (const std::exception& e) {
        failures[i] =
            std::make_exception_ptr(NumericalError(cell_context(method.name, task.m, task.trial) + e.what()));
        failed = true;
      }
    }
  };

  const std::size_t workers = std::min(resolve_workers(config.workers), std::max<std::size_t>(tasks.size(), 1));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  ExperimentResult result;
  result.dataset_name = dataset.name;
  result.n = n;
  result.kernel = kernel.describe();
  result.rows.reserve(config.methods.size() * config.m_grid.size() * config.trials);
  // Tasks are already in (method, m, trial) order; deterministic methods ran
  // once and their row is repeated for every trial index.
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (config.methods[tasks[i].method].deterministic()) {
      for (std::size_t t = 0; t < config.trials; ++t) {
        ExperimentRow row = done[i];
        row.trial = t;
        result.rows.push_back(std::move(row));
      }
    } else {
      result.rows.push_back(done[i]);
    }
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const Dataset dataset = load_dataset(config.dataset, config.master_seed, config.base_dir);
  return run_experiment(config, dataset);
}

double median(std::vector<double> values) {
  if (values.empty()) throw InputError("median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double sample_std(const std::vector<double>& values) {
  if (values.empty()) throw InputError("standard deviation of an empty set");
  if (values.size() == 1) return 0.0;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

std::vector<SummaryRow> summarize(const ExperimentResult& result) {
  if (result.rows.empty()) throw InputError("summarize: empty result");
  std::vector<SummaryRow> out;
  std::size_t i = 0;
  while (i < result.rows.size()) {
    std::size_t j = i;
    std::vector<double> errors;
    std::vector<double> times;
    while (j < result.rows.size() && result.rows[j].method == result.rows[i].method &&
           result.rows[j].m == result.rows[i].m) {
      errors.push_back(result.rows[j].error);
      times.push_back(result.rows[j].total_time_s);
      ++j;
    }
    SummaryRow row;
    row.method = result.rows[i].method;
    row.m = result.rows[i].m;
    row.trials = errors.size();
    row.error_median = median(errors);
    row.error_std = sample_std(errors);
    row.time_median = median(times);
    out.push_back(std::move(row));
    i = j;
  }
  return out;
}

void write_raw_csv(std::ostream& out, const ExperimentResult& result) {
  out << "method,m,trial,error,sample_time_s,weight_time_s,total_time_s\n";
  for (const auto& r : result.rows) {
    out << r.method << ',' << r.m << ',' << r.trial << ',' << format_double(r.error) << ','
        << format_double(r.sample_time_s) << ',' << format_double(r.weight_time_s) << ','
        << format_double(r.total_time_s) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& summary) {
  out << "method,m,trials,error_median,error_std,time_median\n";
  for (const auto& r : summary) {
    out << r.method << ',' << r.m << ',' << r.trials << ',' << format_double(r.error_median) << ','
        << format_double(r.error_std) << ',' << format_double(r.time_median) << '\n';
  }
}

void write_csv_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

std::vector<SummaryRow> read_summary_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("summary CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  for (const auto cell : split_any(line, ",")) header.emplace_back(trim(cell));
  std::map<std::string, std::size_t> column;
  for (std::size_t c = 0; c < header.size(); ++c) column[header[c]] = c;
  for (const char* required : {"method", "m", "error_median"}) {
    if (!column.count(required)) throw InputError(std::string("summary CSV lacks column '") + required + "'");
  }
  std::vector<SummaryRow> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view rest = line;
    for (;;) {
      const auto comma = rest.find(',');
      cells.push_back(trim(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    const std::string where = "summary CSV line " + std::to_string(line_no);
    if (cells.size() != header.size()) throw InputError(where + ": wrong number of fields");
    SummaryRow row;
    row.method = std::string(cells[column["method"]]);
    const auto m = parse_int(cells[column["m"]], where + " m");
    if (m < 1) throw InputError(where + ": m must be positive");
    row.m = static_cast<std::size_t>(m);
    row.error_median = parse_double(cells[column["error_median"]], where + " error_median");
    if (column.count("trials")) row.trials = static_cast<std::size_t>(parse_uint(cells[column["trials"]], where));
    if (column.count("error_std")) row.error_std = parse_double(cells[column["error_std"]], where);
    if (column.count("time_median")) row.time_median = parse_double(cells[column["time_median"]], where);
    out.push_back(std::move(row));
  }
  if (out.empty()) throw InputError("summary CSV has no data rows");
  return out;
}

std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return read_summary_csv(in);
}

RateReport rate_report(const std::vector<SummaryRow>& summary, const RateModel& model) {
  RateReport report;
  report.model = model.label();
  std::vector<std::string> order;
  std::map<std::string, std::vector<const SummaryRow*>> groups;
  for (const auto& row : summary) {
    if (row.m < 2) continue;
    if (!groups.count(row.method)) order.push_back(row.method);
    groups[row.method].push_back(&row);
  }
  if (order.empty()) throw InputError("rates: no summary rows with m >= 2");

  for (const auto& method : order) {
    const auto& rows = groups[method];
    MethodRateFit fit;
    fit.method = method;
    double log_sum = 0.0;
    std::size_t positive = 0;
    std::vector<double> ms;
    std::vector<double> errs;
    for (const SummaryRow* r : rows) {
      const double m = static_cast<double>(r->m);
      if (r->error_median > 0.0) {
        log_sum += std::log(r->error_median) - std::log(model(m));
        ++positive;
        ms.push_back(m);
        errs.push_back(r->error_median);
      }
    }
    fit.constant = positive > 0 ? std::exp(log_sum / static_cast<double>(positive)) : 0.0;
    std::set<double> distinct(ms.begin(), ms.end());
    if (ms.size() >= 3 && distinct.size() >= 2) {
      fit.slope = rate_slope(ms, errs);
      fit.has_slope = true;
    }
    for (const SummaryRow* r : rows) {
      report.rows.push_back(*r);
      report.predicted.push_back(fit.constant * model(static_cast<double>(r->m)));
    }
    report.fits.push_back(std::move(fit));
  }
  return report;
}

void write_rate_csv(std::ostream& out, const RateReport& report) {
  out << "method,m,error_median,predicted_error,model\n";
  const std::string model =
      report.model.find(',') == std::string::npos ? report.model : '"' + report.model + '"';
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    out << r.method << ',' << r.m << ',' << format_double(r.error_median) << ',' << format_double(report.predicted[i])
        << ',' << model << '\n';
  }
}

}  // namespace kquad
