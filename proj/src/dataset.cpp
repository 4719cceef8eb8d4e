#include "kquad/dataset.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <random>
#include <string>

#include "kquad/errors.hpp"
#include "kquad/options.hpp"
#include "kquad/random.hpp"

namespace kquad {

namespace {

std::vector<std::string_view> split(std::string_view line, char delimiter) {
  std::vector<std::string_view> out;
  if (delimiter == ' ') {
    std::size_t pos = 0;
    while (pos < line.size()) {
      const auto start = line.find_first_not_of(" \t", pos);
      if (start == std::string_view::npos) break;
      const auto stop = line.find_first_of(" \t", start);
      out.push_back(line.substr(start, stop - start));
      pos = stop == std::string_view::npos ? line.size() : stop;
    }
    return out;
  }
  for (std::size_t pos = 0;;) {
    const auto cut = line.find(delimiter, pos);
    out.push_back(trim(line.substr(pos, cut - pos)));
    if (cut == std::string_view::npos) break;
    pos = cut + 1;
  }
  return out;
}

bool all_numeric(const std::vector<std::string_view>& cells) {
  for (const auto cell : cells) {
    try {
      (void)parse_double(cell, "cell");
    } catch (const InputError&) {
      return false;
    }
  }
  return true;
}

}  // namespace

void standardize(Dataset& dataset) {
  const Eigen::Index n = dataset.size();
  if (n == 0) throw InputError("cannot standardize an empty dataset");
  dataset.means = dataset.points.rowwise().mean();
  dataset.points.colwise() -= dataset.means;
  dataset.scales = (dataset.points.cwiseAbs2().rowwise().sum() / static_cast<double>(n)).cwiseSqrt();
  for (Eigen::Index k = 0; k < dataset.dimension(); ++k) {
    if (!(dataset.scales[k] > 0.0)) dataset.scales[k] = 1.0;
    dataset.points.row(k) /= dataset.scales[k];
  }
  dataset.standardized = true;
}

Dataset load_csv(std::istream& in, bool standardize_features, char delimiter, std::string name) {
  std::vector<double> values;
  std::size_t width = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  bool first = true;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split(line, delimiter);
    if (first) {
      first = false;
      width = cells.size();
      if (!all_numeric(cells)) continue;  // header
    }
    if (cells.size() != width) {
      throw InputError("CSV line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                       " columns, found " + std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string where = "number at line " + std::to_string(line_no) + ", column " + std::to_string(c + 1);
      const double v = parse_double(cells[c], where);
      if (!std::isfinite(v)) throw InputError("non-finite " + where);
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw InputError("CSV input contains no data rows");

  Dataset out;
  out.name = std::move(name);
  out.points = Eigen::Map<const Eigen::MatrixXd>(values.data(), static_cast<Eigen::Index>(width),
                                                 static_cast<Eigen::Index>(rows));
  if (standardize_features) standardize(out);
  return out;
}

Dataset load_csv(const std::filesystem::path& path, bool standardize_features, char delimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return load_csv(in, standardize_features, delimiter, path.stem().string());
}

SyntheticSpec parse_synthetic(std::string_view text) {
  const OptionString opt = parse_option_string(text);
  SyntheticSpec spec;
  if (opt.head == "uniform_cube") {
    spec.kind = SyntheticKind::uniform_cube;
  } else if (opt.head == "gaussian_mixture") {
    spec.kind = SyntheticKind::gaussian_mixture;
    spec.components = static_cast<int>(parse_int(opt.has("k") ? opt.at("k", text) : "3", "mixture components"));
    spec.separation = parse_double(opt.has("sep") ? opt.at("sep", text) : "5", "mixture separation");
    if (spec.components < 1) throw InputError("mixture needs at least one component");
    if (!(spec.separation >= 0.0)) throw InputError("mixture separation must be nonnegative");
  } else {
    throw InputError("unknown synthetic dataset '" + opt.head + "' (expected uniform_cube or gaussian_mixture)");
  }
  spec.dimension = static_cast<int>(parse_int(opt.has("d") ? opt.at("d", text) : "1", "dimension"));
  if (spec.dimension < 1) throw InputError("synthetic dimension must be at least 1");
  return spec;
}

PointMatrix mixture_centers(int dimension, int components, double separation) {
  PointMatrix centers = PointMatrix::Zero(dimension, components);
  for (int j = 0; j < components; ++j) {
    if (dimension == 1) {
      centers(0, j) = separation * (j - 0.5 * (components - 1));
    } else {
      const double angle = 2.0 * std::numbers::pi * j / components;
      centers(0, j) = separation * std::cos(angle);
      centers(1, j) = separation * std::sin(angle);
    }
  }
  return centers;
}

Dataset gen_synthetic(const SyntheticSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw InputError("synthetic dataset needs n >= 1");
  Rng rng(seed);
  Dataset out;
  out.points.resize(spec.dimension, static_cast<Eigen::Index>(n));
  if (spec.kind == SyntheticKind::uniform_cube) {
    out.name = "uniform_cube_d" + std::to_string(spec.dimension);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (Eigen::Index i = 0; i < out.points.cols(); ++i) {
      for (Eigen::Index k = 0; k < out.points.rows(); ++k) out.points(k, i) = unif(rng);
    }
    return out;
  }
  out.name = "gaussian_mixture_d" + std::to_string(spec.dimension) + "_k" + std::to_string(spec.components);
  const PointMatrix centers = mixture_centers(spec.dimension, spec.components, spec.separation);
  std::uniform_int_distribution<int> component(0, spec.components - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  out.labels.resize(n);
  for (Eigen::Index i = 0; i < out.points.cols(); ++i) {
    const int c = component(rng);
    out.labels[static_cast<std::size_t>(i)] = c;
    for (Eigen::Index k = 0; k < out.points.rows(); ++k) out.points(k, i) = centers(k, c) + normal(rng);
  }
  return out;
}

}  // namespace kquad
