#include "msk/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace msk {

namespace {

bool parse_field(std::string_view field, double& out) {
  // Trim surrounding spaces; '.' is the only accepted decimal separator.
  while (!field.empty() && std::isspace(static_cast<unsigned char>(field.front())))
    field.remove_prefix(1);
  while (!field.empty() && std::isspace(static_cast<unsigned char>(field.back())))
    field.remove_suffix(1);
  if (field.empty()) return false;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

// Bias-free bounded draw from a 64-bit engine; written out so shuffles are
// reproducible across standard libraries.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % n;
}

}  // namespace

NormParams identity_norm(Eigen::Index dim) {
  NormParams p;
  p.x_min = Eigen::VectorXd::Zero(dim);
  p.x_max = Eigen::VectorXd::Ones(dim);
  p.y_min = 0.0;
  p.y_max = 1.0;
  return p;
}

Dataset load_csv(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path.string() + "'");
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  bool skipped_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (has_header && !skipped_header) {
      skipped_header = true;
      continue;
    }
    auto fields = split_csv_line(line);
    if (rows.empty()) {
      width = fields.size();
      if (width < 2) {
        throw std::runtime_error(path.string() + ": row " +
                                 std::to_string(lineno) +
                                 ": need at least 2 fields (coordinates then "
                                 "observation), got " +
                                 std::to_string(width));
      }
    } else if (fields.size() != width) {
      throw std::runtime_error(path.string() + ": row " + std::to_string(lineno) +
                               ": expected " + std::to_string(width) +
                               " fields, got " + std::to_string(fields.size()));
    }
    std::vector<double> values(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (!parse_field(fields[i], values[i])) {
        throw std::runtime_error(path.string() + ": row " + std::to_string(lineno) +
                                 ": non-numeric field '" + std::string(fields[i]) +
                                 "'");
      }
    }
    rows.push_back(std::move(values));
  }
  if (rows.size() < 2) {
    throw std::runtime_error(path.string() + ": n < 2 (got " +
                             std::to_string(rows.size()) + " data rows)");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index d = static_cast<Eigen::Index>(width) - 1;
  Dataset ds;
  ds.locations.resize(n, d);
  ds.observations.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) ds.locations(i, j) = rows[i][j];
    ds.observations(i) = rows[i][d];
  }
  return ds;
}

std::pair<Dataset, NormParams> normalize(const Dataset& ds) {
  NormParams p;
  p.x_min = ds.locations.colwise().minCoeff();
  p.x_max = ds.locations.colwise().maxCoeff();
  p.y_min = ds.observations.minCoeff();
  p.y_max = ds.observations.maxCoeff();
  Dataset out;
  out.locations = normalize_locations(ds.locations, p);
  out.observations = normalize_observations(ds.observations, p);
  return {std::move(out), std::move(p)};
}

Eigen::MatrixXd normalize_locations(const Eigen::MatrixXd& X, const NormParams& p) {
  if (X.cols() != p.dim()) {
    throw std::invalid_argument("normalize_locations: dimension mismatch (got " +
                                std::to_string(X.cols()) + ", params have " +
                                std::to_string(p.dim()) + ")");
  }
  Eigen::MatrixXd out(X.rows(), X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double range = p.x_max(j) - p.x_min(j);
    if (range == 0.0) {
      out.col(j).setConstant(0.5);  // constant column: keep distances unaffected
    } else {
      out.col(j) = (X.col(j).array() - p.x_min(j)) / range;
    }
  }
  return out;
}

Eigen::VectorXd normalize_observations(const Eigen::VectorXd& y, const NormParams& p) {
  const double range = p.y_max - p.y_min;
  if (range == 0.0) {
    // Constant observations give a zero target; the fit is the zero model and
    // denormalize() restores the constant.
    return Eigen::VectorXd::Zero(y.size());
  }
  return (y.array() - p.y_min) / range;
}

Eigen::VectorXd denormalize(const Eigen::VectorXd& values, const NormParams& p) {
  return (values.array() * (p.y_max - p.y_min) + p.y_min).matrix();
}

Dataset subset(const Dataset& ds, const std::vector<Eigen::Index>& indices) {
  Dataset out;
  out.locations.resize(static_cast<Eigen::Index>(indices.size()), ds.dim());
  out.observations.resize(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.locations.row(static_cast<Eigen::Index>(i)) = ds.locations.row(indices[i]);
    out.observations(static_cast<Eigen::Index>(i)) = ds.observations(indices[i]);
  }
  return out;
}

std::vector<KFold> kfold_split(const Dataset& ds, int k, std::uint64_t seed) {
  const Eigen::Index n = ds.n();
  if (k < 2 || static_cast<Eigen::Index>(k) > n) {
    throw std::invalid_argument("kfold_split: k must satisfy 2 <= k <= n, got k=" +
                                std::to_string(k) + ", n=" + std::to_string(n));
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::swap(order[i], order[bounded(rng, i + 1)]);
  }
  const Eigen::Index base = n / k;
  const Eigen::Index rem = n % k;
  std::vector<KFold> folds;
  folds.reserve(static_cast<std::size_t>(k));
  Eigen::Index start = 0;
  for (int f = 0; f < k; ++f) {
    const Eigen::Index len = base + (f < rem ? 1 : 0);
    std::vector<Eigen::Index> test_idx(order.begin() + start,
                                       order.begin() + start + len);
    std::vector<Eigen::Index> train_idx;
    train_idx.reserve(static_cast<std::size_t>(n - len));
    train_idx.insert(train_idx.end(), order.begin(), order.begin() + start);
    train_idx.insert(train_idx.end(), order.begin() + start + len, order.end());
    folds.push_back(KFold{subset(ds, train_idx), subset(ds, test_idx)});
    start += len;
  }
  return folds;
}

}  // namespace msk
