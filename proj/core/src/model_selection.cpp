#include "msk/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "msk/model.hpp"

namespace msk {

CVReport cross_validate(const Dataset& ds, int k, int max_scale,
                        const DriverConfig& cfg, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("cross_validate: need k >= 2 folds");
  if (max_scale < 0) {
    throw std::invalid_argument("cross_validate: max_scale must be >= 0");
  }
  const auto folds = kfold_split(ds, k, seed);

  CVReport report;
  report.folds = k;
  report.seed = seed;
  report.scales.resize(static_cast<std::size_t>(max_scale) + 1);
  for (int s = 0; s <= max_scale; ++s) {
    report.scales[static_cast<std::size_t>(s)].s = s;
    report.scales[static_cast<std::size_t>(s)].fold_test_mse.resize(
        static_cast<std::size_t>(k));
  }

  DriverConfig fold_cfg = cfg;
  fold_cfg.omega = max_scale;
  fold_cfg.mse_budget.reset();  // every scale must be visited for evaluation

  for (int f = 0; f < k; ++f) {
    const Dataset& train = folds[static_cast<std::size_t>(f)].train;
    const Dataset& test = folds[static_cast<std::size_t>(f)].test;
    if (train.n() < 2) {
      throw std::invalid_argument("cross_validate: fold too small to fit");
    }
    const FitResult res = fit(train, identity_norm(ds.dim()), fold_cfg);
    // One fit per fold; the held-out part is scored at every scale from the
    // cumulative predictions.
    const Eigen::MatrixXd cumulative =
        predict_cumulative_by_scale(res.model, test.locations);
    for (int s = 0; s <= max_scale; ++s) {
      auto& stats = report.scales[static_cast<std::size_t>(s)];
      const double test_mse =
          (test.observations - cumulative.col(s)).squaredNorm() /
          static_cast<double>(test.n());
      stats.fold_test_mse[static_cast<std::size_t>(f)] = test_mse;
      stats.mean_test_mse += test_mse / k;
      const auto& rec = res.trace.scales[static_cast<std::size_t>(s)];
      stats.mean_train_mse += rec.mse_post / k;
      stats.mean_sparse_fraction +=
          static_cast<double>(rec.c_cum) / static_cast<double>(train.n()) / k;
    }
  }
  return report;
}

int select_truncation(const CVReport& report, TruncationPolicy policy,
                      double tol_knee) {
  if (report.scales.empty()) {
    throw std::invalid_argument("select_truncation: empty report");
  }
  double best = std::numeric_limits<double>::infinity();
  int best_s = report.scales.front().s;
  for (const auto& st : report.scales) {
    if (st.mean_test_mse < best) {
      best = st.mean_test_mse;
      best_s = st.s;
    }
  }
  if (policy == TruncationPolicy::min_mse) return best_s;
  for (const auto& st : report.scales) {
    if (st.mean_test_mse <= (1.0 + tol_knee) * best) return st.s;
  }
  return best_s;
}

std::string CVReport::to_csv() const {
  std::ostringstream out;
  out << "s,mean_test_mse,mean_train_mse,mean_sparse_fraction";
  for (int f = 0; f < folds; ++f) out << ",fold" << f << "_test_mse";
  out << "\n";
  for (const auto& st : scales) {
    out << st.s << ',' << format_double(st.mean_test_mse) << ','
        << format_double(st.mean_train_mse) << ','
        << format_double(st.mean_sparse_fraction);
    for (double v : st.fold_test_mse) out << ',' << format_double(v);
    out << "\n";
  }
  return out.str();
}

std::string CVReport::to_json() const {
  nlohmann::json j;
  j["folds"] = folds;
  j["seed"] = seed;
  j["scales"] = nlohmann::json::array();
  for (const auto& st : scales) {
    j["scales"].push_back({
        {"s", st.s},
        {"mean_test_mse", st.mean_test_mse},
        {"mean_train_mse", st.mean_train_mse},
        {"mean_sparse_fraction", st.mean_sparse_fraction},
        {"fold_test_mse", st.fold_test_mse},
    });
  }
  return j.dump(2) + "\n";
}

std::vector<ReductionRow> reduction_report(const FitTrace& trace) {
  if (trace.n <= 0) {
    throw std::invalid_argument("reduction_report: trace has no sample count");
  }
  std::vector<ReductionRow> rows;
  rows.reserve(trace.scales.size());
  for (const auto& rec : trace.scales) {
    ReductionRow row;
    row.s = rec.s;
    row.mse_total = rec.mse_post;
    row.sparse_fraction =
        static_cast<double>(rec.c_cum) / static_cast<double>(trace.n);
    row.unique_fraction =
        static_cast<double>(rec.c_unique) / static_cast<double>(trace.n);
    rows.push_back(row);
  }
  return rows;
}

std::string reduction_to_csv(const std::vector<ReductionRow>& rows) {
  std::ostringstream out;
  out << "s,mse_total,sparse_fraction,unique_fraction\n";
  for (const auto& r : rows) {
    out << r.s << ',' << format_double(r.mse_total) << ','
        << format_double(r.sparse_fraction) << ','
        << format_double(r.unique_fraction) << "\n";
  }
  return out.str();
}

}  // namespace msk
