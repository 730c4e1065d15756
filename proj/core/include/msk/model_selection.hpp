#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msk/dataset.hpp"
#include "msk/driver.hpp"

namespace msk {

struct CVScaleStats {
  int s = 0;
  double mean_test_mse = 0.0;
  std::vector<double> fold_test_mse;
  double mean_train_mse = 0.0;
  double mean_sparse_fraction = 0.0;  // |C^s| / n_train, averaged over folds
};

struct CVReport {
  int folds = 0;
  std::uint64_t seed = 0;
  std::vector<CVScaleStats> scales;

  std::string to_csv() const;
  std::string to_json() const;
};

/// K-fold cross-validation over truncation scales: each fold is fitted once to
/// max_scale and the held-out part is evaluated incrementally at every scale,
/// which is exact because the model through scale s never depends on later
/// scales. Deterministic given the seed; folds run in normalized units.
CVReport cross_validate(const Dataset& ds, int k, int max_scale,
                        const DriverConfig& cfg, std::uint64_t seed);

enum class TruncationPolicy { min_mse, knee };

/// min_mse: argmin of mean test MSE, lowest scale on ties. knee: smallest s
/// whose mean test MSE is within (1 + tol_knee) of the minimum.
int select_truncation(const CVReport& report, TruncationPolicy policy,
                      double tol_knee = 0.1);

struct ReductionRow {
  int s = 0;
  double mse_total = 0.0;
  double sparse_fraction = 0.0;  // raw |C^s| / n
  double unique_fraction = 0.0;  // distinct points / n
};

/// Accuracy / size trade-off table from a completed trace.
std::vector<ReductionRow> reduction_report(const FitTrace& trace);
std::string reduction_to_csv(const std::vector<ReductionRow>& rows);

}  // namespace msk
