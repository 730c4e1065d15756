#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace msk {

/// Scattered regression data: n locations in d dimensions plus n scalar
/// observations. Fitting always runs on a normalized dataset (see normalize()).
struct Dataset {
  Eigen::MatrixXd locations;     // n x d
  Eigen::VectorXd observations;  // n

  Eigen::Index n() const { return locations.rows(); }
  Eigen::Index dim() const { return locations.cols(); }
};

/// Affine min-max maps used to move between original and unit-box units.
/// A location dimension with max == min is mapped to the constant 0.5 so that
/// constant columns contribute nothing to kernel distances. A constant
/// observation column maps to 0 (the fit target is then identically zero and
/// denormalize() restores the constant).
struct NormParams {
  Eigen::VectorXd x_min;
  Eigen::VectorXd x_max;
  double y_min = 0.0;
  double y_max = 1.0;

  Eigen::Index dim() const { return x_min.size(); }
};

/// Identity map for data that is already in normalized units.
NormParams identity_norm(Eigen::Index dim);

/// Parse a CSV file where every row holds d coordinates followed by one
/// observation. Values are returned in original units. Throws
/// std::runtime_error with the offending row number on ragged or non-numeric
/// rows, and when fewer than 2 rows are present ("n < 2").
Dataset load_csv(const std::filesystem::path& path, bool has_header = false);

/// Min-max map of every location dimension and the observations onto [0, 1].
std::pair<Dataset, NormParams> normalize(const Dataset& ds);

/// Apply the stored location map to new points. Points outside the training
/// bounding box are mapped by the same affine rule and may land outside [0, 1].
Eigen::MatrixXd normalize_locations(const Eigen::MatrixXd& X, const NormParams& p);

Eigen::VectorXd normalize_observations(const Eigen::VectorXd& y, const NormParams& p);

/// Inverse of the observation map; round-trips within 1e-12 relative.
Eigen::VectorXd denormalize(const Eigen::VectorXd& values, const NormParams& p);

struct KFold {
  Dataset train;
  Dataset test;
};

/// Deterministic K-fold partition: indices are shuffled with the seeded engine
/// and sliced contiguously, so every index lands in exactly one test fold.
std::vector<KFold> kfold_split(const Dataset& ds, int k, std::uint64_t seed);

/// Rows of `ds` selected by `indices`, in the given order.
Dataset subset(const Dataset& ds, const std::vector<Eigen::Index>& indices);

}  // namespace msk
