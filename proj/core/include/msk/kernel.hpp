#pragma once

#include <memory>
#include <optional>

#include <Eigen/Core>

namespace msk {

/// Exact maximum pairwise Euclidean distance, O(n^2). Throws when n < 2.
double diameter(const Eigen::MatrixXd& X);

/// Diagonal of the axis-aligned bounding box; a cheap upper bound on the
/// diameter. Using it changes T, so it sits behind an explicit flag.
double bounding_box_diagonal(const Eigen::MatrixXd& X);

/// T = 2 (diameter / 2)^2. Throws when the diameter is zero.
double normalizing_constant(const Eigen::MatrixXd& X);
double normalizing_constant_from_diameter(double diam);

/// kappa_s = T / 2^s, computed as an exact power-of-two division.
double length_scale(double T, int s);

/// b_s^j over X_eval: entry i = exp(-||x_i - center||^2 / kappa).
Eigen::VectorXd kernel_column(const Eigen::MatrixXd& X_eval,
                              const Eigen::RowVectorXd& center, double kappa);

/// vartheta_s = min over centers x_j in X of ||kernel_column(X, x_j, kappa)||_2.
/// Always >= 1 (the self entry is 1) and non-increasing in s.
double min_column_norm(const Eigen::MatrixXd& X, double kappa);

/// Numerical-rank diagnostic for the scale-s Gaussian kernel on a box with the
/// given side lengths: prod_i ((2|I_i| / (pi sqrt(T))) sqrt(2^s ln(1/delta0)) + 1),
/// before rounding up. Reported in the fit trace only.
double rank_bound_raw(const Eigen::VectorXd& box_lengths, int s, double delta0,
                      double T);
long rank_bound(const Eigen::VectorXd& box_lengths, int s, double delta0,
                double T);

/// Side lengths of the tight bounding box of X.
Eigen::VectorXd bounding_box_lengths(const Eigen::MatrixXd& X);

inline constexpr Eigen::Index kDefaultCacheThreshold = 4096;

/// All pairwise squared distances, shared across scales of one fit.
std::shared_ptr<const Eigen::MatrixXd> pairwise_squared_distances(
    const Eigen::MatrixXd& X);

/// The n candidate kernel columns of one scale. When a squared-distance cache
/// is supplied the full n x n column matrix is materialized once; otherwise
/// columns are generated per center and scans stream over them, which keeps
/// memory at O(n) for large n.
class ScaleColumns {
 public:
  ScaleColumns(const Eigen::MatrixXd& X, double kappa,
               const std::shared_ptr<const Eigen::MatrixXd>& sq_dists = nullptr);

  Eigen::Index count() const { return X_->rows(); }
  double kappa() const { return kappa_; }
  const Eigen::MatrixXd& points() const { return *X_; }

  /// b_s^j as a fresh vector.
  Eigen::VectorXd column(Eigen::Index j) const;

  /// K_s^T r over all candidates.
  Eigen::VectorXd correlations(const Eigen::VectorXd& r) const;

  const Eigen::VectorXd& squared_norms() const { return sq_norms_; }

  /// vartheta_s for this scale.
  double min_norm() const { return min_norm_; }

  bool cached() const { return dense_.has_value(); }
  const Eigen::MatrixXd& dense() const { return *dense_; }

 private:
  const Eigen::MatrixXd* X_;
  double kappa_;
  std::optional<Eigen::MatrixXd> dense_;
  Eigen::VectorXd sq_norms_;
  double min_norm_ = 0.0;
};

}  // namespace msk
