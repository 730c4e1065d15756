#pragma once

#include <vector>

#include <Eigen/Core>

#include "msk/forward_selection.hpp"

namespace msk {

/// cumulative: keep deleting while the total MSE increase since deletion began
/// stays within vartheta^2 eps^2 / n (the default rule).
/// per_column: delete only while the chosen column satisfies
/// |theta_j| ||b_j|| <= vartheta * eps.
enum class DeletionMode { cumulative, per_column };

/// Position (not center index) of the column minimizing |theta_j| * ||b_j||_2,
/// ties by lowest position; equivalently the single removal that raises the
/// MSE least. Throws on an empty basis.
Eigen::Index least_important(const ScaleBasis& basis);

/// One deletion decision, including the basis state it was made on so tests
/// can replay it against an exhaustive oracle.
struct BackwardStep {
  Eigen::Index position = -1;
  double importance = 0.0;  // |theta| * ||b|| at decision time
  double mse_before = 0.0;
  double mse_after = 0.0;  // NaN when the reduced solve was never formed
  bool accepted = false;
  std::vector<Eigen::Index> centers_before;
  Eigen::VectorXd weights_before;
};

struct BackwardResult {
  ScaleBasis basis;
  double mse = 0.0;
  Eigen::VectorXd residual;
  std::vector<BackwardStep> steps;
};

/// Prune the forward-selected basis. After every deletion the weights of the
/// surviving columns are re-solved by a fresh least squares; the loop stops
/// when the mode's criterion fails or the basis is empty.
/// `forward_mse` must be the MSE of target - B theta for the incoming basis.
BackwardResult backward_delete(double eps, double vartheta, ScaleBasis basis,
                               double forward_mse,
                               const Eigen::VectorXd& target,
                               DeletionMode mode = DeletionMode::cumulative);

}  // namespace msk
