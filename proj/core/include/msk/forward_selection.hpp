#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "msk/kernel.hpp"

namespace msk {

/// Greedily assembled basis at one scale: selected centers in selection order,
/// their kernel columns, least-squares weights, and (B^T B)^{-1} maintained by
/// the block-inverse update.
struct ScaleBasis {
  int scale = 0;
  std::vector<Eigen::Index> center_indices;
  Eigen::MatrixXd columns;       // n x k
  Eigen::VectorXd weights;       // k
  Eigen::MatrixXd gram_inverse;  // k x k

  Eigen::Index size() const {
    return static_cast<Eigen::Index>(center_indices.size());
  }
  bool empty() const { return center_indices.empty(); }
};

struct SelectionScore {
  Eigen::Index index = -1;
  double z = 0.0;  // |r^T b| / ||b||^2, the absolute single-column weight
};

/// Pick the candidate maximizing |r^T b_j|^2 / ||b_j||^2 over j with
/// excluded[j] == 0, ties broken by lowest index. Throws when every index is
/// excluded.
SelectionScore select_column(const Eigen::VectorXd& residual,
                             const ScaleColumns& cols,
                             const std::vector<char>& excluded);

struct InverseExtension {
  Eigen::MatrixXd inverse;  // (k+1) x (k+1)
  double denom;             // c - b0^T M0^{-1} b0, the squared independence quotient
};

/// Block matrix-inversion update of (B^T B)^{-1} for one appended column.
/// Returns nullopt when the Schur denominator is <= tol_indep, i.e. the
/// candidate is numerically dependent on the current basis and must be
/// rejected by the caller.
std::optional<InverseExtension> extend_inverse(
    const Eigen::MatrixXd& gram_inverse, const Eigen::MatrixXd& columns,
    const Eigen::VectorXd& b_new, double tol_indep = 1e-12);

/// ||(I - B (B^T B)^{-1} B^T) b||_2; ||b||_2 for an empty basis. Throws when B
/// is rank deficient.
double independence_quotient(const Eigen::MatrixXd& basis_columns,
                             const Eigen::VectorXd& candidate);

/// One accepted column during forward selection.
struct ForwardStep {
  Eigen::Index center = -1;
  double z = 0.0;
  double mu = 0.0;  // independence quotient at acceptance
  double mse_before = 0.0;
  double mse_after = 0.0;
  Eigen::VectorXd weights;  // basis weights after this step; only when recorded
};

struct ForwardResult {
  ScaleBasis basis;
  double mse = 0.0;  // MSE of the final residual, ||r||^2 / n
  Eigen::VectorXd residual;
  std::vector<ForwardStep> steps;
  Eigen::Index rejected_dependent = 0;  // columns excluded by the guard
};

/// Forward greedy pass at one scale: keep adding the best-scoring column while
/// its z stays >= eps, updating weights through the block-inverse path and
/// recomputing r = t - B theta after every accept. Numerically dependent
/// candidates are excluded and selection continues with the next-best index.
ForwardResult forward_select(double eps, const ScaleColumns& cols, int scale,
                             const Eigen::VectorXd& target,
                             double tol_indep = 1e-12,
                             bool record_step_weights = false);

}  // namespace msk
