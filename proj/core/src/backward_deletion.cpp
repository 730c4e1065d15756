#include "msk/backward_deletion.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace msk {

namespace {

void erase_column(ScaleBasis& basis, Eigen::Index pos) {
  const Eigen::Index k = basis.size();
  for (Eigen::Index c = pos; c + 1 < k; ++c) {
    basis.columns.col(c) = basis.columns.col(c + 1);
  }
  basis.columns.conservativeResize(Eigen::NoChange, k - 1);
  basis.center_indices.erase(basis.center_indices.begin() + pos);
}

// Fresh least-squares weights and gram inverse for the current columns.
void resolve_weights(ScaleBasis& basis, const Eigen::VectorXd& target) {
  const Eigen::Index k = basis.size();
  if (k == 0) {
    basis.weights.resize(0);
    basis.gram_inverse.resize(0, 0);
    return;
  }
  const Eigen::MatrixXd gram = basis.columns.transpose() * basis.columns;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  basis.weights = ldlt.solve(basis.columns.transpose() * target);
  basis.gram_inverse = ldlt.solve(Eigen::MatrixXd::Identity(k, k));
}

}  // namespace

Eigen::Index least_important(const ScaleBasis& basis) {
  if (basis.empty()) {
    throw std::invalid_argument("least_important: empty basis");
  }
  Eigen::Index best = 0;
  double best_product = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < basis.size(); ++j) {
    const double product =
        std::abs(basis.weights(j)) * basis.columns.col(j).norm();
    if (product < best_product) {
      best_product = product;
      best = j;
    }
  }
  return best;
}

BackwardResult backward_delete(double eps, double vartheta, ScaleBasis basis,
                               double forward_mse,
                               const Eigen::VectorXd& target,
                               DeletionMode mode) {
  const double n = static_cast<double>(target.size());
  const double cumulative_budget = vartheta * vartheta * eps * eps / n;
  const double per_column_limit = vartheta * eps;

  BackwardResult out;
  double mse = forward_mse;

  while (!basis.empty()) {
    const Eigen::Index pos = least_important(basis);

    BackwardStep step;
    step.position = pos;
    step.importance =
        std::abs(basis.weights(pos)) * basis.columns.col(pos).norm();
    step.mse_before = mse;
    step.mse_after = std::numeric_limits<double>::quiet_NaN();
    step.centers_before = basis.center_indices;
    step.weights_before = basis.weights;

    if (mode == DeletionMode::per_column &&
        step.importance > per_column_limit) {
      out.steps.push_back(std::move(step));
      break;
    }

    ScaleBasis reduced = basis;
    erase_column(reduced, pos);
    resolve_weights(reduced, target);
    const Eigen::VectorXd r =
        reduced.empty() ? target
                        : Eigen::VectorXd(target - reduced.columns * reduced.weights);
    const double reduced_mse = r.squaredNorm() / n;
    step.mse_after = reduced_mse;

    if (mode == DeletionMode::cumulative &&
        reduced_mse - forward_mse > cumulative_budget) {
      out.steps.push_back(std::move(step));
      break;
    }

    step.accepted = true;
    out.steps.push_back(std::move(step));
    basis = std::move(reduced);
    mse = reduced_mse;
  }

  out.mse = mse;
  out.residual = basis.empty()
                     ? target
                     : Eigen::VectorXd(target - basis.columns * basis.weights);
  out.basis = std::move(basis);
  return out;
}

}  // namespace msk
