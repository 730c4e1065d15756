#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "msk/backward_deletion.hpp"
#include "msk/dataset.hpp"
#include "msk/forward_selection.hpp"
#include "msk/kernel.hpp"
#include "msk/model.hpp"

namespace msk {

struct DriverConfig {
  int omega = 10;
  /// eps0-bound parameter; defaults to 1e-3 in one dimension, 1e-2 otherwise.
  std::optional<double> delta;
  /// Reference scale for the eps0 initialization eps0 = delta * vartheta_ref / vartheta_0.
  int ref_scale = 15;
  DeletionMode deletion_mode = DeletionMode::cumulative;
  /// Research override: use this eps0 instead of the (delta, ref_scale) recipe.
  std::optional<double> eps0_override;
  /// Stop after the first scale whose MSE drops to this budget.
  std::optional<double> mse_budget;
  double tol_indep = 1e-12;
  /// Precision for the rank-bound diagnostic column of the trace.
  double rank_delta0 = 1e-10;
  /// Largest n for which the per-scale column matrix is materialized.
  Eigen::Index cache_threshold = kDefaultCacheThreshold;
  /// Replace the exact O(n^2) diameter by the bounding-box diagonal (changes T).
  bool use_bbox_diameter = false;
  /// Keep per-step weight snapshots in the forward diagnostics.
  bool record_step_weights = false;

  double resolved_delta(Eigen::Index dim) const {
    return delta.value_or(dim == 1 ? 1e-3 : 1e-2);
  }
};

/// Per-scale trace record. Field names match the JSONL schema.
struct ScaleRecord {
  int s = 0;
  double eps = 0.0;
  double vartheta = 0.0;
  Eigen::Index n_fwd = 0;       // |C_s| after forward selection
  Eigen::Index n_bwd = 0;       // |C_s| after backward deletion
  double mse_pre = 0.0;         // ||t_s||^2 / n
  double mse_post = 0.0;        // E^s
  Eigen::Index c_cum = 0;       // per-scale sizes summed through s
  Eigen::Index c_unique = 0;    // distinct training points referenced through s
  long rank_bound = 0;          // numerical-rank diagnostic
  double size_bound = 0.0;      // sparse-size bound treating s as the truncation scale
};

struct FitTrace {
  std::vector<ScaleRecord> scales;
  Eigen::Index n = 0;
  double T = 0.0;
  double eps0 = 0.0;
  double gamma = 0.0;
  double delta_step = 0.0;       // the per-step MSE-reduction floor Delta
  double tail_size_bound = 0.0;  // vartheta_{omega+1}^4 / gamma^2, diagnostic only

  std::string to_jsonl() const;
  static FitTrace from_jsonl(const std::string& text);
};

struct FitResult {
  MultiscaleModel model;
  FitTrace trace;
  Eigen::VectorXd fitted;  // f^omega on the training locations, normalized units
};

/// Everything one scale produced, handed to test hooks before state moves on.
struct ScaleOutcome {
  int s;
  double eps;
  double vartheta;
  const ForwardResult& forward;
  const BackwardResult& backward;
  const Eigen::VectorXd& target;  // t_s
  const ScaleColumns& columns;
};

struct FitHooks {
  std::function<void(const ScaleOutcome&)> on_scale;
};

/// eps0 = delta * vartheta_ref / vartheta_0, both norms on the full X.
double init_tolerance(double delta, int ref_scale, const Eigen::MatrixXd& X,
                      double T);
double init_tolerance_from(double delta, double vartheta0, double vartheta_ref);

struct SupportingParams {
  double gamma = 0.0;
  double delta = 0.0;  // the MSE-reduction floor
};

/// gamma = eps0 vartheta0^2 / ||t0||, Delta = eps0^2 vartheta0^2 / n. Throws
/// when ||t0|| is zero (the fit is trivially the zero model).
SupportingParams supporting_params(double eps0, double vartheta0,
                                   double t0_norm, Eigen::Index n);

/// eps_s = max{ gamma ||t_s|| / vartheta_s^2, sqrt(n Delta) / vartheta_s }.
double update_tolerance(const SupportingParams& sp, double t_norm,
                        double vartheta_s, Eigen::Index n);

/// Run scales 0..omega on a normalized dataset: forward selection then
/// backward deletion per scale, accumulating the sparse model and trace.
/// `norm` is embedded in the model so predictions can accept original units;
/// pass identity_norm(d) for data that is already normalized.
FitResult fit(const Dataset& ds, const NormParams& norm,
              const DriverConfig& cfg);
FitResult fit(const Dataset& ds, const NormParams& norm,
              const DriverConfig& cfg, const FitHooks& hooks);

}  // namespace msk
