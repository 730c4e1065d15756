#include "msk/driver.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace msk {

namespace {
constexpr const char* kToolTag = "msk 0.1";
}

double init_tolerance_from(double delta, double vartheta0, double vartheta_ref) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("init_tolerance: delta must lie in (0, 1)");
  }
  return delta * vartheta_ref / vartheta0;
}

double init_tolerance(double delta, int ref_scale, const Eigen::MatrixXd& X,
                      double T) {
  const double vartheta0 = min_column_norm(X, length_scale(T, 0));
  const double vartheta_ref = min_column_norm(X, length_scale(T, ref_scale));
  return init_tolerance_from(delta, vartheta0, vartheta_ref);
}

SupportingParams supporting_params(double eps0, double vartheta0,
                                   double t0_norm, Eigen::Index n) {
  if (!(eps0 > 0.0)) {
    throw std::invalid_argument("supporting_params: eps0 must be positive");
  }
  if (!(t0_norm > 0.0)) {
    throw std::invalid_argument(
        "supporting_params: zero target norm (fit is trivially the zero model)");
  }
  SupportingParams sp;
  sp.gamma = eps0 * vartheta0 * vartheta0 / t0_norm;
  sp.delta = eps0 * eps0 * vartheta0 * vartheta0 / static_cast<double>(n);
  return sp;
}

double update_tolerance(const SupportingParams& sp, double t_norm,
                        double vartheta_s, Eigen::Index n) {
  const double conditioning = sp.gamma * t_norm / (vartheta_s * vartheta_s);
  const double reduction = std::sqrt(static_cast<double>(n) * sp.delta) / vartheta_s;
  return std::max(conditioning, reduction);
}

std::string FitTrace::to_jsonl() const {
  std::ostringstream out;
  for (const auto& rec : scales) {
    nlohmann::json j{
        {"s", rec.s},
        {"eps", rec.eps},
        {"vartheta", rec.vartheta},
        {"n_fwd", rec.n_fwd},
        {"n_bwd", rec.n_bwd},
        {"mse_pre", rec.mse_pre},
        {"mse_post", rec.mse_post},
        {"c_cum", rec.c_cum},
        {"c_unique", rec.c_unique},
        {"rank_bound", rec.rank_bound},
        {"size_bound", rec.size_bound},
        {"n", n},
        {"T", T},
        {"eps0", eps0},
        {"gamma", gamma},
        {"delta_step", delta_step},
        {"tail_size_bound", tail_size_bound},
    };
    out << j.dump() << "\n";
  }
  return out.str();
}

FitTrace FitTrace::from_jsonl(const std::string& text) {
  FitTrace trace;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("trace line " + std::to_string(lineno) + ": " +
                               e.what());
    }
    try {
      ScaleRecord rec;
      rec.s = j.at("s").get<int>();
      rec.eps = j.at("eps").get<double>();
      rec.vartheta = j.at("vartheta").get<double>();
      rec.n_fwd = j.at("n_fwd").get<Eigen::Index>();
      rec.n_bwd = j.at("n_bwd").get<Eigen::Index>();
      rec.mse_pre = j.at("mse_pre").get<double>();
      rec.mse_post = j.at("mse_post").get<double>();
      rec.c_cum = j.at("c_cum").get<Eigen::Index>();
      rec.c_unique = j.at("c_unique").get<Eigen::Index>();
      rec.rank_bound = j.at("rank_bound").get<long>();
      rec.size_bound = j.at("size_bound").get<double>();
      trace.scales.push_back(rec);
      trace.n = j.value("n", trace.n);
      trace.T = j.value("T", trace.T);
      trace.eps0 = j.value("eps0", trace.eps0);
      trace.gamma = j.value("gamma", trace.gamma);
      trace.delta_step = j.value("delta_step", trace.delta_step);
      trace.tail_size_bound = j.value("tail_size_bound", trace.tail_size_bound);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("trace line " + std::to_string(lineno) +
                               ": missing field: " + e.what());
    }
  }
  return trace;
}

FitResult fit(const Dataset& ds, const NormParams& norm,
              const DriverConfig& cfg) {
  return fit(ds, norm, cfg, FitHooks{});
}

FitResult fit(const Dataset& ds, const NormParams& norm, const DriverConfig& cfg,
              const FitHooks& hooks) {
  const Eigen::Index n = ds.n();
  const Eigen::Index d = ds.dim();
  if (n < 2) throw std::invalid_argument("fit: need at least 2 samples");
  if (cfg.omega < 0) throw std::invalid_argument("fit: omega must be >= 0");
  const double delta = cfg.resolved_delta(d);
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("fit: delta must lie in (0, 1)");
  }

  const Eigen::MatrixXd& X = ds.locations;
  const double diam =
      cfg.use_bbox_diameter ? bounding_box_diagonal(X) : diameter(X);
  const double T = normalizing_constant_from_diameter(diam);
  const Eigen::VectorXd box = bounding_box_lengths(X);

  FitResult result;
  result.model.d = d;
  result.model.omega = cfg.omega;
  result.model.T = T;
  result.model.norm = norm;
  result.model.meta = ModelMetadata{delta, cfg.ref_scale, kToolTag};
  result.trace.n = n;
  result.trace.T = T;
  result.fitted = Eigen::VectorXd::Zero(n);

  std::shared_ptr<const Eigen::MatrixXd> d2;
  if (n <= cfg.cache_threshold) d2 = pairwise_squared_distances(X);

  Eigen::VectorXd t = ds.observations;  // t_0 = y
  const double t0_norm = t.norm();

  // Identically-zero target: nothing to model at any scale.
  if (t0_norm == 0.0) {
    for (int s = 0; s <= cfg.omega; ++s) {
      ScaleRecord rec;
      rec.s = s;
      rec.vartheta = min_column_norm(X, length_scale(T, s));
      rec.rank_bound = rank_bound(box, s, cfg.rank_delta0, T);
      result.trace.scales.push_back(rec);
    }
    return result;
  }

  const double eps0_default = init_tolerance(delta, cfg.ref_scale, X, T);
  const double eps0 = cfg.eps0_override.value_or(eps0_default);
  const double vartheta0 = min_column_norm(X, length_scale(T, 0));
  const SupportingParams sp = supporting_params(eps0, vartheta0, t0_norm, n);
  result.trace.eps0 = eps0;
  result.trace.gamma = sp.gamma;
  result.trace.delta_step = sp.delta;

  std::unordered_set<Eigen::Index> unique_centers;
  Eigen::Index c_cum = 0;
  double sum_v2e2 = 0.0;
  double min_v2e2 = std::numeric_limits<double>::infinity();
  int last_scale = cfg.omega;

  for (int s = 0; s <= cfg.omega; ++s) {
    const double kappa = length_scale(T, s);
    const ScaleColumns cols(X, kappa, d2);
    const double vartheta = cols.min_norm();
    const double eps =
        (s == 0) ? eps0 : update_tolerance(sp, t.norm(), vartheta, n);

    const ForwardResult fwd = forward_select(eps, cols, s, t, cfg.tol_indep,
                                             cfg.record_step_weights);
    BackwardResult bwd = backward_delete(eps, vartheta, fwd.basis, fwd.mse, t,
                                         cfg.deletion_mode);

    Eigen::VectorXd f_s;
    if (!bwd.basis.empty()) {
      f_s = bwd.basis.columns * bwd.basis.weights;
      for (Eigen::Index p = 0; p < bwd.basis.size(); ++p) {
        const Eigen::Index j = bwd.basis.center_indices[p];
        SparseEntry e;
        e.x = ds.locations.row(j);
        e.y = ds.observations(j);
        e.s = s;
        e.theta = bwd.basis.weights(p);
        result.model.entries.push_back(std::move(e));
        unique_centers.insert(j);
      }
    } else {
      f_s = Eigen::VectorXd::Zero(n);
    }

    const double mse_pre = t.squaredNorm() / static_cast<double>(n);
    const Eigen::VectorXd t_next = t - f_s;
    const double mse_post = t_next.squaredNorm() / static_cast<double>(n);

    c_cum += bwd.basis.size();
    const double v2e2 = vartheta * vartheta * eps * eps;
    sum_v2e2 += v2e2;
    min_v2e2 = std::min(min_v2e2, v2e2);
    const double size_bound =
        (t0_norm * t0_norm - static_cast<double>(n) * mse_post + sum_v2e2) /
        min_v2e2;

    ScaleRecord rec;
    rec.s = s;
    rec.eps = eps;
    rec.vartheta = vartheta;
    rec.n_fwd = fwd.basis.size();
    rec.n_bwd = bwd.basis.size();
    rec.mse_pre = mse_pre;
    rec.mse_post = mse_post;
    rec.c_cum = c_cum;
    rec.c_unique = static_cast<Eigen::Index>(unique_centers.size());
    rec.rank_bound = rank_bound(box, s, cfg.rank_delta0, T);
    rec.size_bound = size_bound;
    result.trace.scales.push_back(rec);

    if (hooks.on_scale) {
      hooks.on_scale(ScaleOutcome{s, eps, vartheta, fwd, bwd, t, cols});
    }

    result.fitted += f_s;
    t = t_next;

    if (cfg.mse_budget && mse_post <= *cfg.mse_budget) {
      last_scale = s;
      result.model.omega = s;
      break;
    }
  }

  const double vartheta_tail =
      min_column_norm(X, length_scale(T, last_scale + 1));
  result.trace.tail_size_bound =
      std::pow(vartheta_tail, 4) / (sp.gamma * sp.gamma);
  return result;
}

}  // namespace msk
