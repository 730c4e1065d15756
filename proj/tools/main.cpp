// msk: sparse multiscale Gaussian-kernel regression from the command line.
//
// Subcommands: fit | predict | cv | report | fixtures generate
// Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "msk/dataset.hpp"
#include "msk/driver.hpp"
#include "msk/fixtures.hpp"
#include "msk/model.hpp"
#include "msk/model_selection.hpp"

namespace {

// Points for prediction: d coordinate columns, or d+1 with a trailing
// observation column that is ignored (so training CSVs can be reused).
Eigen::MatrixXd load_points_csv(const std::filesystem::path& path,
                                Eigen::Index d, bool has_header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  bool skipped_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (has_header && !skipped_header) {
      skipped_header = true;
      continue;
    }
    std::vector<double> values;
    std::size_t start = 0;
    while (true) {
      const std::size_t pos = line.find(',', start);
      const std::string field =
          line.substr(start, pos == std::string::npos ? pos : pos - start);
      try {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        while (used < field.size() &&
               std::isspace(static_cast<unsigned char>(field[used])))
          ++used;
        if (used != field.size() || !std::isfinite(v)) throw std::invalid_argument("");
        values.push_back(v);
      } catch (const std::exception&) {
        throw std::runtime_error(path.string() + ": row " +
                                 std::to_string(lineno) + ": non-numeric field '" +
                                 field + "'");
      }
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    const auto width = static_cast<Eigen::Index>(values.size());
    if (width != d && width != d + 1) {
      throw std::runtime_error(path.string() + ": row " + std::to_string(lineno) +
                               ": expected " + std::to_string(d) + " or " +
                               std::to_string(d + 1) + " columns, got " +
                               std::to_string(width));
    }
    values.resize(static_cast<std::size_t>(d));
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw std::runtime_error(path.string() + ": no data rows");
  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      X(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    }
  }
  return X;
}

std::string points_to_csv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  std::ostringstream out;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      out << msk::format_double(X(i, j)) << ',';
    }
    out << msk::format_double(y(i)) << "\n";
  }
  return out.str();
}

msk::DeletionMode parse_deletion_mode(const std::string& mode) {
  return mode == "per-column" ? msk::DeletionMode::per_column
                              : msk::DeletionMode::cumulative;
}

void apply_thread_override() {
  if (const char* env = std::getenv("MSK_THREADS")) {
    const int threads = std::atoi(env);
    if (threads > 0) Eigen::setNbThreads(threads);
  }
}

struct FitArgs {
  std::string input, output, trace_path, report_path;
  std::optional<int> omega;
  std::optional<double> delta, eps0, mse_budget;
  int ref_scale = 15;
  std::string deletion_mode = "cumulative";
  bool has_header = false;
  bool bbox_diameter = false;
};

int run_fit(const FitArgs& a) {
  if (!a.omega && !a.mse_budget) {
    std::cerr << "fit: one of --omega or --mse-budget is required\n";
    return 2;
  }
  msk::DriverConfig cfg;
  cfg.omega = a.omega.value_or(a.ref_scale);
  cfg.delta = a.delta;
  cfg.ref_scale = a.ref_scale;
  cfg.eps0_override = a.eps0;
  cfg.mse_budget = a.mse_budget;
  cfg.deletion_mode = parse_deletion_mode(a.deletion_mode);
  cfg.use_bbox_diameter = a.bbox_diameter;
  if (cfg.ref_scale < cfg.omega) {
    std::cerr << "warning: --ref-scale " << cfg.ref_scale
              << " is below --omega " << cfg.omega
              << "; the eps0 recipe assumes ref_scale >= omega\n";
  }

  const msk::Dataset raw = msk::load_csv(a.input, a.has_header);
  auto [ds, norm] = msk::normalize(raw);
  const msk::FitResult res = msk::fit(ds, norm, cfg);

  // Render everything first so a failure cannot leave partial artifacts.
  const std::string model_json = msk::model_to_json(res.model);
  const std::string trace_jsonl = res.trace.to_jsonl();
  const std::string report_csv =
      msk::reduction_to_csv(msk::reduction_report(res.trace));

  msk::write_file_atomic(a.output, model_json);
  if (!a.trace_path.empty()) msk::write_file_atomic(a.trace_path, trace_jsonl);
  if (!a.report_path.empty()) msk::write_file_atomic(a.report_path, report_csv);

  const auto& last = res.trace.scales.back();
  std::cout << "fit: " << res.model.entries.size() << " entries through scale "
            << last.s << ", training MSE " << msk::format_double(last.mse_post)
            << " (normalized), unique points " << last.c_unique << "/"
            << res.trace.n << "\n";
  return 0;
}

struct PredictArgs {
  std::string model_path, points_path, output;
  std::optional<int> max_scale;
  bool has_header = false;
};

int run_predict(const PredictArgs& a) {
  const msk::MultiscaleModel model = msk::load_model(a.model_path);
  const Eigen::MatrixXd X = load_points_csv(a.points_path, model.d, a.has_header);
  const Eigen::VectorXd pred =
      a.max_scale ? msk::predict_up_to_scale(model, X, *a.max_scale)
                  : msk::predict(model, X);
  msk::write_file_atomic(a.output, points_to_csv(X, pred));
  std::cout << "predict: " << X.rows() << " rows -> " << a.output << "\n";
  return 0;
}

struct CvArgs {
  std::string input, output, output_json;
  int folds = 2;
  int max_scale = 15;
  std::optional<double> delta;
  std::string policy = "min_mse";
  std::string deletion_mode = "cumulative";
  std::uint64_t seed = 0;
  bool has_header = false;
};

int run_cv(const CvArgs& a) {
  if (a.folds < 2) {
    std::cerr << "cv: --folds must be >= 2\n";
    return 2;
  }
  msk::TruncationPolicy policy;
  if (a.policy == "min_mse") {
    policy = msk::TruncationPolicy::min_mse;
  } else if (a.policy == "knee") {
    policy = msk::TruncationPolicy::knee;
  } else {
    std::cerr << "cv: --policy must be 'min_mse' or 'knee'\n";
    return 2;
  }
  msk::DriverConfig cfg;
  cfg.delta = a.delta;
  cfg.deletion_mode = parse_deletion_mode(a.deletion_mode);

  const msk::Dataset raw = msk::load_csv(a.input, a.has_header);
  auto [ds, norm] = msk::normalize(raw);
  const msk::CVReport report =
      msk::cross_validate(ds, a.folds, a.max_scale, cfg, a.seed);
  const int omega = msk::select_truncation(report, policy);

  if (!a.output.empty()) msk::write_file_atomic(a.output, report.to_csv());
  if (!a.output_json.empty()) msk::write_file_atomic(a.output_json, report.to_json());
  std::cout << "cv: selected omega = " << omega << " (policy " << a.policy
            << ", " << a.folds << " folds)\n";
  return 0;
}

struct ReportArgs {
  std::string trace_path, output;
};

int run_report(const ReportArgs& a) {
  std::ifstream in(a.trace_path);
  if (!in) throw std::runtime_error("cannot open trace '" + a.trace_path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  const msk::FitTrace trace = msk::FitTrace::from_jsonl(text);
  msk::write_file_atomic(a.output,
                         msk::reduction_to_csv(msk::reduction_report(trace)));
  std::cout << "report: " << trace.scales.size() << " scales -> " << a.output
            << "\n";
  return 0;
}

struct FixtureArgs {
  std::string name = "schwefel1d";
  std::optional<Eigen::Index> n;
  std::optional<double> noise_sd;
  std::uint64_t seed = 0;
  std::string out;
};

int run_fixtures(const FixtureArgs& a) {
  msk::FixtureSpec spec;
  spec.name = msk::fixture_from_string(a.name);
  spec.n = a.n.value_or(spec.name == msk::FixtureName::schwefel2d ? 2500 : 200);
  spec.noise_sd = a.noise_sd.value_or(
      spec.name == msk::FixtureName::gramacy_lee_noisy ? 0.05 : 0.0);
  spec.seed = a.seed;
  const msk::Dataset ds = msk::generate(spec);
  msk::write_file_atomic(a.out, points_to_csv(ds.locations, ds.observations));
  std::cout << "fixtures: wrote " << ds.n() << " rows (" << a.name << ") -> "
            << a.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_override();

  CLI::App app{"Sparse multiscale Gaussian-kernel regression"};
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a sparse multiscale model to a CSV dataset");
  fit_cmd->add_option("--input", fit_args.input, "Training CSV (coordinates then observation)")
      ->required();
  fit_cmd->add_option("--output", fit_args.output, "Model JSON path")->required();
  fit_cmd->add_option("--trace", fit_args.trace_path, "Per-scale trace JSONL path");
  fit_cmd->add_option("--report", fit_args.report_path, "Reduction CSV path");
  fit_cmd->add_option("--omega", fit_args.omega, "Truncation scale");
  fit_cmd->add_option("--delta", fit_args.delta,
                      "eps0-bound parameter (default 1e-3 in 1-d, 1e-2 otherwise)");
  fit_cmd->add_option("--ref-scale", fit_args.ref_scale, "Reference scale for eps0")
      ->default_val(15);
  fit_cmd->add_option("--eps0", fit_args.eps0, "Raw eps0 override (research use)");
  fit_cmd->add_option("--mse-budget", fit_args.mse_budget,
                      "Stop once the training MSE reaches this value");
  fit_cmd->add_option("--deletion-mode", fit_args.deletion_mode,
                      "cumulative | per-column")
      ->default_val("cumulative")
      ->check(CLI::IsMember({"cumulative", "per-column"}));
  fit_cmd->add_flag("--has-header", fit_args.has_header, "Skip the first CSV row");
  fit_cmd->add_flag("--bbox-diameter", fit_args.bbox_diameter,
                    "Use the bounding-box diagonal instead of the exact diameter (changes T)");

  PredictArgs predict_args;
  auto* predict_cmd = app.add_subcommand("predict", "Evaluate a saved model at new points");
  predict_cmd->add_option("--model", predict_args.model_path, "Model JSON")->required();
  predict_cmd->add_option("--points", predict_args.points_path,
                          "Points CSV (d columns, or d+1 with the last ignored)")
      ->required();
  predict_cmd->add_option("--output", predict_args.output, "Predictions CSV")->required();
  predict_cmd->add_option("--max-scale", predict_args.max_scale,
                          "Use only scales <= this value");
  predict_cmd->add_flag("--has-header", predict_args.has_header, "Skip the first CSV row");

  CvArgs cv_args;
  auto* cv_cmd = app.add_subcommand("cv", "Choose the truncation scale by K-fold cross-validation");
  cv_cmd->add_option("--input", cv_args.input, "Training CSV")->required();
  cv_cmd->add_option("--folds", cv_args.folds, "Number of folds")->default_val(2);
  cv_cmd->add_option("--max-scale", cv_args.max_scale, "Largest scale to evaluate")
      ->default_val(15);
  cv_cmd->add_option("--delta", cv_args.delta, "eps0-bound parameter");
  cv_cmd->add_option("--policy", cv_args.policy, "min_mse | knee")->default_val("min_mse");
  cv_cmd->add_option("--deletion-mode", cv_args.deletion_mode, "cumulative | per-column")
      ->default_val("cumulative")
      ->check(CLI::IsMember({"cumulative", "per-column"}));
  cv_cmd->add_option("--seed", cv_args.seed, "Fold-shuffle seed")->default_val(0);
  cv_cmd->add_option("--output", cv_args.output, "CV report CSV path");
  cv_cmd->add_option("--output-json", cv_args.output_json, "CV report JSON path");
  cv_cmd->add_flag("--has-header", cv_args.has_header, "Skip the first CSV row");

  ReportArgs report_args;
  auto* report_cmd = app.add_subcommand("report", "Render a reduction table from a trace");
  report_cmd->add_option("--trace", report_args.trace_path, "Trace JSONL")->required();
  report_cmd->add_option("--output", report_args.output, "Reduction CSV path")->required();

  FixtureArgs fixture_args;
  auto* fixtures_cmd = app.add_subcommand("fixtures", "Synthetic datasets");
  auto* generate_cmd = fixtures_cmd->add_subcommand("generate", "Write a fixture CSV");
  generate_cmd->add_option("--name", fixture_args.name,
                           "schwefel1d | gramacy_lee_noisy | schwefel2d | sine_smooth")
      ->required();
  generate_cmd->add_option("--n", fixture_args.n, "Sample count");
  generate_cmd->add_option("--noise-sd", fixture_args.noise_sd,
                           "Noise level in normalized units (gramacy_lee_noisy default 0.05)");
  generate_cmd->add_option("--seed", fixture_args.seed, "Noise seed")->default_val(0);
  generate_cmd->add_option("--out", fixture_args.out, "Output CSV path")->required();
  fixtures_cmd->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*fit_cmd) return run_fit(fit_args);
    if (*predict_cmd) return run_predict(predict_args);
    if (*cv_cmd) return run_cv(cv_args);
    if (*report_cmd) return run_report(report_args);
    if (*fixtures_cmd) return run_fixtures(fixture_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
