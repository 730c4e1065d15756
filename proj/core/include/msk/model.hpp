#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "msk/dataset.hpp"

namespace msk {

inline constexpr int kModelSchemaVersion = 1;

/// One selected center: its normalized location and observation, the scale it
/// was picked at, and its weight. The observation is carried for reduction
/// reporting only; prediction never reads it.
struct SparseEntry {
  Eigen::RowVectorXd x;
  double y = 0.0;
  int s = 0;
  double theta = 0.0;
};

struct ModelMetadata {
  double delta = 0.0;
  int ref_scale = 0;
  std::string tool;
};

/// Serializable sparse representation: everything prediction needs, with no
/// reference back to the training set. Entries are stored in selection order,
/// grouped by scale, in normalized units.
struct MultiscaleModel {
  int schema_version = kModelSchemaVersion;
  Eigen::Index d = 0;
  int omega = 0;
  double T = 0.0;
  NormParams norm;
  std::vector<SparseEntry> entries;
  ModelMetadata meta;
};

/// Prediction in normalized units at normalized locations, restricted to
/// entries with scale <= s_max. Scale contributions are accumulated one scale
/// at a time so partial sums telescope exactly to the full prediction.
Eigen::VectorXd predict_normalized(const MultiscaleModel& model,
                                   const Eigen::MatrixXd& X_norm, int s_max);
Eigen::VectorXd predict_normalized(const MultiscaleModel& model,
                                   const Eigen::MatrixXd& X_norm);

/// Column s holds the normalized prediction using scales 0..s. Shape
/// t x (omega + 1).
Eigen::MatrixXd predict_cumulative_by_scale(const MultiscaleModel& model,
                                            const Eigen::MatrixXd& X_norm);

/// Full pipeline on original units: normalize locations with the stored
/// params, accumulate kernel contributions, and map the result back through
/// the observation range. Throws on a dimension mismatch.
Eigen::VectorXd predict(const MultiscaleModel& model,
                        const Eigen::MatrixXd& X_test);
Eigen::VectorXd predict_up_to_scale(const MultiscaleModel& model,
                                    const Eigen::MatrixXd& X_test, int s_max);

/// Lossless JSON round trip; doubles are emitted with shortest round-trip
/// encoding so a reloaded model predicts bit-identically. Writes are atomic
/// (temp file + rename).
void save_model(const MultiscaleModel& model, const std::filesystem::path& path);
MultiscaleModel load_model(const std::filesystem::path& path);

std::string model_to_json(const MultiscaleModel& model);
MultiscaleModel model_from_json(const std::string& text);

/// Shortest decimal encoding that round-trips to the same double.
std::string format_double(double v);

/// Write `content` to `path` via a temporary file and rename, so failed runs
/// leave no partial artifact.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

}  // namespace msk
