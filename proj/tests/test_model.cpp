#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <Eigen/Dense>

#include "msk/driver.hpp"
#include "msk/model.hpp"

using namespace msk;

namespace {

Dataset sine_dataset(Eigen::Index n) {
  Dataset ds;
  ds.locations.resize(n, 1);
  ds.observations.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(n - 1);
    ds.locations(i, 0) = x;
    ds.observations(i) = 0.5 + 0.4 * std::sin(2.0 * std::numbers::pi * x);
  }
  return ds;
}

std::filesystem::path temp_path(const std::string& stem) {
  return std::filesystem::temp_directory_path() / stem;
}

}  // namespace

TEST_CASE("an empty model predicts the denormalized zero") {
  MultiscaleModel model;
  model.d = 1;
  model.omega = 3;
  model.T = 0.5;
  model.norm = identity_norm(1);
  model.norm.y_min = 4.0;
  model.norm.y_max = 10.0;
  Eigen::MatrixXd X(3, 1);
  X << 0.1, 0.5, 0.9;
  const Eigen::VectorXd pred = predict(model, X);
  CHECK(pred.isConstant(4.0));  // y-min offset of the affine inverse
  CHECK(predict_normalized(model, X).isZero(0.0));
}

TEST_CASE("a single unit-weight entry evaluates to 1 at its own center") {
  MultiscaleModel model;
  model.d = 1;
  model.omega = 0;
  model.T = 0.5;
  model.norm = identity_norm(1);
  SparseEntry e;
  e.x = Eigen::RowVectorXd::Constant(1, 0.3);
  e.y = 1.0;
  e.s = 0;
  e.theta = 1.0;
  model.entries.push_back(e);
  Eigen::MatrixXd X(1, 1);
  X << 0.3;
  CHECK(predict_normalized(model, X)(0) == 1.0);
}

TEST_CASE("predictions at training points reproduce the in-fit approximation") {
  Dataset ds = sine_dataset(60);
  DriverConfig cfg;
  cfg.omega = 8;
  const FitResult res = fit(ds, identity_norm(1), cfg);
  REQUIRE(!res.model.entries.empty());
  const Eigen::VectorXd pred = predict_normalized(res.model, ds.locations);
  CHECK((pred - res.fitted).lpNorm<Eigen::Infinity>() <= 1e-10);

  // Recomputing B^omega Theta^omega directly is the independent route.
  Eigen::VectorXd direct = Eigen::VectorXd::Zero(ds.n());
  for (const auto& e : res.model.entries) {
    direct += e.theta * kernel_column(ds.locations, e.x,
                                      length_scale(res.model.T, e.s));
  }
  CHECK((pred - direct).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("predict_up_to_scale restricts and telescopes exactly") {
  Dataset ds = sine_dataset(50);
  DriverConfig cfg;
  cfg.omega = 7;
  const FitResult res = fit(ds, identity_norm(1), cfg);
  Eigen::MatrixXd X(9, 1);
  for (int i = 0; i < 9; ++i) X(i, 0) = (i + 0.5) / 9.0;

  // s_max = omega is the full prediction, bit for bit.
  const Eigen::VectorXd full = predict_normalized(res.model, X);
  CHECK((predict_normalized(res.model, X, res.model.omega) - full).norm() == 0.0);

  // Cumulative columns agree with the per-call restriction.
  const Eigen::MatrixXd cum = predict_cumulative_by_scale(res.model, X);
  REQUIRE(cum.cols() == res.model.omega + 1);
  for (int s = 0; s <= res.model.omega; ++s) {
    CHECK((cum.col(s) - predict_normalized(res.model, X, s)).norm() == 0.0);
  }
  CHECK((cum.col(res.model.omega) - full).norm() == 0.0);

  // Summing the per-scale contributions in scale order recovers the total
  // exactly.
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(9);
  for (int s = 0; s <= res.model.omega; ++s) {
    Eigen::VectorXd contribution(9);
    contribution.setZero();
    const double kappa = length_scale(res.model.T, s);
    bool any = false;
    for (const auto& e : res.model.entries) {
      if (e.s != s) continue;
      contribution += e.theta * kernel_column(X, e.x, kappa);
      any = true;
    }
    if (any) sum += contribution;
  }
  CHECK((sum - full).norm() == 0.0);
}

TEST_CASE("predict_up_to_scale with no matching entries gives zero") {
  MultiscaleModel model;
  model.d = 1;
  model.omega = 5;
  model.T = 0.5;
  model.norm = identity_norm(1);
  SparseEntry e;
  e.x = Eigen::RowVectorXd::Constant(1, 0.5);
  e.s = 4;  // only a high-scale entry
  e.theta = 2.0;
  model.entries.push_back(e);
  Eigen::MatrixXd X(2, 1);
  X << 0.25, 0.75;
  CHECK(predict_normalized(model, X, 0).isZero(0.0));
  CHECK_THROWS_AS(predict_normalized(model, X, 6), std::invalid_argument);
  CHECK_THROWS_AS(predict_normalized(model, X, -1), std::invalid_argument);
}

TEST_CASE("prediction is linear in the entry weights") {
  Dataset ds = sine_dataset(40);
  DriverConfig cfg;
  cfg.omega = 6;
  FitResult res = fit(ds, identity_norm(1), cfg);
  Eigen::MatrixXd X(5, 1);
  for (int i = 0; i < 5; ++i) X(i, 0) = i / 4.0;
  const Eigen::VectorXd base = predict_normalized(res.model, X);
  MultiscaleModel scaled = res.model;
  for (auto& e : scaled.entries) e.theta *= 3.0;
  const Eigen::VectorXd tripled = predict_normalized(scaled, X);
  CHECK((tripled - 3.0 * base).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("save and load round-trip to bit-identical predictions") {
  Dataset ds = sine_dataset(45);
  DriverConfig cfg;
  cfg.omega = 6;
  const FitResult res = fit(ds, identity_norm(1), cfg);
  const auto path = temp_path("msk_model_roundtrip.json");
  save_model(res.model, path);
  const MultiscaleModel back = load_model(path);
  CHECK(back.schema_version == res.model.schema_version);
  CHECK(back.T == res.model.T);
  CHECK(back.omega == res.model.omega);
  REQUIRE(back.entries.size() == res.model.entries.size());
  Eigen::MatrixXd X(33, 1);
  for (int i = 0; i < 33; ++i) X(i, 0) = i / 32.0;
  CHECK((predict_normalized(back, X) - predict_normalized(res.model, X)).norm() ==
        0.0);
  std::filesystem::remove(path);
}

TEST_CASE("a model with zero entries survives the file round trip") {
  MultiscaleModel model;
  model.d = 2;
  model.omega = 4;
  model.T = 1.25;
  model.norm = identity_norm(2);
  const auto path = temp_path("msk_model_empty.json");
  save_model(model, path);
  const MultiscaleModel back = load_model(path);
  CHECK(back.entries.empty());
  CHECK(back.d == 2);
  std::filesystem::remove(path);
}

TEST_CASE("truncated or malformed model files are rejected whole") {
  Dataset ds = sine_dataset(30);
  DriverConfig cfg;
  cfg.omega = 4;
  const FitResult res = fit(ds, identity_norm(1), cfg);
  const std::string text = model_to_json(res.model);
  CHECK_THROWS_AS(model_from_json(text.substr(0, text.size() / 2)),
                  std::runtime_error);
  CHECK_THROWS_AS(model_from_json("{}"), std::runtime_error);
  CHECK_THROWS_AS(model_from_json("not json"), std::runtime_error);
}

TEST_CASE("predict rejects a dimension mismatch") {
  MultiscaleModel model;
  model.d = 2;
  model.omega = 1;
  model.T = 1.0;
  model.norm = identity_norm(2);
  Eigen::MatrixXd X(3, 1);
  X << 0.0, 0.5, 1.0;
  CHECK_THROWS_AS(predict(model, X), std::invalid_argument);
}

TEST_CASE("models built from original-unit data predict in original units") {
  // Fit on normalized data but carry the real NormParams; predictions on the
  // raw locations must come back in raw observation units.
  Dataset raw = sine_dataset(40);
  raw.locations *= 12.0;
  raw.observations = (raw.observations.array() * 50.0 + 7.0).matrix();
  auto [ds, norm] = normalize(raw);
  DriverConfig cfg;
  cfg.omega = 7;
  const FitResult res = fit(ds, norm, cfg);
  const Eigen::VectorXd pred = predict(res.model, raw.locations);
  const Eigen::VectorXd expected = denormalize(res.fitted, norm);
  CHECK((pred - expected).lpNorm<Eigen::Infinity>() <= 1e-9);
}
