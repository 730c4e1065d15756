#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include <sys/wait.h>

#include <Eigen/Dense>

#include "msk/dataset.hpp"
#include "msk/driver.hpp"
#include "msk/model.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* env = std::getenv("MSK_CLI");
  REQUIRE_MESSAGE(env != nullptr, "MSK_CLI must point at the msk binary");
  return env;
}

int run(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path workdir() {
  const fs::path dir = fs::temp_directory_path() / "msk_cli_tests";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("missing input exits 1 and writes nothing") {
  const fs::path dir = workdir();
  const fs::path model = dir / "missing_model.json";
  const int code = run("fit --input " + (dir / "does_not_exist.csv").string() +
                       " --omega 3 --output " + model.string());
  CHECK(code == 1);
  CHECK(!fs::exists(model));
}

TEST_CASE("usage errors exit 2") {
  CHECK(run("") == 2);
  CHECK(run("fit") == 2);
  CHECK(run("frobnicate --input x") == 2);
  CHECK(run("cv --input x.csv --folds 1") == 2);
  CHECK(run("fit --input x.csv --omega 1 --deletion-mode bogus --output m.json") ==
        2);
}

TEST_CASE("fixtures generate writes a loadable CSV") {
  const fs::path dir = workdir();
  const fs::path csv = dir / "sine.csv";
  CHECK(run("fixtures generate --name sine_smooth --n 64 --out " + csv.string()) ==
        0);
  const msk::Dataset ds = msk::load_csv(csv);
  CHECK(ds.n() == 64);
  CHECK(ds.dim() == 1);
}

TEST_CASE("fit produces a model whose entry count matches the trace") {
  const fs::path dir = workdir();
  const fs::path csv = dir / "schwefel.csv";
  const fs::path model_path = dir / "schwefel_model.json";
  const fs::path trace_path = dir / "schwefel_trace.jsonl";
  const fs::path report_path = dir / "schwefel_report.csv";
  REQUIRE(run("fixtures generate --name schwefel1d --n 200 --out " +
              csv.string()) == 0);
  REQUIRE(run("fit --input " + csv.string() + " --omega 10 --delta 1e-3" +
              " --output " + model_path.string() + " --trace " +
              trace_path.string() + " --report " + report_path.string()) == 0);

  const msk::MultiscaleModel model = msk::load_model(model_path);
  std::ifstream trace_in(trace_path);
  std::string text((std::istreambuf_iterator<char>(trace_in)),
                   std::istreambuf_iterator<char>());
  const msk::FitTrace trace = msk::FitTrace::from_jsonl(text);
  REQUIRE(!trace.scales.empty());
  CHECK(static_cast<Eigen::Index>(model.entries.size()) ==
        trace.scales.back().c_cum);
  CHECK(fs::exists(report_path));
}

TEST_CASE("fit then predict on the training CSV reproduces the trace MSE") {
  const fs::path dir = workdir();
  const fs::path csv = dir / "train.csv";
  const fs::path model_path = dir / "train_model.json";
  const fs::path trace_path = dir / "train_trace.jsonl";
  const fs::path pred_path = dir / "train_pred.csv";
  REQUIRE(run("fixtures generate --name sine_smooth --n 120 --out " +
              csv.string()) == 0);
  REQUIRE(run("fit --input " + csv.string() + " --omega 8 --output " +
              model_path.string() + " --trace " + trace_path.string()) == 0);
  REQUIRE(run("predict --model " + model_path.string() + " --points " +
              csv.string() + " --output " + pred_path.string()) == 0);

  const msk::Dataset train = msk::load_csv(csv);
  const msk::Dataset pred = msk::load_csv(pred_path);
  std::ifstream trace_in(trace_path);
  std::string text((std::istreambuf_iterator<char>(trace_in)),
                   std::istreambuf_iterator<char>());
  const msk::FitTrace trace = msk::FitTrace::from_jsonl(text);

  // Predictions come back in original units; the fixture is already
  // normalized so the observation map is non-trivial only through y range.
  const msk::MultiscaleModel model = msk::load_model(model_path);
  const double range = model.norm.y_max - model.norm.y_min;
  const Eigen::VectorXd pred_norm =
      (pred.observations.array() - model.norm.y_min) / range;
  const Eigen::VectorXd y_norm =
      (train.observations.array() - model.norm.y_min) / range;
  const double mse =
      (y_norm - pred_norm).squaredNorm() / static_cast<double>(train.n());
  CHECK(mse == doctest::Approx(trace.scales.back().mse_post).epsilon(1e-10));
}

TEST_CASE("predict --max-scale 0 on a model with only higher scales is flat") {
  const fs::path dir = workdir();
  const fs::path model_path = dir / "synth_model.json";
  msk::MultiscaleModel model;
  model.d = 1;
  model.omega = 4;
  model.T = 0.5;
  model.norm = msk::identity_norm(1);
  msk::SparseEntry e;
  e.x = Eigen::RowVectorXd::Constant(1, 0.4);
  e.s = 3;
  e.theta = 1.0;
  model.entries.push_back(e);
  msk::save_model(model, model_path);

  const fs::path pts = dir / "pts.csv";
  {
    std::ofstream out(pts);
    out << "0.1\n0.4\n0.9\n";
  }
  const fs::path pred_path = dir / "synth_pred.csv";
  REQUIRE(run("predict --model " + model_path.string() + " --points " +
              pts.string() + " --max-scale 0 --output " + pred_path.string()) ==
          0);
  const msk::Dataset pred = msk::load_csv(pred_path);
  CHECK(pred.observations.isZero(0.0));
}

TEST_CASE("malformed model JSON exits 1") {
  const fs::path dir = workdir();
  const fs::path bad = dir / "bad_model.json";
  {
    std::ofstream out(bad);
    out << "{\"schema_version\": 1, \"oops\": true";
  }
  const fs::path pts = dir / "one.csv";
  {
    std::ofstream out(pts);
    out << "0.5\n0.6\n";
  }
  CHECK(run("predict --model " + bad.string() + " --points " + pts.string() +
            " --output " + (dir / "out.csv").string()) == 1);
}

TEST_CASE("cv writes a report with one row per scale and a selection") {
  const fs::path dir = workdir();
  const fs::path csv = dir / "cv_input.csv";
  const fs::path report = dir / "cv_report.csv";
  REQUIRE(run("fixtures generate --name sine_smooth --n 80 --out " +
              csv.string()) == 0);
  REQUIRE(run("cv --input " + csv.string() +
              " --folds 2 --max-scale 6 --seed 0 --output " + report.string()) ==
          0);
  std::ifstream in(report);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 8);  // header + scales 0..6
}

TEST_CASE("cv on the noisy fixture finds an interior minimum") {
  const fs::path dir = workdir();
  const fs::path csv = dir / "cv_noisy.csv";
  const fs::path report = dir / "cv_noisy_report.csv";
  REQUIRE(run("fixtures generate --name gramacy_lee_noisy --n 200 --seed 0 --out " +
              csv.string()) == 0);
  REQUIRE(run("cv --input " + csv.string() + " --folds 2 --max-scale 15" +
              " --delta 1e-3 --seed 0 --output " + report.string()) == 0);
  std::ifstream in(report);
  std::string line;
  std::getline(in, line);  // header
  int rows = 0;
  int argmin = -1;
  double best = std::numeric_limits<double>::infinity();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    const int s = std::stoi(line.substr(0, c1));
    const double mse = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    if (mse < best) {
      best = mse;
      argmin = s;
    }
    ++rows;
  }
  CHECK(rows == 16);  // scales 0..15
  CHECK(argmin > 0);
  CHECK(argmin < 15);
}

TEST_CASE("an unwritable output path exits 1 and leaves no artifact") {
  const fs::path dir = workdir();
  const fs::path csv = dir / "atomic_input.csv";
  REQUIRE(run("fixtures generate --name sine_smooth --n 30 --out " +
              csv.string()) == 0);
  const fs::path bad = dir / "no_such_subdir" / "model.json";
  CHECK(run("fit --input " + csv.string() + " --omega 2 --output " +
            bad.string()) == 1);
  CHECK(!fs::exists(bad));
  CHECK(!fs::exists(bad.string() + ".tmp"));
}

TEST_CASE("cv runs are reproducible for a fixed seed") {
  const fs::path dir = workdir();
  const fs::path csv = dir / "cv_seed.csv";
  const fs::path r1 = dir / "cv_seed_1.csv";
  const fs::path r2 = dir / "cv_seed_2.csv";
  REQUIRE(run("fixtures generate --name sine_smooth --n 60 --out " +
              csv.string()) == 0);
  REQUIRE(run("cv --input " + csv.string() +
              " --folds 2 --max-scale 4 --seed 42 --output " + r1.string()) == 0);
  REQUIRE(run("cv --input " + csv.string() +
              " --folds 2 --max-scale 4 --seed 42 --output " + r2.string()) == 0);
  std::ifstream a(r1), b(r2);
  std::string ta((std::istreambuf_iterator<char>(a)),
                 std::istreambuf_iterator<char>());
  std::string tb((std::istreambuf_iterator<char>(b)),
                 std::istreambuf_iterator<char>());
  CHECK(ta == tb);
}

TEST_CASE("report renders a reduction table from a trace") {
  const fs::path dir = workdir();
  const fs::path csv = dir / "rep_input.csv";
  const fs::path model_path = dir / "rep_model.json";
  const fs::path trace_path = dir / "rep_trace.jsonl";
  const fs::path table = dir / "rep_table.csv";
  REQUIRE(run("fixtures generate --name sine_smooth --n 50 --out " +
              csv.string()) == 0);
  REQUIRE(run("fit --input " + csv.string() + " --omega 5 --output " +
              model_path.string() + " --trace " + trace_path.string()) == 0);
  REQUIRE(run("report --trace " + trace_path.string() + " --output " +
              table.string()) == 0);
  std::ifstream in(table);
  std::string header;
  std::getline(in, header);
  CHECK(header == "s,mse_total,sparse_fraction,unique_fraction");
}

TEST_CASE("fit on an all-zero observation column yields an empty model") {
  const fs::path dir = workdir();
  const fs::path csv = dir / "zeros.csv";
  {
    std::ofstream out(csv);
    for (int i = 0; i < 20; ++i) out << i / 19.0 << ",0\n";
  }
  const fs::path model_path = dir / "zeros_model.json";
  REQUIRE(run("fit --input " + csv.string() + " --omega 3 --output " +
              model_path.string()) == 0);
  const msk::MultiscaleModel model = msk::load_model(model_path);
  CHECK(model.entries.empty());
}
