#include "msk/model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <system_error>

#include <nlohmann/json.hpp>

#include "msk/kernel.hpp"

namespace msk {

namespace {

using nlohmann::json;

int max_scale_present(const MultiscaleModel& model) {
  int top = -1;
  for (const auto& e : model.entries) top = std::max(top, e.s);
  return top;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double: to_chars failed");
  return std::string(buf, ptr);
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    }
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
  }
  std::filesystem::rename(tmp, path);
}

Eigen::VectorXd predict_normalized(const MultiscaleModel& model,
                                   const Eigen::MatrixXd& X_norm, int s_max) {
  if (X_norm.cols() != model.d) {
    throw std::invalid_argument("predict: dimension mismatch (points have " +
                                std::to_string(X_norm.cols()) +
                                " columns, model expects " +
                                std::to_string(model.d) + ")");
  }
  if (s_max < 0 || s_max > model.omega) {
    throw std::invalid_argument("predict: s_max out of range [0, " +
                                std::to_string(model.omega) + "]");
  }
  const Eigen::Index t = X_norm.rows();
  Eigen::VectorXd total = Eigen::VectorXd::Zero(t);
  // One contribution vector per scale, then a single add: partial sums over
  // scales telescope exactly to the full prediction.
  Eigen::VectorXd scale_sum(t);
  std::size_t i = 0;
  for (int s = 0; s <= s_max; ++s) {
    const double kappa = length_scale(model.T, s);
    scale_sum.setZero();
    bool any = false;
    while (i < model.entries.size() && model.entries[i].s == s) {
      const SparseEntry& e = model.entries[i];
      scale_sum += e.theta * kernel_column(X_norm, e.x, kappa);
      any = true;
      ++i;
    }
    if (any) total += scale_sum;
  }
  return total;
}

Eigen::VectorXd predict_normalized(const MultiscaleModel& model,
                                   const Eigen::MatrixXd& X_norm) {
  return predict_normalized(model, X_norm, model.omega);
}

Eigen::MatrixXd predict_cumulative_by_scale(const MultiscaleModel& model,
                                            const Eigen::MatrixXd& X_norm) {
  if (X_norm.cols() != model.d) {
    throw std::invalid_argument("predict: dimension mismatch");
  }
  const Eigen::Index t = X_norm.rows();
  Eigen::MatrixXd out(t, model.omega + 1);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(t);
  Eigen::VectorXd scale_sum(t);
  std::size_t i = 0;
  for (int s = 0; s <= model.omega; ++s) {
    const double kappa = length_scale(model.T, s);
    scale_sum.setZero();
    bool any = false;
    while (i < model.entries.size() && model.entries[i].s == s) {
      const SparseEntry& e = model.entries[i];
      scale_sum += e.theta * kernel_column(X_norm, e.x, kappa);
      any = true;
      ++i;
    }
    if (any) total += scale_sum;
    out.col(s) = total;
  }
  return out;
}

Eigen::VectorXd predict_up_to_scale(const MultiscaleModel& model,
                                    const Eigen::MatrixXd& X_test, int s_max) {
  const Eigen::MatrixXd X_norm = normalize_locations(X_test, model.norm);
  return denormalize(predict_normalized(model, X_norm, s_max), model.norm);
}

Eigen::VectorXd predict(const MultiscaleModel& model,
                        const Eigen::MatrixXd& X_test) {
  return predict_up_to_scale(model, X_test, model.omega);
}

std::string model_to_json(const MultiscaleModel& model) {
  json j;
  j["schema_version"] = model.schema_version;
  j["d"] = model.d;
  j["omega"] = model.omega;
  j["T"] = model.T;
  j["norm"] = {
      {"x_min", std::vector<double>(model.norm.x_min.begin(), model.norm.x_min.end())},
      {"x_max", std::vector<double>(model.norm.x_max.begin(), model.norm.x_max.end())},
      {"y_min", model.norm.y_min},
      {"y_max", model.norm.y_max},
  };
  j["meta"] = {
      {"delta", model.meta.delta},
      {"ref_scale", model.meta.ref_scale},
      {"tool", model.meta.tool},
  };
  json entries = json::array();
  for (const auto& e : model.entries) {
    entries.push_back({
        {"x", std::vector<double>(e.x.begin(), e.x.end())},
        {"y", e.y},
        {"s", e.s},
        {"theta", e.theta},
    });
  }
  j["entries"] = std::move(entries);
  return j.dump(2) + "\n";
}

MultiscaleModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("model parse error: ") + e.what());
  }
  try {
    MultiscaleModel m;
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version != kModelSchemaVersion) {
      throw std::runtime_error("unsupported model schema_version " +
                               std::to_string(m.schema_version));
    }
    m.d = j.at("d").get<Eigen::Index>();
    m.omega = j.at("omega").get<int>();
    m.T = j.at("T").get<double>();
    if (m.d < 1) throw std::runtime_error("model field d must be >= 1");
    if (m.omega < 0) throw std::runtime_error("model field omega must be >= 0");
    if (!(m.T > 0.0)) throw std::runtime_error("model field T must be positive");
    const auto& jn = j.at("norm");
    const auto x_min = jn.at("x_min").get<std::vector<double>>();
    const auto x_max = jn.at("x_max").get<std::vector<double>>();
    if (x_min.size() != static_cast<std::size_t>(m.d) || x_max.size() != x_min.size()) {
      throw std::runtime_error("model norm params do not match dimension");
    }
    m.norm.x_min = Eigen::Map<const Eigen::VectorXd>(x_min.data(), m.d);
    m.norm.x_max = Eigen::Map<const Eigen::VectorXd>(x_max.data(), m.d);
    m.norm.y_min = jn.at("y_min").get<double>();
    m.norm.y_max = jn.at("y_max").get<double>();
    if (j.contains("meta")) {
      const auto& jm = j.at("meta");
      m.meta.delta = jm.value("delta", 0.0);
      m.meta.ref_scale = jm.value("ref_scale", 0);
      m.meta.tool = jm.value("tool", std::string{});
    }
    for (const auto& je : j.at("entries")) {
      SparseEntry e;
      const auto x = je.at("x").get<std::vector<double>>();
      if (x.size() != static_cast<std::size_t>(m.d)) {
        throw std::runtime_error("model entry with wrong location dimension");
      }
      e.x = Eigen::Map<const Eigen::RowVectorXd>(x.data(), m.d);
      e.y = je.at("y").get<double>();
      e.s = je.at("s").get<int>();
      e.theta = je.at("theta").get<double>();
      if (e.s < 0 || e.s > m.omega) {
        throw std::runtime_error("model entry scale outside [0, omega]");
      }
      if (!m.entries.empty() && e.s < m.entries.back().s) {
        throw std::runtime_error("model entries must be grouped by ascending scale");
      }
      m.entries.push_back(std::move(e));
    }
    if (max_scale_present(m) > m.omega) {
      throw std::runtime_error("model entries exceed omega");
    }
    return m;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("model schema error: ") + e.what());
  }
}

void save_model(const MultiscaleModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, model_to_json(model));
}

MultiscaleModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open model file '" + path.string() + "'");
  }
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return model_from_json(text);
}

}  // namespace msk
