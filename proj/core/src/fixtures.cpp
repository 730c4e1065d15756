#include "msk/fixtures.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

namespace msk {

namespace {

// Standard test functions, as published:
//   Schwefel:      f(x) = 418.9829 d - sum_i x_i sin(sqrt(|x_i|)), x in [-500, 500]^d
//   Gramacy & Lee: f(x) = sin(10 pi x) / (2x) + (x - 1)^4,          x in [0.5, 2.5]

double schwefel(const Eigen::RowVectorXd& x) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    sum += x(i) * std::sin(std::sqrt(std::abs(x(i))));
  }
  return 418.9829 * static_cast<double>(x.size()) - sum;
}

double gramacy_lee(double x) {
  return std::sin(10.0 * std::numbers::pi * x) / (2.0 * x) +
         std::pow(x - 1.0, 4);
}

Eigen::VectorXd grid1d(double lo, double hi, Eigen::Index n) {
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i) = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return x;
}

Dataset normalized(const Dataset& raw) {
  auto [ds, params] = normalize(raw);
  (void)params;
  return std::move(ds);
}

// Box-Muller, spelled out so fixtures are reproducible across standard
// libraries for a given seed.
class GaussianDraw {
 public:
  explicit GaussianDraw(std::uint64_t seed) : rng_(seed) {}
  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  double uniform() {
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  }
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % n;
}

}  // namespace

FixtureName fixture_from_string(const std::string& name) {
  if (name == "schwefel1d") return FixtureName::schwefel1d;
  if (name == "gramacy_lee_noisy") return FixtureName::gramacy_lee_noisy;
  if (name == "schwefel2d") return FixtureName::schwefel2d;
  if (name == "sine_smooth") return FixtureName::sine_smooth;
  throw std::invalid_argument("unknown fixture name '" + name + "'");
}

std::string to_string(FixtureName name) {
  switch (name) {
    case FixtureName::schwefel1d: return "schwefel1d";
    case FixtureName::gramacy_lee_noisy: return "gramacy_lee_noisy";
    case FixtureName::schwefel2d: return "schwefel2d";
    case FixtureName::sine_smooth: return "sine_smooth";
  }
  throw std::invalid_argument("unknown fixture name");
}

Dataset generate(const FixtureSpec& spec) {
  if (spec.n < 2) throw std::invalid_argument("fixture: need n >= 2");
  if (spec.noise_sd < 0.0) {
    throw std::invalid_argument("fixture: noise_sd must be >= 0");
  }
  switch (spec.name) {
    case FixtureName::schwefel1d: {
      Dataset raw;
      raw.locations = grid1d(-500.0, 500.0, spec.n);
      raw.observations.resize(spec.n);
      for (Eigen::Index i = 0; i < spec.n; ++i) {
        raw.observations(i) = schwefel(raw.locations.row(i));
      }
      return normalized(raw);
    }
    case FixtureName::gramacy_lee_noisy: {
      Dataset raw;
      raw.locations = grid1d(0.5, 2.5, spec.n);
      raw.observations.resize(spec.n);
      for (Eigen::Index i = 0; i < spec.n; ++i) {
        raw.observations(i) = gramacy_lee(raw.locations(i, 0));
      }
      Dataset ds = normalized(raw);
      if (spec.noise_sd > 0.0) {
        GaussianDraw gauss(spec.seed);
        for (Eigen::Index i = 0; i < spec.n; ++i) {
          ds.observations(i) += spec.noise_sd * gauss();
        }
      }
      return ds;
    }
    case FixtureName::schwefel2d: {
      const auto m = static_cast<Eigen::Index>(std::llround(std::sqrt(
          static_cast<double>(spec.n))));
      if (m * m != spec.n) {
        throw std::invalid_argument(
            "fixture schwefel2d: n must be a perfect square (an m x m grid)");
      }
      const Eigen::VectorXd axis = grid1d(-500.0, 500.0, m);
      Dataset raw;
      raw.locations.resize(spec.n, 2);
      raw.observations.resize(spec.n);
      Eigen::Index r = 0;
      for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j, ++r) {
          raw.locations(r, 0) = axis(i);
          raw.locations(r, 1) = axis(j);
          raw.observations(r) = schwefel(raw.locations.row(r));
        }
      }
      return normalized(raw);
    }
    case FixtureName::sine_smooth: {
      Dataset raw;
      raw.locations = grid1d(0.0, 1.0, spec.n);
      raw.observations.resize(spec.n);
      for (Eigen::Index i = 0; i < spec.n; ++i) {
        raw.observations(i) =
            std::sin(2.0 * std::numbers::pi * raw.locations(i, 0));
      }
      return normalized(raw);
    }
  }
  throw std::invalid_argument("unknown fixture name");
}

std::vector<Dataset> resample_study(const Dataset& ds, Eigen::Index subset_size,
                                    int repeats, std::uint64_t seed) {
  if (subset_size > ds.n()) {
    throw std::invalid_argument("resample_study: subset_size > n");
  }
  if (subset_size < 1 || repeats < 1) {
    throw std::invalid_argument("resample_study: need subset_size >= 1, repeats >= 1");
  }
  std::mt19937_64 rng(seed);
  std::vector<Dataset> out;
  out.reserve(static_cast<std::size_t>(repeats));
  std::vector<Eigen::Index> pool(static_cast<std::size_t>(ds.n()));
  for (int rep = 0; rep < repeats; ++rep) {
    std::iota(pool.begin(), pool.end(), Eigen::Index{0});
    // Partial Fisher-Yates: the first subset_size slots form the draw.
    for (Eigen::Index i = 0; i < subset_size; ++i) {
      const auto j = i + static_cast<Eigen::Index>(
                             bounded(rng, static_cast<std::uint64_t>(ds.n() - i)));
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    out.push_back(subset(
        ds, std::vector<Eigen::Index>(pool.begin(), pool.begin() + subset_size)));
  }
  return out;
}

}  // namespace msk
