#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msk/dataset.hpp"

namespace msk {

/// Desk-scale synthetic datasets for experiments and acceptance runs.
enum class FixtureName { schwefel1d, gramacy_lee_noisy, schwefel2d, sine_smooth };

FixtureName fixture_from_string(const std::string& name);
std::string to_string(FixtureName name);

struct FixtureSpec {
  FixtureName name = FixtureName::schwefel1d;
  Eigen::Index n = 200;
  double noise_sd = 0.0;  // in normalized units, added after the min-max map
  std::uint64_t seed = 0;
};

/// Deterministic generation on uniform grids over each function's standard
/// domain, min-max normalized to the unit box. schwefel2d requires n to be a
/// perfect square (an m x m grid).
Dataset generate(const FixtureSpec& spec);

/// `repeats` subsets of size subset_size drawn without replacement,
/// deterministic given the seed. Used for the sampling-stability study.
std::vector<Dataset> resample_study(const Dataset& ds, Eigen::Index subset_size,
                                    int repeats, std::uint64_t seed);

}  // namespace msk
