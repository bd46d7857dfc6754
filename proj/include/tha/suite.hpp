#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tha/geometry.hpp"
#include "tha/grid.hpp"

namespace tha {

struct SuiteOptions {
  std::size_t count = 1;
  /// Keep band-limited generators off {xi1 = 0}, {xi2 = 0}, {xi1 + xi2 = 0}.
  bool avoid_degenerate = true;
  /// Largest |lattice index| per component for band-limited generators.
  int max_mode = 4;
  /// Modes summed by random-bandlimited.
  int modes = 6;
  /// Bump radius; 0 draws one per field from [L/8, L/4].
  double width = 0.0;
};

/// Names accepted by generate_suite.
const std::vector<std::string>& suite_generators();

/// Deterministic fields from a named generator: bump, mode, checkerboard, spike,
/// random-bandlimited. Throws ConfigError on an unknown name.
std::vector<SpatialField> generate_suite(const std::string& name, std::uint64_t seed, const GridSpec& spec,
                                         const SuiteOptions& options = {});

/// Smooth bump exp(1 - 1/(1 - rho^2)), rho = periodic distance / width, supported in rho < 1.
SpatialField bump_field(const GridSpec& spec, const std::vector<double>& center, double width);
/// cos(xi1.x1 + xi2.x2 + phase) with xi = (2 pi / L) k.
SpatialField mode_field(const GridSpec& spec, const std::vector<int>& k1, const std::vector<int>& k2,
                        double phase = 0.0);

/// Union of 1..max_rects random dyadic tubes of `type` (cell-resolved, strictly inside the box).
OpenSetMask random_dyadic_union(const GridSpec& spec, std::size_t max_rects, std::uint64_t seed, DyadicType type);

}  // namespace tha
