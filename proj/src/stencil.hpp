#pragma once

#include <vector>

#include "tha/grid.hpp"

namespace tha::detail {

/// Largest k >= 0 with k h < rho (0 when rho <= h).
int half_width(double h, double rho);
/// Largest integer s with sqrt(s) h < rho: two radii with the same key rasterize to the same ball.
long ball_key(double h, double rho);
/// Lattice offsets of the rasterized ball {k : |k| h < rho} ∪ {0} in Z^m.
std::vector<std::vector<int>> ball_offsets(int m, double h, double rho);
double ball_count(const GridSpec& spec, double rho);
/// Normalized DFT of the periodized ball profile over one block (FFT ordering, real by symmetry).
std::vector<double> ball_multiplier(const GridSpec& spec, double rho);

}  // namespace tha::detail
