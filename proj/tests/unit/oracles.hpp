// Independent reference computations used by the unit tests.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "tha/geometry.hpp"
#include "tha/grid.hpp"

namespace oracle {

inline double poisson_1d(double a, double x) { return a / (std::numbers::pi * (a * a + x * x)); }

/// Period-L image sum of the 1-D Poisson kernel, truncated at |k| <= K with a tail correction.
inline double periodized_poisson(double a, double x, double L, int K = 20000) {
  double s = 0.0;
  for (int k = -K; k <= K; ++k) s += poisson_1d(a, x + k * L);
  // Tail of a / (pi x^2) beyond |x| ~ K L on both sides.
  s += 2.0 * a / (std::numbers::pi * L * L * (K + 0.5));
  return s;
}

/// Fiber integral of three periodized kernels by the trapezoid rule on a periodic grid.
inline double twisted_kernel_point(double x1, double x2, const std::array<double, 3>& r, double L, int samples) {
  double s = 0.0;
  const double du = L / samples;
  for (int k = 0; k < samples; ++k) {
    const double u = k * du;
    s += periodized_poisson(r[0], x1 - u, L, 400) * periodized_poisson(r[1], x2 - u, L, 400) *
         periodized_poisson(r[2], u, L, 400);
  }
  return s * du;
}

/// Integer offsets d (length 2m) with d*h inside the continuous tube T(0, r).
inline std::vector<std::vector<int>> tube_offsets(const tha::GridSpec& spec, const std::array<double, 3>& r) {
  const int m = spec.m();
  const double h = spec.spacing();
  const int R = static_cast<int>(std::ceil((r[0] + r[1] + r[2]) / h)) + 1;
  std::vector<std::vector<int>> out;
  std::vector<int> d(static_cast<std::size_t>(2 * m), -R);
  const tha::TubeSpec tube = tha::make_tube(std::vector<double>(static_cast<std::size_t>(2 * m), 0.0), r);
  std::vector<double> p(d.size());
  while (true) {
    for (std::size_t k = 0; k < d.size(); ++k) p[k] = d[k] * h;
    if (tha::tube_contains(tube, p)) out.push_back(d);
    std::size_t k = 0;
    while (k < d.size() && ++d[k] > R) d[k++] = -R;
    if (k == d.size()) break;
  }
  return out;
}

inline std::size_t shifted(const tha::GridSpec& spec, std::size_t flat, const std::vector<int>& d) {
  const int m = spec.m(), n = spec.n();
  std::vector<int> i1(static_cast<std::size_t>(m)), i2(i1);
  spec.block_indices(spec.block1_of(flat), i1);
  spec.block_indices(spec.block2_of(flat), i2);
  for (int c = 0; c < m; ++c) {
    i1[static_cast<std::size_t>(c)] = ((i1[static_cast<std::size_t>(c)] + d[static_cast<std::size_t>(c)]) % n + n) % n;
    i2[static_cast<std::size_t>(c)] =
        ((i2[static_cast<std::size_t>(c)] + d[static_cast<std::size_t>(m + c)]) % n + n) % n;
  }
  return spec.join(spec.block_flat(i1), spec.block_flat(i2));
}

/// Average and max over the rasterized tube by direct summation.
inline std::vector<double> tube_average(std::span<const double> v, const tha::GridSpec& spec,
                                        const std::array<double, 3>& r) {
  const auto offs = tube_offsets(spec, r);
  std::vector<double> out(spec.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = 0.0;
    for (const auto& d : offs) s += v[shifted(spec, i, d)];
    out[i] = s / static_cast<double>(offs.size());
  }
  return out;
}

inline std::vector<double> tube_max(std::span<const double> v, const tha::GridSpec& spec,
                                    const std::array<double, 3>& r) {
  const auto offs = tube_offsets(spec, r);
  std::vector<double> out(spec.size(), -INFINITY);
  for (std::size_t i = 0; i < out.size(); ++i)
    for (const auto& d : offs) out[i] = std::max(out[i], v[shifted(spec, i, d)]);
  return out;
}

/// Number of tubes containing each cell's lower-left corner, counting periodic images.
inline std::vector<int> coverage(std::span<const tha::DyadicTube> tubes, const tha::GridSpec& spec) {
  const int dims = spec.dims();
  const double L = spec.period();
  std::vector<int> out(spec.size(), 0);
  std::vector<double> p(static_cast<std::size_t>(dims));
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto x = spec.coordinates(i);
    int images = 1;
    for (int k = 0; k < dims; ++k) images *= 3;
    for (int code = 0; code < images; ++code) {
      int c = code;
      for (int k = 0; k < dims; ++k) {
        p[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)] + (c % 3 - 1) * L;
        c /= 3;
      }
      for (const auto& t : tubes) out[i] += t.contains(p);
    }
  }
  return out;
}

/// Cell-corner subset test with periodic images: every corner of `inner` lies in `mask`.
inline bool mask_contains(const tha::OpenSetMask& mask, const tha::DyadicTube& t) {
  const auto cover = coverage(std::span<const tha::DyadicTube>(&t, 1), mask.spec);
  for (std::size_t i = 0; i < cover.size(); ++i)
    if (cover[i] > 0 && !mask.cells[i]) return false;
  return true;
}

inline std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = g(rng);
  return v;
}

}  // namespace oracle
