#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>

#include "fft.hpp"
#include "stencil.hpp"
#include "tha/geometry.hpp"

namespace tha {

namespace detail {

int half_width(double h, double rho) {
  if (!(rho > 0.0)) return 0;
  int k = static_cast<int>(std::floor(rho / h));
  while (k > 0 && !(k * h < rho)) --k;
  return k;
}

long ball_key(double h, double rho) {
  if (!(rho > h)) return 0;
  const double q = (rho / h) * (rho / h);
  long k = static_cast<long>(std::ceil(q)) - 1;
  while (k > 0 && !(std::sqrt(static_cast<double>(k)) * h < rho)) --k;
  return k;
}

// Lattice offsets of the rasterized ball {k : |k| h < rho} ∪ {0} in Z^m.
std::vector<std::vector<int>> ball_offsets(int m, double h, double rho) {
  const int J = half_width(h, rho);
  std::vector<std::vector<int>> out;
  std::vector<int> k(static_cast<std::size_t>(m), -J);
  while (true) {
    double s = 0.0;
    bool zero = true;
    for (int c : k) {
      s += static_cast<double>(c) * c;
      zero = zero && c == 0;
    }
    if (zero || std::sqrt(s) * h < rho) out.push_back(k);
    int axis = m - 1;
    while (axis >= 0 && ++k[static_cast<std::size_t>(axis)] > J) k[static_cast<std::size_t>(axis--)] = -J;
    if (axis < 0) break;
  }
  return out;
}

double ball_count(const GridSpec& spec, double rho) {
  if (spec.m() == 1) return 2.0 * half_width(spec.spacing(), rho) + 1.0;
  return static_cast<double>(ball_offsets(spec.m(), spec.spacing(), rho).size());
}

std::vector<double> ball_multiplier(const GridSpec& spec, double rho) {
  const int n = spec.n();
  std::vector<double> out(spec.block_size());
  if (spec.m() == 1) {
    const int J = half_width(spec.spacing(), rho);
    const double w = 2.0 * J + 1.0;
    for (int i = 0; i < n; ++i) {
      const double theta = 2.0 * std::numbers::pi * spec.signed_index(i) / n;
      const double s = std::sin(0.5 * theta);
      out[static_cast<std::size_t>(i)] = std::abs(s) < 1e-15 ? 1.0 : std::sin((J + 0.5) * theta) / s / w;
    }
    return out;
  }
  const auto offs = ball_offsets(spec.m(), spec.spacing(), rho);
  std::vector<std::complex<double>> prof(spec.block_size());
  for (const auto& k : offs) prof[spec.block_flat(k)] += 1.0;
  detail::dft_cube_inplace(prof, n, spec.m(), -1);
  const double inv = 1.0 / static_cast<double>(offs.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = prof[i].real() * inv;
  return out;
}

}  // namespace detail

namespace {

using detail::ball_count;
using detail::ball_multiplier;
using detail::ball_offsets;
using detail::half_width;

// Which lines a block filter slides along.
enum class Line { First, Second, Diagonal };

void sliding_max_periodic(std::vector<double>& buf, int J, std::deque<int>& dq, std::vector<double>& out) {
  const int n = static_cast<int>(buf.size());
  if (2 * J + 1 >= n) {
    const double mx = *std::max_element(buf.begin(), buf.end());
    std::fill(buf.begin(), buf.end(), mx);
    return;
  }
  out.assign(buf.size(), 0.0);
  dq.clear();
  auto at = [&](int k) { return buf[static_cast<std::size_t>(((k % n) + n) % n)]; };
  // Window for position i covers i-J .. i+J.
  for (int k = -J; k < n + J; ++k) {
    while (!dq.empty() && at(dq.back()) <= at(k)) dq.pop_back();
    dq.push_back(k);
    const int i = k - J;
    if (i >= 0) {
      while (dq.front() < i - J) dq.pop_front();
      out[static_cast<std::size_t>(i)] = at(dq.front());
    }
  }
  buf.swap(out);
}

void filter_1d(std::vector<double>& v, const GridSpec& spec, Line line, double rho) {
  const int J = half_width(spec.spacing(), rho);
  if (J == 0) return;
  const int n = spec.n();
  std::vector<double> buf(static_cast<std::size_t>(n)), scratch;
  std::deque<int> dq;
  auto idx = [&](int c, int t) -> std::size_t {
    switch (line) {
      case Line::First: return spec.join(static_cast<std::size_t>(t), static_cast<std::size_t>(c));
      case Line::Second: return spec.join(static_cast<std::size_t>(c), static_cast<std::size_t>(t));
      case Line::Diagonal:
        return spec.join(static_cast<std::size_t>(t), static_cast<std::size_t>((c + t) % n));
    }
    return 0;
  };
  for (int c = 0; c < n; ++c) {
    for (int t = 0; t < n; ++t) buf[static_cast<std::size_t>(t)] = v[idx(c, t)];
    sliding_max_periodic(buf, J, dq, scratch);
    for (int t = 0; t < n; ++t) v[idx(c, t)] = buf[static_cast<std::size_t>(t)];
  }
}

void filter_brute(std::vector<double>& v, const GridSpec& spec, Line line, double rho) {
  const auto offs = ball_offsets(spec.m(), spec.spacing(), rho);
  if (offs.size() == 1) return;
  const int m = spec.m();
  std::vector<double> out(v.size());
  std::vector<int> i1(static_cast<std::size_t>(m)), i2(static_cast<std::size_t>(m));
  std::vector<int> s1(static_cast<std::size_t>(m)), s2(static_cast<std::size_t>(m));
  for (std::size_t p = 0; p < v.size(); ++p) {
    spec.block_indices(spec.block1_of(p), i1);
    spec.block_indices(spec.block2_of(p), i2);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& k : offs) {
      for (int c = 0; c < m; ++c) {
        const auto cc = static_cast<std::size_t>(c);
        s1[cc] = i1[cc] + (line != Line::Second ? k[cc] : 0);
        s2[cc] = i2[cc] + (line != Line::First ? k[cc] : 0);
      }
      best = std::max(best, v[spec.join(spec.block_flat(s1), spec.block_flat(s2))]);
    }
    out[p] = best;
  }
  v.swap(out);
}

void block_filter(std::vector<double>& v, const GridSpec& spec, Line line, double rho) {
  if (spec.m() == 1)
    filter_1d(v, spec, line, rho);
  else
    filter_brute(v, spec, line, rho);
}

}  // namespace

double tube_cell_count(const GridSpec& spec, const std::array<double, 3>& radii) {
  const auto pair = defining_pair(radii);
  return ball_count(spec, pair[0]) * ball_count(spec, pair[1]);
}

std::vector<double> tube_average_multiplier(const GridSpec& spec, const std::array<double, 3>& radii) {
  const Regime g = classify_regime(radii);
  const auto pair = defining_pair(radii);
  const auto pa = ball_multiplier(spec, pair[0]);
  const auto pb = ball_multiplier(spec, pair[1]);
  const std::size_t B = spec.block_size();
  const int m = spec.m();
  std::vector<double> out(spec.size());
  std::vector<int> i1(static_cast<std::size_t>(m)), i2(static_cast<std::size_t>(m)), s(static_cast<std::size_t>(m));
  for (std::size_t b1 = 0; b1 < B; ++b1) {
    spec.block_indices(b1, i1);
    for (std::size_t b2 = 0; b2 < B; ++b2) {
      double v = 0.0;
      if (g == Regime::Rect) {
        v = pa[b1] * pb[b2];
      } else {
        spec.block_indices(b2, i2);
        for (int c = 0; c < m; ++c) {
          const auto cc = static_cast<std::size_t>(c);
          s[cc] = i1[cc] + i2[cc];
        }
        const std::size_t sum = spec.block_flat(s);
        v = (g == Regime::ParaFirst ? pa[b1] : pa[b2]) * pb[sum];
      }
      out[spec.join(b1, b2)] = v;
    }
  }
  return out;
}

std::vector<double> tube_average(std::span<const double> values, const GridSpec& spec,
                                 const std::array<double, 3>& radii) {
  if (values.size() != spec.size()) throw SpecMismatch("tube_average: sample count mismatch");
  std::vector<std::complex<double>> buf(values.begin(), values.end());
  detail::dft_cube_inplace(buf, spec.n(), spec.dims(), -1);
  const auto mult = tube_average_multiplier(spec, radii);
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= mult[i];
  detail::dft_cube_inplace(buf, spec.n(), spec.dims(), +1);
  std::vector<double> out(values.size());
  const double inv = 1.0 / static_cast<double>(spec.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = buf[i].real() * inv;
  return out;
}

std::vector<double> tube_max_filter(std::span<const double> values, const GridSpec& spec,
                                    const std::array<double, 3>& radii) {
  if (values.size() != spec.size()) throw SpecMismatch("tube_max_filter: sample count mismatch");
  std::vector<double> v(values.begin(), values.end());
  switch (classify_regime(radii)) {
    case Regime::Rect:
      block_filter(v, spec, Line::First, radii[0]);
      block_filter(v, spec, Line::Second, radii[1]);
      break;
    case Regime::ParaFirst:
      block_filter(v, spec, Line::First, radii[0]);
      block_filter(v, spec, Line::Diagonal, radii[2]);
      break;
    case Regime::ParaSecond:
      block_filter(v, spec, Line::Second, radii[1]);
      block_filter(v, spec, Line::Diagonal, radii[2]);
      break;
  }
  return v;
}

}  // namespace tha
