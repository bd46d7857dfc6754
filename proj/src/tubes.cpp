#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "tha/geometry.hpp"

namespace tha {

Regime classify_regime(const std::array<double, 3>& r) {
  if (r[0] >= r[2] && r[1] >= r[2]) return Regime::Rect;
  if (r[0] >= r[1] && r[2] >= r[1]) return Regime::ParaFirst;
  return Regime::ParaSecond;
}

const char* regime_name(Regime g) {
  switch (g) {
    case Regime::Rect: return "rect";
    case Regime::ParaFirst: return "para-first";
    case Regime::ParaSecond: return "para-second";
  }
  return "?";
}

std::array<double, 2> defining_pair(const std::array<double, 3>& r) {
  switch (classify_regime(r)) {
    case Regime::Rect: return {r[0], r[1]};
    case Regime::ParaFirst: return {r[0], r[2]};
    case Regime::ParaSecond: return {r[1], r[2]};
  }
  return {0.0, 0.0};
}

TubeSpec make_tube(std::vector<double> center, const std::array<double, 3>& radii) {
  if (center.empty() || center.size() % 2 != 0) throw ConfigError("tube: center must have 2m components");
  for (double v : radii)
    if (!(v > 0.0)) throw ConfigError("tube: radii must be positive");
  return TubeSpec{std::move(center), radii};
}

namespace {

double norm_of_difference(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

double norm(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

// Membership of an offset d = p - center in T(0, r).
bool offset_in_tube(std::span<const double> d, const std::array<double, 3>& r) {
  const std::size_t m = d.size() / 2;
  auto d1 = d.subspan(0, m);
  auto d2 = d.subspan(m, m);
  switch (classify_regime(r)) {
    case Regime::Rect: return norm(d1) < r[0] && norm(d2) < r[1];
    case Regime::ParaFirst: return norm_of_difference(d1, d2) < r[0] && norm(d2) < r[2];
    case Regime::ParaSecond: return norm_of_difference(d2, d1) < r[1] && norm(d1) < r[2];
  }
  return false;
}

}  // namespace

bool tube_contains(const TubeSpec& tube, std::span<const double> p) {
  if (p.size() != tube.center.size()) throw ConfigError("tube_contains: dimension mismatch");
  std::vector<double> d(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) d[k] = p[k] - tube.center[k];
  return offset_in_tube(d, tube.radii);
}

double unit_ball_volume(int m) {
  return std::pow(std::numbers::pi, 0.5 * m) / std::tgamma(0.5 * m + 1.0);
}

double tube_volume(const TubeSpec& tube) {
  const auto pair = defining_pair(tube.radii);
  const double v = unit_ball_volume(tube.m());
  return v * v * std::pow(pair[0] * pair[1], tube.m());
}

std::vector<double> pi_project(std::span<const double> q, int m) {
  if (static_cast<int>(q.size()) != 3 * m) throw ConfigError("pi_project: point must have 3m components");
  std::vector<double> out(static_cast<std::size_t>(2 * m));
  for (int k = 0; k < m; ++k) {
    out[static_cast<std::size_t>(k)] = q[static_cast<std::size_t>(k)] + q[static_cast<std::size_t>(2 * m + k)];
    out[static_cast<std::size_t>(m + k)] =
        q[static_cast<std::size_t>(m + k)] + q[static_cast<std::size_t>(2 * m + k)];
  }
  return out;
}

bool in_projected_ball(std::span<const double> d, const std::array<double, 3>& r) {
  const std::size_t m = d.size() / 2;
  if (m == 1) {
    const double lo = std::max({d[0] - r[0], d[1] - r[1], -r[2]});
    const double hi = std::min({d[0] + r[0], d[1] + r[1], r[2]});
    return lo < hi;
  }
  // Cyclic projections onto the three closed balls around d1, d2 and 0, shrunk slightly so
  // that a limit point is interior to the open balls.
  std::array<std::vector<double>, 3> centers{std::vector<double>(d.begin(), d.begin() + static_cast<long>(m)),
                                             std::vector<double>(d.begin() + static_cast<long>(m), d.end()),
                                             std::vector<double>(m, 0.0)};
  std::vector<double> u(m, 0.0);
  auto inside = [&](double shrink) {
    for (int j = 0; j < 3; ++j)
      if (!(norm_of_difference(u, centers[static_cast<std::size_t>(j)]) < r[static_cast<std::size_t>(j)] * shrink))
        return false;
    return true;
  };
  for (int it = 0; it < 20000; ++it) {
    if (inside(1.0)) return true;
    for (int j = 0; j < 3; ++j) {
      const auto& c = centers[static_cast<std::size_t>(j)];
      const double rad = r[static_cast<std::size_t>(j)] * (1.0 - 1e-9);
      const double dist = norm_of_difference(u, c);
      if (dist > rad)
        for (std::size_t k = 0; k < m; ++k) u[k] = c[k] + (u[k] - c[k]) * (rad / dist);
    }
  }
  return inside(1.0);
}

namespace {

void sample_ball(std::mt19937_64& rng, double radius, std::span<double> out) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double s = 0.0;
  for (double& v : out) {
    v = gauss(rng);
    s += v * v;
  }
  s = std::sqrt(s);
  const double rad = radius * std::pow(unit(rng), 1.0 / static_cast<double>(out.size()));
  for (double& v : out) v *= rad / s;
}

// Uniform sample of T(0, r) through the shear that parametrizes its regime.
void sample_tube_offset(std::mt19937_64& rng, const std::array<double, 3>& r, std::span<double> d) {
  const std::size_t m = d.size() / 2;
  std::vector<double> s(m), t(m);
  switch (classify_regime(r)) {
    case Regime::Rect:
      sample_ball(rng, r[0], s);
      sample_ball(rng, r[1], t);
      for (std::size_t k = 0; k < m; ++k) {
        d[k] = s[k];
        d[m + k] = t[k];
      }
      break;
    case Regime::ParaFirst:
      sample_ball(rng, r[0], s);
      sample_ball(rng, r[2], t);
      for (std::size_t k = 0; k < m; ++k) {
        d[k] = s[k] + t[k];
        d[m + k] = t[k];
      }
      break;
    case Regime::ParaSecond:
      sample_ball(rng, r[1], s);
      sample_ball(rng, r[2], t);
      for (std::size_t k = 0; k < m; ++k) {
        d[k] = t[k];
        d[m + k] = s[k] + t[k];
      }
      break;
  }
}

}  // namespace

ContainmentReport containment_check(std::span<const double> x, const std::array<double, 3>& r,
                                    std::size_t samples, std::uint64_t seed, double inner_factor,
                                    double outer_factor) {
  if (x.empty() || x.size() % 2 != 0) throw ConfigError("containment_check: x must have 2m components");
  for (double v : r)
    if (!(v > 0.0)) throw ConfigError("containment_check: radii must be positive");
  const std::size_t m = x.size() / 2;
  std::mt19937_64 rng(seed);
  ContainmentReport rep;
  const std::array<double, 3> inner{inner_factor * r[0], inner_factor * r[1], inner_factor * r[2]};
  const std::array<double, 3> outer{outer_factor * r[0], outer_factor * r[1], outer_factor * r[2]};
  std::vector<double> d(2 * m);
  std::vector<double> u1(m), u2(m), u3(m);
  for (std::size_t s = 0; s < samples; ++s) {
    sample_tube_offset(rng, inner, d);
    ++rep.inner_samples;
    if (!in_projected_ball(d, r)) ++rep.inner_violations;

    sample_ball(rng, r[0], u1);
    sample_ball(rng, r[1], u2);
    sample_ball(rng, r[2], u3);
    for (std::size_t k = 0; k < m; ++k) {
      d[k] = u1[k] + u3[k];
      d[m + k] = u2[k] + u3[k];
    }
    ++rep.outer_samples;
    if (!offset_in_tube(d, outer)) ++rep.outer_violations;
  }
  return rep;
}

}  // namespace tha
