#include "tha/suite.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <random>

namespace tha {

const std::vector<std::string>& suite_generators() {
  static const std::vector<std::string> names{"bump", "mode", "checkerboard", "spike", "random-bandlimited"};
  return names;
}

SpatialField bump_field(const GridSpec& spec, const std::vector<double>& center, double width) {
  if (static_cast<int>(center.size()) != spec.dims()) throw ConfigError("bump: center must have 2m components");
  if (!(width > 0.0)) throw ConfigError("bump: width must be positive");
  const double L = spec.period();
  std::vector<double> v(spec.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto x = spec.coordinates(i);
    double rho2 = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      double d = std::fmod(std::abs(x[k] - center[k]), L);
      d = std::min(d, L - d);
      rho2 += d * d;
    }
    rho2 /= width * width;
    v[i] = rho2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - rho2)) : 0.0;
  }
  return SpatialField::from_real(spec, v);
}

SpatialField mode_field(const GridSpec& spec, const std::vector<int>& k1, const std::vector<int>& k2, double phase) {
  const auto m = static_cast<std::size_t>(spec.m());
  if (k1.size() != m || k2.size() != m) throw ConfigError("mode: wave vectors must have m components");
  const double w = 2.0 * std::numbers::pi / spec.period();
  std::vector<double> v(spec.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto x = spec.coordinates(i);
    double t = phase;
    for (std::size_t c = 0; c < m; ++c) t += w * (k1[c] * x[c] + k2[c] * x[m + c]);
    v[i] = std::cos(t);
  }
  return SpatialField::from_real(spec, v);
}

namespace {

bool all_zero(const std::vector<int>& k) {
  for (int c : k)
    if (c != 0) return false;
  return true;
}

// Random wave vectors with components in [-K, K], optionally off the degenerate sets.
std::pair<std::vector<int>, std::vector<int>> draw_mode(std::mt19937_64& rng, const GridSpec& spec,
                                                        const SuiteOptions& opt) {
  const auto m = static_cast<std::size_t>(spec.m());
  const int K = std::max(1, std::min(opt.max_mode, spec.n() / 2 - 1));
  std::uniform_int_distribution<int> comp(-K, K);
  std::vector<int> k1(m), k2(m), sum(m);
  while (true) {
    for (std::size_t c = 0; c < m; ++c) {
      k1[c] = comp(rng);
      k2[c] = comp(rng);
      sum[c] = k1[c] + k2[c];
    }
    const bool degenerate = all_zero(k1) || all_zero(k2) || all_zero(sum);
    if (!opt.avoid_degenerate || !degenerate) return {k1, k2};
  }
}

}  // namespace

std::vector<SpatialField> generate_suite(const std::string& name, std::uint64_t seed, const GridSpec& spec,
                                         const SuiteOptions& opt) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double L = spec.period();
  std::vector<SpatialField> out;
  if (name == "bump") {
    for (std::size_t s = 0; s < opt.count; ++s) {
      std::vector<double> c(static_cast<std::size_t>(spec.dims()));
      for (double& x : c) x = L * unit(rng);
      const double w = opt.width > 0.0 ? opt.width : L * (0.125 + 0.125 * unit(rng));
      out.push_back(bump_field(spec, c, w));
    }
  } else if (name == "mode") {
    for (std::size_t s = 0; s < opt.count; ++s) {
      auto [k1, k2] = draw_mode(rng, spec, opt);
      out.push_back(mode_field(spec, k1, k2, 2.0 * std::numbers::pi * unit(rng)));
    }
  } else if (name == "checkerboard") {
    const int top = std::max(1, std::countr_zero(static_cast<unsigned>(spec.n())) - 1);
    std::uniform_int_distribution<int> level(0, top);
    for (std::size_t s = 0; s < opt.count; ++s) {
      const int side = 1 << level(rng);
      std::vector<double> v(spec.size());
      std::vector<int> idx(static_cast<std::size_t>(spec.m()));
      for (std::size_t i = 0; i < v.size(); ++i) {
        int parity = 0;
        spec.block_indices(spec.block1_of(i), idx);
        for (int c : idx) parity += c / side;
        spec.block_indices(spec.block2_of(i), idx);
        for (int c : idx) parity += c / side;
        v[i] = parity % 2 ? -1.0 : 1.0;
      }
      out.push_back(SpatialField::from_real(spec, v));
    }
  } else if (name == "spike") {
    // A fixed physical width puts corners on a lattice of that width, so refining the grid keeps
    // the same set.
    std::uniform_int_distribution<int> extent(1, 2);
    for (std::size_t s = 0; s < opt.count; ++s) {
      const double height = std::pow(10.0, 3.0 * unit(rng));
      const int w = opt.width > 0.0 ? std::max(1, static_cast<int>(std::lround(opt.width / spec.spacing())))
                                    : extent(rng);
      const int slots = std::max(1, spec.n() / w);
      std::vector<int> corner(static_cast<std::size_t>(spec.dims()));
      for (int& c : corner) c = w * std::min(slots - 1, static_cast<int>(unit(rng) * slots));
      std::vector<double> v(spec.size(), 0.0);
      std::vector<int> i1(static_cast<std::size_t>(spec.m())), i2(i1);
      const int m = spec.m(), n = spec.n();
      for (std::size_t i = 0; i < v.size(); ++i) {
        spec.block_indices(spec.block1_of(i), i1);
        spec.block_indices(spec.block2_of(i), i2);
        bool inside = true;
        for (int c = 0; c < m; ++c) {
          const int d1 = (i1[static_cast<std::size_t>(c)] - corner[static_cast<std::size_t>(c)] + n) % n;
          const int d2 = (i2[static_cast<std::size_t>(c)] - corner[static_cast<std::size_t>(m + c)] + n) % n;
          inside = inside && d1 < w && d2 < w;
        }
        if (inside) v[i] = height;
      }
      out.push_back(SpatialField::from_real(spec, v));
    }
  } else if (name == "random-bandlimited") {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t s = 0; s < opt.count; ++s) {
      std::vector<double> v(spec.size(), 0.0);
      for (int t = 0; t < std::max(1, opt.modes); ++t) {
        auto [k1, k2] = draw_mode(rng, spec, opt);
        const double amp = gauss(rng);
        const auto f = mode_field(spec, k1, k2, 2.0 * std::numbers::pi * unit(rng));
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += amp * f.values[i].real();
      }
      out.push_back(SpatialField::from_real(spec, v));
    }
  } else {
    throw ConfigError("unknown suite generator '" + name + "'");
  }
  return out;
}

OpenSetMask random_dyadic_union(const GridSpec& spec, std::size_t max_rects, std::uint64_t seed, DyadicType type) {
  if (max_rects == 0) throw ConfigError("random_dyadic_union: need at least one rectangle");
  std::mt19937_64 rng(seed);
  const int e = static_cast<int>(std::lround(std::log2(spec.spacing())));
  const int top = std::countr_zero(static_cast<unsigned>(spec.n()));
  std::uniform_int_distribution<std::size_t> how_many(1, max_rects);
  std::uniform_int_distribution<int> level(0, std::max(0, top - 2));
  OpenSetMask mask = OpenSetMask::empty(spec);
  const std::size_t count = how_many(rng);
  for (std::size_t r = 0; r < count; ++r) {
    int k1 = 0, k2 = 0;
    do {
      k1 = level(rng);
      k2 = level(rng);
    } while (!type_admits(type, k1 + e, k2 + e));
    DyadicTube t{type, k1 + e, k2 + e, {}, {}};
    std::uniform_int_distribution<long> ia(0, (spec.n() >> k1) - 1), ib(0, (spec.n() >> k2) - 1);
    for (int c = 0; c < spec.m(); ++c) {
      t.a.push_back(ia(rng));
      t.b.push_back(ib(rng));
    }
    mask.add(t);
  }
  return mask;
}

}  // namespace tha
