#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "tha/geometry.hpp"
#include "tha/suite.hpp"

using namespace tha;

namespace {

double mc_volume(const TubeSpec& tube, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double R = tube.radii[0] + tube.radii[1] + tube.radii[2];
  std::vector<double> p(tube.center.size());
  std::size_t hits = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = tube.center[k] + R * u(rng);
    hits += tube_contains(tube, p);
  }
  return std::pow(2.0 * R, static_cast<double>(p.size())) * static_cast<double>(hits) / static_cast<double>(samples);
}

}  // namespace

TEST_CASE("regimes: tie-breaks") {
  CHECK(classify_regime({1, 1, 1}) == Regime::Rect);
  CHECK(classify_regime({1, 2, 0.5}) == Regime::Rect);
  CHECK(classify_regime({1, 0.5, 2}) == Regime::ParaFirst);
  CHECK(classify_regime({1, 0.5, 1}) == Regime::ParaFirst);
  CHECK(classify_regime({0.5, 1, 2}) == Regime::ParaSecond);
  CHECK(classify_regime({0, 0, 1}) == Regime::ParaFirst);
  CHECK(classify_regime({1, 0, 0}) == Regime::Rect);
  CHECK(classify_regime({0, 1, 1}) == Regime::ParaSecond);
}

TEST_CASE("tube membership: examples") {
  const auto para = make_tube({0.0, 0.0}, {1, 0.5, 2});
  const double p1[] = {1.4, 1.0};
  CHECK(tube_contains(para, p1));
  const auto rect = make_tube({0.0, 0.0}, {1, 2, 0.5});
  const double in[] = {0.9, 1.9}, out[] = {1.1, 0.0};
  CHECK(tube_contains(rect, in));
  CHECK_FALSE(tube_contains(rect, out));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.01, 3.0);
  for (int t = 0; t < 50; ++t) {
    const auto tube = make_tube({u(rng), u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)});
    CHECK(tube_contains(tube, tube.center));
  }
  CHECK_THROWS_AS(make_tube({0.0, 0.0}, {1, 0, 1}), ConfigError);
}

TEST_CASE("tube volume: exact values and Monte Carlo oracle") {
  CHECK(tube_volume(make_tube({0.0, 0.0}, {1, 2, 0.5})) == doctest::Approx(8.0));
  CHECK(tube_volume(make_tube({0.0, 0.0}, {1, 0.5, 2})) == doctest::Approx(8.0));
  CHECK(tube_volume(make_tube({0.0, 0.0}, {1, 1, 1})) == doctest::Approx(4.0));
  CHECK(unit_ball_volume(2) == doctest::Approx(std::numbers::pi));
  for (const auto& r : {std::array<double, 3>{1, 2, 0.5}, {1, 0.5, 2}, {0.4, 1, 0.8}, {1.5, 1.2, 1.3}}) {
    const auto tube = make_tube({0.3, -0.2}, r);
    CHECK(mc_volume(tube, 1000000, 7) == doctest::Approx(tube_volume(tube)).epsilon(0.01));
  }
  const auto t2 = make_tube({0.0, 0.0, 0.0, 0.0}, {0.7, 0.5, 0.9});
  CHECK(mc_volume(t2, 1000000, 8) == doctest::Approx(tube_volume(t2)).epsilon(0.02));
}

TEST_CASE("projection and projected balls") {
  const double z[] = {0, 0, 0};
  CHECK(pi_project(z, 1) == std::vector<double>{0, 0});
  const double q[] = {1, 2, 3};
  CHECK(pi_project(q, 1) == std::vector<double>{4, 5});
  // Brute force over u on a fine grid for m = 1.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0), rad(0.1, 2.0);
  int checked = 0;
  for (int t = 0; t < 400; ++t) {
    const double d[] = {u(rng), u(rng)};
    const std::array<double, 3> r{rad(rng), rad(rng), rad(rng)};
    bool brute = false, margin = true;
    for (int k = -20000; k <= 20000 && !brute; ++k) {
      const double w = r[2] * k / 20000.0;
      const double g = std::min({r[0] - std::abs(d[0] - w), r[1] - std::abs(d[1] - w), r[2] - std::abs(w)});
      brute = g > 0.0;
      if (std::abs(g) < 1e-3) margin = false;
    }
    if (!margin) continue;
    ++checked;
    CHECK(in_projected_ball(d, r) == brute);
  }
  CHECK(checked > 200);
}

TEST_CASE("containment: holds at factor 2, fails when the outer tube shrinks") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.05, 5.0);
  for (int t = 0; t < 10; ++t) {
    const double x[] = {u(rng), u(rng)};
    const auto rep = containment_check(x, {u(rng), u(rng), u(rng)}, 1000, 100 + t);
    CHECK(rep.inner_violations == 0);
    CHECK(rep.outer_violations == 0);
  }
  const double x[] = {0.0, 0.0};
  const auto near = containment_check(x, {1, 1, 1 + 1e-9}, 10000, 4);
  CHECK(near.inner_violations + near.outer_violations == 0);
  const auto adversarial = containment_check(x, {1, 0.7, 1.3}, 10000, 5, 0.5, 0.4);
  CHECK(adversarial.outer_violations > 0);
  const double x2[] = {0.1, 0.2, 0.3, 0.4};
  const auto m2 = containment_check(x2, {0.6, 0.9, 0.4}, 2000, 6);
  CHECK(m2.inner_violations + m2.outer_violations == 0);
}

TEST_CASE("rasterized tubes: cell counts, averages and max filters against direct summation") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> rad(0.3, 4.0);
  const auto spec = make_grid(1, 16, 16.0);
  const auto v = oracle::random_values(spec.size(), 4);
  for (int t = 0; t < 12; ++t) {
    const std::array<double, 3> r{rad(rng), rad(rng), rad(rng)};
    CHECK(tube_cell_count(spec, r) == static_cast<double>(oracle::tube_offsets(spec, r).size()));
    const auto avg = tube_average(v, spec, r);
    const auto ref = oracle::tube_average(v, spec, r);
    const auto mx = tube_max_filter(v, spec, r);
    const auto mref = oracle::tube_max(v, spec, r);
    for (std::size_t i = 0; i < v.size(); ++i) {
      CHECK(avg[i] == doctest::Approx(ref[i]).epsilon(1e-9).scale(1.0));
      CHECK(mx[i] == mref[i]);
    }
  }
  const auto spec2 = make_grid(2, 4, 4.0);
  const auto v2 = oracle::random_values(spec2.size(), 5);
  const std::array<double, 3> r2{1.5, 0.9, 2.2};
  const auto mx2 = tube_max_filter(v2, spec2, r2);
  const auto ref2 = oracle::tube_max(v2, spec2, r2);
  const auto avg2 = tube_average(v2, spec2, r2);
  const auto aref2 = oracle::tube_average(v2, spec2, r2);
  for (std::size_t i = 0; i < v2.size(); ++i) {
    CHECK(mx2[i] == ref2[i]);
    CHECK(avg2[i] == doctest::Approx(aref2[i]).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("dyadic scales: classification") {
  CHECK(classify_scale({0, 0, 0}) == ScaleClass{DyadicType::I, 0, 0});
  CHECK(classify_scale({2, 0, 3}) == ScaleClass{DyadicType::II, 2, 3});
  CHECK(classify_scale({0, 5, 2}) == ScaleClass{DyadicType::V, 5, 2});
  CHECK(classify_scale({0, 3, 1}) == ScaleClass{DyadicType::V, 3, 1});
  CHECK(classify_scale({1, 1, 2}).type == DyadicType::II);
  // Every triple gets a type whose scale order it satisfies.
  for (int a = -2; a <= 2; ++a)
    for (int b = -2; b <= 2; ++b)
      for (int c = -2; c <= 2; ++c) {
        const auto k = classify_scale({a, b, c});
        CHECK(type_admits(k.type, k.s1, k.s2));
      }
  CHECK(parse_dyadic_type("IV") == DyadicType::IV);
  CHECK_THROWS_AS(parse_dyadic_type("VI"), ConfigError);
}

TEST_CASE("dyadic tilings: brute-force coverage with periodic images") {
  const auto unit = enumerate_scale({0, 0, -1}, make_grid(1, 4, 4.0));
  CHECK(unit.size() == 16);
  for (const auto& t : unit) CHECK(t.type == DyadicType::I);

  const auto spec = make_grid(1, 8, 8.0);
  for (const auto& j : {std::array<int, 3>{1, 0, 2}, {0, 3, 1}, {2, 2, 1}, {0, 1, 2}, {1, 0, 0}}) {
    const auto tubes = enumerate_scale(j, spec);
    const auto cover = oracle::coverage(tubes, spec);
    for (int c : cover) CHECK(c == 1);
    CHECK(coverage_count(tubes, spec) == cover);
  }
  const auto fine = make_grid(2, 4, 4.0);
  const auto t2 = enumerate_scale({1, 0, 2}, fine);
  for (int c : oracle::coverage(t2, fine)) CHECK(c == 1);

  CHECK_THROWS_AS(enumerate_scale({-1, -1, -1}, spec), DomainError);
  CHECK_THROWS_AS(enumerate_scale({4, 0, 0}, spec), DomainError);
  CHECK_THROWS_AS(enumerate_scale({0, 0, 0}, make_grid(1, 8, 6.0)), DomainError);
}

namespace {

DyadicTube parent(DyadicTube t, int axis) {
  if (axis == 1) {
    ++t.j1;
    for (auto& v : t.a) v = v >= 0 ? v / 2 : -((-v + 1) / 2);
  } else {
    ++t.j2;
    for (auto& v : t.b) v = v >= 0 ? v / 2 : -((-v + 1) / 2);
  }
  return t;
}

// Every tube of `type` inside the mask, by enumeration of all admissible scales.
std::vector<DyadicTube> contained_tubes(const OpenSetMask& mask, DyadicType type) {
  std::vector<DyadicTube> out;
  const int top = static_cast<int>(std::lround(std::log2(mask.spec.period())));
  const int e = static_cast<int>(std::lround(std::log2(mask.spec.spacing())));
  for (int j1 = e; j1 <= top; ++j1)
    for (int j2 = e; j2 <= top; ++j2) {
      if (!type_admits(type, j1, j2)) continue;
      const long c1 = 1L << (top - j1), c2 = 1L << (top - j2);
      for (long a = 0; a < c1; ++a)
        for (long b = 0; b < c2; ++b) {
          const DyadicTube t{type, j1, j2, {a}, {b}};
          if (oracle::mask_contains(mask, t)) out.push_back(t);
        }
    }
  return out;
}

}  // namespace

TEST_CASE("maximal tubes: brute-force maximality and completeness on 8x8 masks") {
  const auto spec = make_grid(1, 8, 8.0);
  std::vector<OpenSetMask> masks;
  OpenSetMask square = OpenSetMask::empty(spec);
  square.add(DyadicTube{DyadicType::I, 2, 2, {1}, {0}});
  masks.push_back(square);
  OpenSetMask strip = OpenSetMask::empty(spec);
  for (std::size_t i = 0; i < spec.size(); ++i)
    if (spec.block1_of(i) == spec.block2_of(i)) strip.cells[i] = 1;
  masks.push_back(strip);
  for (std::uint64_t s = 0; s < 6; ++s) masks.push_back(random_dyadic_union(spec, 4, s, static_cast<DyadicType>(s % 5)));

  for (const auto& mask : masks)
    for (int ti = 0; ti < 5; ++ti)
      for (int axis = 1; axis <= 2; ++axis) {
        const auto type = static_cast<DyadicType>(ti);
        const auto got = maximal_tubes(mask, type, axis);
        const auto all = contained_tubes(mask, type);
        std::set<std::tuple<int, int, long, long>> got_keys;
        for (const auto& t : got) {
          got_keys.insert({t.j1, t.j2, t.a[0], t.b[0]});
          CHECK(oracle::mask_contains(mask, t));
          const auto p = parent(t, axis);
          const bool too_big = (axis == 1 ? p.j1 : p.j2) > 3 || !type_admits(type, p.j1, p.j2);
          if (!too_big) CHECK_FALSE(oracle::mask_contains(mask, p));
        }
        // A contained tube is maximal exactly when its admissible parent is not contained.
        std::size_t expected = 0;
        for (const auto& t : all) {
          const auto p = parent(t, axis);
          const bool too_big = (axis == 1 ? p.j1 : p.j2) > 3 || !type_admits(type, p.j1, p.j2);
          if (too_big || !oracle::mask_contains(mask, p)) {
            ++expected;
            CHECK(got_keys.count({t.j1, t.j2, t.a[0], t.b[0]}) == 1);
          }
        }
        CHECK(got.size() == expected);
      }
  CHECK(maximal_tubes(OpenSetMask::empty(spec), DyadicType::I, 1).empty());

  OpenSetMask rect = OpenSetMask::empty(spec);
  rect.add(DyadicTube{DyadicType::I, 2, 0, {0}, {0}});
  bool found = false;
  for (const auto& t : maximal_tubes(rect, DyadicType::I, 1)) found = found || (t.j1 == 2 && t.j2 == 0);
  CHECK(found);
}

TEST_CASE("Journe enlargement: caps, direct dilation and monotonicity") {
  const auto spec = make_grid(1, 16, 16.0);
  OpenSetMask full = OpenSetMask::empty(spec);
  std::fill(full.cells.begin(), full.cells.end(), 1);
  const DyadicTube R{DyadicType::I, 1, 0, {3}, {5}};
  CHECK(journe_enlarge(R, full, 1).j1 == 4);
  CHECK(journe_enlarge(R, full, 2).j2 == 4);

  // Single rectangle: I grows iff the doubled tube stays inside the halo.
  OpenSetMask omega = OpenSetMask::empty(spec);
  omega.add(R);
  CHECK(journe_enlarge(R, omega, 1) == R);
  OpenSetMask halo = omega;
  halo.add(parent(R, 1));
  CHECK(journe_enlarge(R, halo, 1) == parent(R, 1));

  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const auto small = random_dyadic_union(spec, 6, 100 + t, DyadicType::I);
    auto big = small;
    const auto extra = random_dyadic_union(spec, 6, 200 + t, DyadicType::II);
    for (std::size_t i = 0; i < big.cells.size(); ++i) big.cells[i] |= extra.cells[i];
    for (const auto& Q : maximal_tubes(small, DyadicType::I, 2)) {
      const auto a = journe_enlarge(Q, small, 1), b = journe_enlarge(Q, big, 1);
      CHECK(a.j1 <= b.j1);
      CHECK(oracle::mask_contains(small, a));
      CHECK(oracle::mask_contains(big, b));
    }
  }
}

TEST_CASE("covering sums: single-rectangle geometric series") {
  const auto spec = make_grid(1, 16, 16.0);
  // Omega = I x J with |I| = 8 cells: maximal tubes along J are I' x J for every dyadic
  // I' inside I, so the ratio is sum_{k=0}^{3} 2^{-k kappa} when the halo is Omega itself.
  OpenSetMask omega = OpenSetMask::empty(spec);
  omega.add(DyadicTube{DyadicType::I, 3, 2, {1}, {2}});
  for (double kappa : {1.0, 2.0, 0.5}) {
    double series = 0.0;
    for (int k = 0; k <= 3; ++k) series += std::pow(2.0, -k * kappa);
    const auto cs = covering_sum(omega, omega, DyadicType::I, kappa);
    CHECK(cs.ratio == doctest::Approx(series));
    CHECK(cs.tubes == 15);
  }
  CHECK_THROWS_AS(covering_sum(OpenSetMask::empty(spec), omega, DyadicType::I, 1.0), PreconditionError);
  CHECK_THROWS_AS(covering_sum(omega, omega, DyadicType::I, 0.0), ConfigError);
}

TEST_CASE("masks: PBM round trip and tube CSV") {
  const auto spec = make_grid(1, 16, 8.0);
  const auto mask = random_dyadic_union(spec, 5, 3, DyadicType::III);
  const auto path = (std::filesystem::temp_directory_path() / "tha_mask_test.pbm").string();
  save_mask(path, mask);
  const auto back = load_mask(path);
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".json");
  CHECK(back.spec == mask.spec);
  CHECK(back.cells == mask.cells);
  CHECK_THROWS_AS(load_mask(path), ConfigError);
  std::ostringstream csv;
  const auto tubes = enumerate_scale({0, 0, 0}, make_grid(1, 2, 2.0));
  write_tubes_csv(csv, tubes);
  const std::string text = csv.str();
  CHECK(std::count(text.begin(), text.end(), '\n') >= 4);
}

TEST_CASE("dyadic geometry needs a power-of-two cell size") {
  const auto spec = make_grid(1, 8, 6.0);
  OpenSetMask mask = OpenSetMask::empty(spec);
  mask.cells[0] = 1;
  CHECK_THROWS_AS(maximal_tubes(mask, DyadicType::I, 1), DomainError);
}
