#include <cmath>
#include <filesystem>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "tha/kernels.hpp"
#include "tha/suite.hpp"

using namespace tha;

namespace {

double rel_l2(std::span<const Complex> a, std::span<const Complex> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return std::sqrt(num / den);
}

SpatialField complex_mode(const GridSpec& spec, int k1, int k2) {
  std::vector<Complex> v(spec.size());
  const double w = 2.0 * std::numbers::pi / spec.period();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto x = spec.coordinates(i);
    v[i] = std::polar(1.0, w * (k1 * x[0] + k2 * x[1]));
  }
  return SpatialField(spec, v, false);
}

}  // namespace

TEST_CASE("poisson kernel: normalization") {
  const double z = 0.0;
  CHECK(poisson_kernel_1d(1, 1.0, std::span<const double>(&z, 1)) == doctest::Approx(1.0 / std::numbers::pi));
  CHECK(poisson_kernel_1d(1, 2.0, std::span<const double>(&z, 1)) ==
        doctest::Approx(1.0 / (2.0 * std::numbers::pi)));
  // Composite Simpson over [-1e4, 1e4].
  const int N = 2000000;
  const double a = -1e4, b = 1e4, h = (b - a) / N;
  double s = 0.0;
  for (int k = 0; k <= N; ++k) {
    const double v = a + k * h;
    const double w = (k == 0 || k == N) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    s += w * poisson_kernel_1d(1, 1.0, std::span<const double>(&v, 1));
  }
  CHECK(std::abs(s * h / 3.0 - 1.0) < 1e-3);
  CHECK_THROWS_AS(poisson_kernel_1d(1, 0.0, std::span<const double>(&z, 1)), PreconditionError);
}

TEST_CASE("periodized poisson: closed form against the image sum") {
  for (double a : {0.05, 0.5, 3.0})
    for (double x : {0.0, 0.7, 2.9, 5.5}) {
      const double L = 6.0;
      CHECK(periodized_poisson_1d(a, x, L) == doctest::Approx(oracle::periodized_poisson(a, x, L)).epsilon(1e-7));
    }
}

TEST_CASE("multiplier: closed-form values") {
  const double z[] = {0.0};
  CHECK(twisted_multiplier(z, z, ScaleTriple::make(0.3, 2.0, 7.0)) == 1.0);
  const double a[] = {1.0}, b[] = {-1.0};
  CHECK(twisted_multiplier(a, b, ScaleTriple::make(1, 1, 5)) == doctest::Approx(std::exp(-2.0)));
  const double c[] = {3.0}, d[] = {4.0};
  CHECK(twisted_multiplier(c, d, ScaleTriple::make(1, 1, 1)) == doctest::Approx(std::exp(-14.0)));
  CHECK(twisted_multiplier(c, d, ScaleTriple::identity()) == 1.0);
}

TEST_CASE("physical kernel: positivity, symmetry and pointwise quadrature oracle") {
  const auto spec = make_grid(1, 16, 8.0);
  const auto K = twisted_kernel_physical(spec, ScaleTriple::make(0.5, 0.7, 0.9));
  for (const auto& v : K.values) CHECK(v.real() >= 0.0);
  for (std::size_t i : {0ul, 5ul, 77ul, 130ul, 255ul}) {
    const auto x = spec.coordinates(i);
    const double ref = oracle::twisted_kernel_point(x[0], x[1], {0.5, 0.7, 0.9}, 8.0, 4000);
    CHECK(K.values[i].real() == doctest::Approx(ref).epsilon(1e-6));
  }
  // Exchanging (x1, r1) with (x2, r2).
  const auto Ks = twisted_kernel_physical(spec, ScaleTriple::make(0.7, 0.5, 0.9));
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const std::size_t swapped = spec.join(spec.block2_of(i), spec.block1_of(i));
    CHECK(K.values[i].real() == doctest::Approx(Ks.values[swapped].real()).epsilon(1e-9));
  }
  CHECK_THROWS_AS(twisted_kernel_physical(spec, ScaleTriple::make(0.5, 0.5, 9.0)), DomainError);
  CHECK_THROWS_AS(twisted_kernel_physical(make_grid(2, 4, 8.0), ScaleTriple::make(1, 1, 1)), ConfigError);
}

TEST_CASE("physical kernel: unit mass at small scales") {
  const auto spec = make_grid(1, 256, 16.0);
  const auto K = twisted_kernel_physical(spec, ScaleTriple::make(0.1, 0.1, 0.1));
  double mass = 0.0;
  for (const auto& v : K.values) mass += v.real();
  CHECK(std::abs(mass * spec.cell_measure() - 1.0) < 1e-3);
}

TEST_CASE("extend: identity, single modes, semigroup") {
  const auto spec = make_grid(1, 32, 2.0 * std::numbers::pi);
  const auto f = SpatialField::from_real(spec, oracle::random_values(spec.size(), 11));
  CHECK(rel_l2(extend(f, ScaleTriple::identity()).field.values, f.values) < 1e-13);

  const auto mode = complex_mode(spec, 2, -5);
  const auto r = ScaleTriple::make(0.2, 0.1, 0.3);
  const double expected = std::exp(-0.2 * 2 - 0.1 * 5 - 0.3 * 3);
  const auto u = extend(mode, r).field;
  for (std::size_t i = 0; i < spec.size(); i += 37)
    CHECK(std::abs(u.values[i] - expected * mode.values[i]) < 1e-12);

  // Property: U(U(f, r), s) = U(f, r + s) for random radii.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> rad(0.01, 1.0);
  for (int t = 0; t < 10; ++t) {
    const auto a = ScaleTriple::make(rad(rng), rad(rng), rad(rng));
    const auto b = ScaleTriple::make(rad(rng), rad(rng), rad(rng));
    const auto ab = ScaleTriple::make(a.r[0] + b.r[0], a.r[1] + b.r[1], a.r[2] + b.r[2]);
    CHECK(rel_l2(extend(extend(f, a).field, b).field.values, extend(f, ab).field.values) < 1e-12);
  }
}

TEST_CASE("block derivatives: constants, modes, finite differences") {
  const auto spec = make_grid(1, 32, 2.0 * std::numbers::pi);
  const auto c = SpatialField::from_real(spec, std::vector<double>(spec.size(), 3.0));
  const auto r = ScaleTriple::make(0.4, 0.5, 0.6);
  BlockDerivativeSpec all;
  all.blocks = {BlockDerivative::spatial(1), BlockDerivative::scale(), BlockDerivative::spatial(1)};
  for (const auto& v : block_derivative_field(c, r, all).values) CHECK(std::abs(v) < 1e-12);
  const int blocks[] = {1, 2, 3};
  for (const auto& v : mixed_gradient_sq(c, r, blocks).values) CHECK(std::abs(v) < 1e-20);

  // Mode (1, 0): d/dr3 multiplies by -|xi1 + xi2| = -1.
  const auto mode = complex_mode(spec, 1, 0);
  BlockDerivativeSpec d3;
  d3.blocks[2] = BlockDerivative::scale();
  const auto D = block_derivative_field(mode, r, d3);
  const auto U = extend(mode, r).field;
  for (std::size_t i = 0; i < spec.size(); i += 13) CHECK(std::abs(D.values[i] + U.values[i]) < 1e-12);

  // Centered difference in r3 converges at second order.
  const auto f = bump_field(spec, {1.0, 2.0}, 1.5);
  const auto exact = block_derivative_field(f, r, d3);
  double prev = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double h = 0.04 / std::pow(2.0, k);
    const auto up = extend(f, r.with_radius(3, 0.6 + h)).field;
    const auto dn = extend(f, r.with_radius(3, 0.6 - h)).field;
    std::vector<Complex> fd(spec.size());
    for (std::size_t i = 0; i < fd.size(); ++i) fd[i] = (up.values[i] - dn.values[i]) / (2.0 * h);
    const double err = rel_l2(fd, exact.values);
    if (k > 0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.05));
    prev = err;
  }

  BlockDerivativeSpec bad;
  bad.blocks[0] = BlockDerivative::scale();
  CHECK_THROWS_AS(block_derivative_field(f, r.with_boundary(1), bad), PreconditionError);
  bad.boundary_limit = true;
  CHECK_NOTHROW(block_derivative_field(f, r.with_boundary(1), bad));
}

TEST_CASE("multi-harmonicity: constants, convergence, single-mode closed forms") {
  const double L = 2.0 * std::numbers::pi;
  const auto spec = make_grid(1, 64, L);
  const auto r = ScaleTriple::make(0.3, 0.4, 0.5);
  const auto c = SpatialField::from_real(spec, std::vector<double>(spec.size(), 2.0));
  for (int j = 1; j <= 3; ++j) {
    CHECK(harmonicity_residual(c, r, j, 0.01) < 1e-12);
    CHECK(square_identity_residual(c, r, j, 0.01) < 1e-10);
  }
  const auto bump = bump_field(spec, {L / 2, L / 2}, L / 4);
  CHECK(harmonicity_residual(bump, r, 3, 0.02) / harmonicity_residual(bump, r, 3, 0.01) ==
        doctest::Approx(4.0).epsilon(0.125));
  CHECK(square_identity_residual(bump, r, 2, 0.02) / square_identity_residual(bump, r, 2, 0.01) ==
        doctest::Approx(4.0).epsilon(0.125));

  // cos(2 x1 + 1 x2): a1 = 2, a2 = 1, a3 = 3.
  const auto mode = mode_field(spec, {2}, {1});
  const double dr = 0.01;
  const double E = std::exp(-0.3 * 2 - 0.4 * 1 - 0.5 * 3);
  const double a1 = 2.0, a3 = 3.0;
  const double c1 = (2.0 * std::cosh(a1 * dr) - 2.0) / (dr * dr);
  CHECK(std::abs(harmonicity_residual(mode, r, 1, dr) - E * std::abs(c1 - a1 * a1) * L / std::sqrt(2.0)) < 1e-10);
  const double c3 = (2.0 * std::cosh(2.0 * a3 * dr) - 2.0) / (dr * dr);
  const double sq = E * E * std::abs(c3 - 4.0 * a3 * a3) * L * std::sqrt(3.0 / 8.0);
  CHECK(std::abs(square_identity_residual(mode, r, 3, dr) - sq) < 1e-8);

  CHECK_THROWS_AS(harmonicity_residual(bump, r, 1, 0.2), PreconditionError);
  CHECK_THROWS_AS(harmonicity_residual(bump, r.with_boundary(2), 2, 0.01), PreconditionError);
}

TEST_CASE("ladders: counts, extension, validation") {
  const auto l = ScaleLadder::geometric(0.01, 3.0, 4);
  CHECK(l.count == 13);
  CHECK(l.r_max() == doctest::Approx(10.0));
  CHECK(l.log_step() == doctest::Approx(std::log(10.0) / 4));
  const auto g = ScaleGrid::uniform(l).extended_to(64.0);
  CHECK(g.axis(2).r_max() >= 64.0);
  CHECK(g.axis(2).r_max() < 64.0 * l.ratio);
  CHECK_THROWS_AS(ScaleLadder::geometric(0.0, 1.0, 4), ConfigError);
  CHECK_THROWS_AS(ScaleLadder::geometric(1.0, 1.0, 0), ConfigError);
  CHECK_THROWS_AS(ScaleGrid::uniform(l).require_resolved(make_grid(1, 8, 8.0), 1.0), DomainError);
}

TEST_CASE("extension I/O round trip") {
  const auto spec = make_grid(1, 8, 2.0);
  const auto f = SpatialField::from_real(spec, oracle::random_values(spec.size(), 2));
  const auto u = extend(f, ScaleTriple::make(0.1, 0.2, 0.3).with_boundary(2));
  const auto path = (std::filesystem::temp_directory_path() / "tha_ext_test.bin").string();
  save_extension(path, u);
  const auto back = load_extension(path);
  std::filesystem::remove(path);
  CHECK(back.scale.boundary == u.scale.boundary);
  CHECK(back.scale.r == u.scale.r);
  CHECK(rel_l2(back.field.values, u.field.values) == 0.0);
}
