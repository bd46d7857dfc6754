#include "tha/kernels.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "spectral.hpp"

namespace tha {

namespace {

void check_block(int block) {
  if (block < 1 || block > 3) throw ConfigError("block index must be 1, 2 or 3");
}

}  // namespace

ScaleTriple ScaleTriple::make(double r1, double r2, double r3) {
  for (double v : {r1, r2, r3})
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("scale radii must be positive");
  return ScaleTriple{{r1, r2, r3}, {false, false, false}};
}

ScaleTriple ScaleTriple::identity() { return ScaleTriple{{0.0, 0.0, 0.0}, {true, true, true}}; }

ScaleTriple ScaleTriple::with_boundary(int block) const {
  check_block(block);
  ScaleTriple out = *this;
  out.boundary[static_cast<std::size_t>(block - 1)] = true;
  out.r[static_cast<std::size_t>(block - 1)] = 0.0;
  return out;
}

ScaleTriple ScaleTriple::with_radius(int block, double value) const {
  check_block(block);
  if (!(value > 0.0)) throw ConfigError("scale radii must be positive");
  ScaleTriple out = *this;
  out.boundary[static_cast<std::size_t>(block - 1)] = false;
  out.r[static_cast<std::size_t>(block - 1)] = value;
  return out;
}

double ScaleTriple::radius(int block) const {
  check_block(block);
  return is_boundary(block) ? 0.0 : r[static_cast<std::size_t>(block - 1)];
}

ScaleLadder ScaleLadder::geometric(double r_min, double decades, int points_per_decade) {
  if (!(r_min > 0.0)) throw ConfigError("ladder: r_min must be positive");
  if (!(decades >= 0.0)) throw ConfigError("ladder: decades must be non-negative");
  if (points_per_decade < 1) throw ConfigError("ladder: points per decade must be >= 1");
  ScaleLadder l;
  l.r_min = r_min;
  l.ratio = std::pow(10.0, 1.0 / points_per_decade);
  l.count = static_cast<int>(std::lround(decades * points_per_decade)) + 1;
  return l;
}

std::vector<double> ScaleLadder::values() const {
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) v[static_cast<std::size_t>(k)] = r_min * std::pow(ratio, k);
  return v;
}

double ScaleLadder::log_step() const { return std::log(ratio); }
double ScaleLadder::r_max() const { return r_min * std::pow(ratio, count - 1); }

ScaleGrid ScaleGrid::uniform(const ScaleLadder& ladder) { return ScaleGrid{{ladder, ladder, ladder}}; }

ScaleGrid ScaleGrid::geometric(double r_min, double decades, int points_per_decade) {
  return uniform(ScaleLadder::geometric(r_min, decades, points_per_decade));
}

ScaleGrid ScaleGrid::extended_to(double r_top) const {
  ScaleGrid g = *this;
  for (auto& a : g.axes)
    while (a.r_max() < r_top) ++a.count;
  return g;
}

void ScaleGrid::require_resolved(const GridSpec& spec, double factor) const {
  for (const auto& a : axes)
    if (a.r_min < factor * spec.spacing())
      throw DomainError("scale ladder starts below " + std::to_string(factor) +
                        " grid spacings; refine the grid or raise r_min");
}

double poisson_constant(int m) {
  if (m < 1) throw ConfigError("poisson_constant: m must be >= 1");
  const double s = 0.5 * (m + 1);
  return std::tgamma(s) / std::pow(std::numbers::pi, s);
}

double poisson_kernel_1d(int m, double a, std::span<const double> v) {
  if (!(a > 0.0)) throw PreconditionError("poisson kernel: scale must be positive");
  if (static_cast<int>(v.size()) != m) throw ConfigError("poisson kernel: |v| must have m components");
  double v2 = 0.0;
  for (double c : v) v2 += c * c;
  return poisson_constant(m) * a / std::pow(a * a + v2, 0.5 * (m + 1));
}

double periodized_poisson_1d(double a, double x, double period) {
  const double t = 2.0 * std::numbers::pi * a / period;
  const double theta = 2.0 * std::numbers::pi * x / period;
  const double sh = std::sinh(0.5 * t);
  const double sn = std::sin(0.5 * theta);
  // cosh t - cos theta, written without cancellation
  const double denom = 2.0 * (sh * sh + sn * sn);
  return std::sinh(t) / (period * denom);
}

SpatialField twisted_kernel_physical(const GridSpec& spec, const ScaleTriple& r) {
  if (spec.m() != 1) throw ConfigError("twisted_kernel_physical: only m = 1 is supported");
  for (int j = 1; j <= 3; ++j) {
    if (r.is_boundary(j)) throw PreconditionError("twisted_kernel_physical: boundary blocks have no kernel");
    if (r.radius(j) > spec.period()) throw DomainError("twisted_kernel_physical: scale exceeds the box");
  }
  const double L = spec.period();
  const double h = spec.spacing();
  const int n = spec.n();
  const double r1 = r.radius(1), r2 = r.radius(2), r3 = r.radius(3);
  using boost::math::quadrature::gauss_kronrod;

  std::vector<double> values(spec.size());
  for (int i1 = 0; i1 < n; ++i1) {
    const double x1 = i1 * h;
    for (int i2 = 0; i2 < n; ++i2) {
      const double x2 = i2 * h;
      auto integrand = [&](double u) {
        return periodized_poisson_1d(r1, x1 - u, L) * periodized_poisson_1d(r2, x2 - u, L) *
               periodized_poisson_1d(r3, u, L);
      };
      // Split one period at the three peaks u = 0, x1, x2.
      std::array<double, 4> cuts{0.0, x1, x2, L};
      std::sort(cuts.begin(), cuts.end());
      double total = 0.0;
      for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        if (cuts[k + 1] - cuts[k] <= 0.0) continue;
        total += gauss_kronrod<double, 31>::integrate(integrand, cuts[k], cuts[k + 1], 20, 1e-12);
      }
      values[static_cast<std::size_t>(i1) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i2)] = total;
    }
  }
  SpatialField K = SpatialField::from_real(spec, values);
  double mass = 0.0;
  for (double v : values) mass += v;
  mass *= spec.cell_measure();
  if (std::abs(mass - 1.0) > 1e-2)
    throw DomainError("twisted_kernel_physical: discrete mass " + std::to_string(mass) +
                      " deviates from 1 by more than 1%; scales are not resolved on this grid");
  return K;
}

double twisted_multiplier(std::span<const double> xi1, std::span<const double> xi2,
                          const ScaleTriple& r) {
  if (xi1.size() != xi2.size()) throw ConfigError("twisted_multiplier: block dimensions differ");
  double n1 = 0, n2 = 0, n3 = 0;
  for (std::size_t k = 0; k < xi1.size(); ++k) {
    n1 += xi1[k] * xi1[k];
    n2 += xi2[k] * xi2[k];
    n3 += (xi1[k] + xi2[k]) * (xi1[k] + xi2[k]);
  }
  return std::exp(-r.radius(1) * std::sqrt(n1) - r.radius(2) * std::sqrt(n2) -
                  r.radius(3) * std::sqrt(n3));
}

std::vector<double> twisted_multiplier_field(const GridSpec& spec, const ScaleTriple& r) {
  const auto s = detail::block_symbols(spec);
  const double r1 = r.radius(1), r2 = r.radius(2), r3 = r.radius(3);
  std::vector<double> out(spec.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::exp(-r1 * s.a1[i] - r2 * s.a2[i] - r3 * s.a3[i]);
  return out;
}

ExtensionField extend(const SpatialField& f, const ScaleTriple& r) {
  FrequencyField F = forward_transform(f);
  const auto mult = twisted_multiplier_field(f.spec, r);
  for (std::size_t i = 0; i < mult.size(); ++i) F.coefficients[i] *= mult[i];
  return ExtensionField{r, inverse_transform(F, f.real)};
}

namespace {

void validate_derivative(const GridSpec& spec, const ScaleTriple& r, const BlockDerivativeSpec& d) {
  for (int j = 1; j <= 3; ++j) {
    const auto& b = d.blocks[static_cast<std::size_t>(j - 1)];
    if (b.action == BlockAction::Spatial && (b.component < 1 || b.component > spec.m()))
      throw ConfigError("block derivative: spatial component out of range");
    if (b.action == BlockAction::Scale && r.is_boundary(j) && !d.boundary_limit)
      throw PreconditionError("block derivative: d/dr on a boundary block requires boundary_limit");
  }
}

// Multiplier of the derivative combination `d` composed with the extension at r.
Complex derivative_symbol(const detail::BlockSymbols& s, std::size_t i, const ScaleTriple& r,
                          const BlockDerivativeSpec& d) {
  Complex sym = std::exp(-r.radius(1) * s.a1[i] - r.radius(2) * s.a2[i] - r.radius(3) * s.a3[i]);
  for (int j = 1; j <= 3; ++j) {
    const auto& b = d.blocks[static_cast<std::size_t>(j - 1)];
    if (b.action == BlockAction::Spatial)
      sym *= Complex(0.0, s.q(j, i, b.component - 1));
    else if (b.action == BlockAction::Scale)
      sym *= -s.a(j, i);
  }
  return sym;
}

SpatialField apply_derivative(const FrequencyField& F, const detail::BlockSymbols& s,
                              const ScaleTriple& r, const BlockDerivativeSpec& d, bool real) {
  FrequencyField G{F.spec, F.coefficients};
  for (std::size_t i = 0; i < G.coefficients.size(); ++i)
    G.coefficients[i] *= derivative_symbol(s, i, r, d);
  return inverse_transform(G, real);
}

std::vector<double> laplacian_symbol(const detail::BlockSymbols& s, int block) {
  std::vector<double> out(s.size);
  for (std::size_t i = 0; i < s.size; ++i) out[i] = -s.a(block, i) * s.a(block, i);
  return out;
}

std::vector<double> apply_real_multiplier(const GridSpec& spec, std::span<const double> values,
                                          std::span<const double> symbol) {
  FrequencyField F = forward_transform(SpatialField::from_real(spec, values));
  for (std::size_t i = 0; i < symbol.size(); ++i) F.coefficients[i] *= symbol[i];
  return inverse_transform(F, true).real_part();
}

void check_residual_args(const SpatialField& f, const ScaleTriple& r, int block, double dr) {
  check_block(block);
  if (r.is_boundary(block)) throw PreconditionError("residual: block must have a positive radius");
  if (!(dr > 0.0) || !(dr < r.radius(block) / 4.0))
    throw PreconditionError("residual: step must satisfy 0 < dr < r_j/4");
  if (!f.real) throw PreconditionError("residual: field must be real");
}

}  // namespace

SpatialField block_derivative_field(const SpatialField& f, const ScaleTriple& r,
                                    const BlockDerivativeSpec& d) {
  validate_derivative(f.spec, r, d);
  const auto s = detail::block_symbols(f.spec);
  return apply_derivative(forward_transform(f), s, r, d, f.real);
}

SpatialField mixed_gradient_sq(const SpatialField& f, const ScaleTriple& r,
                               std::span<const int> blocks) {
  if (blocks.empty()) throw ConfigError("mixed_gradient_sq: block set must be nonempty");
  std::array<bool, 3> listed{false, false, false};
  for (int b : blocks) {
    check_block(b);
    listed[static_cast<std::size_t>(b - 1)] = true;
  }
  const int m = f.spec.m();
  const auto s = detail::block_symbols(f.spec);
  const FrequencyField F = forward_transform(f);

  // Each listed block contributes m spatial components plus the scale derivative.
  std::vector<int> active;
  for (int j = 1; j <= 3; ++j)
    if (listed[static_cast<std::size_t>(j - 1)]) active.push_back(j);
  const int per_block = m + 1;
  int combos = 1;
  for (std::size_t k = 0; k < active.size(); ++k) combos *= per_block;

  std::vector<double> acc(f.spec.size(), 0.0);
  for (int c = 0; c < combos; ++c) {
    BlockDerivativeSpec d;
    d.boundary_limit = true;
    int code = c;
    for (int j : active) {
      const int choice = code % per_block;
      code /= per_block;
      d.blocks[static_cast<std::size_t>(j - 1)] =
          choice < m ? BlockDerivative::spatial(choice + 1) : BlockDerivative::scale();
    }
    const SpatialField D = apply_derivative(F, s, r, d, f.real);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += std::norm(D.values[i]);
  }
  return SpatialField::from_real(f.spec, acc);
}

double harmonicity_residual(const SpatialField& f, const ScaleTriple& r, int block, double dr) {
  check_residual_args(f, r, block, dr);
  const double rj = r.radius(block);
  const auto u0 = extend(f, r).field.real_part();
  const auto up = extend(f, r.with_radius(block, rj + dr)).field.real_part();
  const auto um = extend(f, r.with_radius(block, rj - dr)).field.real_part();
  const auto s = detail::block_symbols(f.spec);
  const auto lap = apply_real_multiplier(f.spec, u0, laplacian_symbol(s, block));
  std::vector<double> res(u0.size());
  for (std::size_t i = 0; i < res.size(); ++i)
    res[i] = lap[i] + (up[i] - 2.0 * u0[i] + um[i]) / (dr * dr);
  return lp_norm(res, f.spec, 2.0);
}

double square_identity_residual(const SpatialField& f, const ScaleTriple& r, int block, double dr) {
  check_residual_args(f, r, block, dr);
  const double rj = r.radius(block);
  auto squared = [](std::vector<double> v) {
    for (double& x : v) x *= x;
    return v;
  };
  const auto w0 = squared(extend(f, r).field.real_part());
  const auto wp = squared(extend(f, r.with_radius(block, rj + dr)).field.real_part());
  const auto wm = squared(extend(f, r.with_radius(block, rj - dr)).field.real_part());
  const auto s = detail::block_symbols(f.spec);
  const auto lap = apply_real_multiplier(f.spec, w0, laplacian_symbol(s, block));
  const int blocks[] = {block};
  const auto grad = mixed_gradient_sq(f, r, blocks).real_part();
  std::vector<double> res(w0.size());
  for (std::size_t i = 0; i < res.size(); ++i)
    res[i] = lap[i] + (wp[i] - 2.0 * w0[i] + wm[i]) / (dr * dr) - 2.0 * grad[i];
  return lp_norm(res, f.spec, 2.0);
}

void save_extension(const std::string& path, const ExtensionField& u) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  write_field_header(out, u.field.spec, u.field.real);
  for (double v : u.scale.r) out.write(reinterpret_cast<const char*>(&v), sizeof v);
  for (bool b : u.scale.boundary) {
    const std::uint8_t flag = b ? 1 : 0;
    out.write(reinterpret_cast<const char*>(&flag), 1);
  }
  write_field_samples(out, u.field);
}

ExtensionField load_extension(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  bool is_real = true;
  GridSpec spec = read_field_header(in, is_real);
  ScaleTriple scale;
  for (double& v : scale.r) in.read(reinterpret_cast<char*>(&v), sizeof v);
  for (auto&& b : scale.boundary) {
    std::uint8_t flag = 0;
    in.read(reinterpret_cast<char*>(&flag), 1);
    if (flag > 1) throw ConfigError("extension file: bad boundary flag");
    b = flag == 1;
  }
  if (!in) throw ConfigError("extension file: truncated scale header");
  return ExtensionField{scale, SpatialField(spec, read_field_samples(in, spec, is_real), is_real)};
}

}  // namespace tha
