#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "fft.hpp"
#include "parallel.hpp"
#include "spectral.hpp"
#include "stencil.hpp"
#include "tha/operators.hpp"

namespace tha {

ConeSpec ConeSpec::full(const ScaleGrid& scales, double beta) {
  ConeSpec c;
  c.beta = beta;
  c.scales = scales;
  c.validate();
  return c;
}

ConeSpec ConeSpec::partial(const ScaleGrid& scales, std::span<const int> blocks, double beta) {
  ConeSpec c;
  c.beta = beta;
  c.scales = scales;
  c.active = {false, false, false};
  for (int b : blocks) {
    if (b < 1 || b > 3) throw ConfigError("cone: block index must be 1, 2 or 3");
    c.active[static_cast<std::size_t>(b - 1)] = true;
  }
  c.validate();
  return c;
}

std::vector<int> ConeSpec::active_blocks() const {
  std::vector<int> out;
  for (int j = 1; j <= 3; ++j)
    if (active[static_cast<std::size_t>(j - 1)]) out.push_back(j);
  return out;
}

void ConeSpec::validate() const {
  if (!(beta >= 1.0)) throw ConfigError("cone: aperture beta must be >= 1");
  if (active_blocks().empty()) throw ConfigError("cone: at least one block must be active");
  for (int j : active_blocks()) {
    const auto& ax = scales.axis(j);
    if (ax.count < 1 || !(ax.r_min > 0.0) || !(ax.ratio > 1.0 || ax.count == 1))
      throw ConfigError("cone: invalid scale ladder");
  }
}

std::vector<double> ConeSpec::ladder(int block) const {
  if (!active[static_cast<std::size_t>(block - 1)]) return {0.0};
  return scales.axis(block).values();
}

namespace {

std::vector<std::array<double, 3>> ladder_triples(const std::array<std::vector<double>, 3>& l) {
  std::vector<std::array<double, 3>> out;
  out.reserve(l[0].size() * l[1].size() * l[2].size());
  for (double a : l[0])
    for (double b : l[1])
      for (double c : l[2]) out.push_back({a, b, c});
  return out;
}

std::array<double, 3> scaled(const std::array<double, 3>& r, double beta) {
  return {beta * r[0], beta * r[1], beta * r[2]};
}

// Pointwise max over chunks, merged in a fixed order.
std::vector<double> chunked_max(std::size_t items, std::size_t size,
                                const std::function<void(std::size_t, std::vector<double>&)>& one) {
  std::vector<std::vector<double>> partial(detail::chunk_count(items), std::vector<double>(size, 0.0));
  detail::parallel_chunks(items, [&](std::size_t c, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) one(i, partial[c]);
  });
  std::vector<double> out(size, 0.0);
  for (const auto& p : partial)
    for (std::size_t i = 0; i < size; ++i) out[i] = std::max(out[i], p[i]);
  return out;
}

std::vector<std::complex<double>> raw_spectrum(std::span<const double> v, const GridSpec& spec) {
  std::vector<std::complex<double>> buf(v.begin(), v.end());
  detail::dft_cube_inplace(buf, spec.n(), spec.dims(), -1);
  return buf;
}

}  // namespace

OperatorOutput tube_maximal(const SpatialField& f, const ScaleGrid& scales, std::optional<Regime> only) {
  const GridSpec& spec = f.spec;
  const ConeSpec cone = ConeSpec::full(scales, 1.0);
  const double h = spec.spacing();
  // Distinct rasterized tubes only: the average depends on r through the regime and the two
  // rasterized balls.
  std::map<std::tuple<int, long, long>, std::array<double, 3>> tubes;
  for (const auto& r : ladder_triples({cone.ladder(1), cone.ladder(2), cone.ladder(3)})) {
    const Regime g = classify_regime(r);
    if (only && g != *only) continue;
    const auto pair = defining_pair(r);
    tubes.emplace(std::tuple{static_cast<int>(g), detail::ball_key(h, pair[0]), detail::ball_key(h, pair[1])}, r);
  }
  if (tubes.empty()) throw ConfigError("tube_maximal: no ladder triple in the requested regime");
  std::vector<std::array<double, 3>> list;
  for (const auto& [key, r] : tubes) list.push_back(r);

  const auto spectrum = raw_spectrum(f.magnitude(), spec);
  const double inv = 1.0 / static_cast<double>(spec.size());
  auto best = chunked_max(list.size(), spec.size(), [&](std::size_t i, std::vector<double>& acc) {
    const auto mult = tube_average_multiplier(spec, list[i]);
    std::vector<std::complex<double>> buf(spectrum);
    for (std::size_t k = 0; k < buf.size(); ++k) buf[k] *= mult[k];
    detail::dft_cube_inplace(buf, spec.n(), spec.dims(), +1);
    for (std::size_t k = 0; k < buf.size(); ++k) acc[k] = std::max(acc[k], buf[k].real() * inv);
  });
  OperatorOutput out{only ? std::string("tube_maximal:") + regime_name(*only) : "tube_maximal", cone,
                     SpatialField::from_real(spec, best), {}};
  return out;
}

OperatorOutput nontangential_max(const SpatialField& f, const ConeSpec& cone) {
  cone.validate();
  const GridSpec& spec = f.spec;
  const auto s = detail::block_symbols(spec);
  std::vector<std::complex<double>> spectrum(f.values);
  detail::dft_cube_inplace(spectrum, spec.n(), spec.dims(), -1);
  const auto triples = ladder_triples({cone.ladder(1), cone.ladder(2), cone.ladder(3)});
  const double inv = 1.0 / static_cast<double>(spec.size());
  auto best = chunked_max(triples.size(), spec.size(), [&](std::size_t i, std::vector<double>& acc) {
    const auto& r = triples[i];
    std::vector<std::complex<double>> buf(spectrum);
    for (std::size_t k = 0; k < buf.size(); ++k) buf[k] *= std::exp(-r[0] * s.a1[k] - r[1] * s.a2[k] - r[2] * s.a3[k]);
    detail::dft_cube_inplace(buf, spec.n(), spec.dims(), +1);
    std::vector<double> mag(buf.size());
    for (std::size_t k = 0; k < buf.size(); ++k) mag[k] = std::abs(buf[k]) * inv;
    const auto dil = tube_max_filter(mag, spec, scaled(r, cone.beta));
    for (std::size_t k = 0; k < dil.size(); ++k) acc[k] = std::max(acc[k], dil[k]);
  });
  return OperatorOutput{"nontangential_max", cone, SpatialField::from_real(spec, best), {}};
}

OpenSetMask tube_halo(const OpenSetMask& omega, const ScaleGrid& scales) {
  const auto ind = omega.indicator();
  const auto m = tube_maximal(SpatialField::from_real(omega.spec, ind), scales);
  // Tube averages of an indicator are k/N; anything above 1/2 clears it by at least 1/(2N),
  // far more than the transform round-off.
  return OpenSetMask::from_predicate(omega.spec, m.field.real_part(), 0.5 + 1e-9);
}

}  // namespace tha
