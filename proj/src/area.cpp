#include <algorithm>
#include <cmath>
#include <numbers>

#include "fft.hpp"
#include "parallel.hpp"
#include "spectral.hpp"
#include "stencil.hpp"
#include "tha/operators.hpp"

namespace tha {

namespace {

using cvec = std::vector<std::complex<double>>;

struct Ladders {
  std::array<std::vector<double>, 3> r;
  double weight = 1.0;  // product of log steps over the active blocks
};

Ladders cone_ladders(const ConeSpec& cone) {
  Ladders l;
  for (int j = 1; j <= 3; ++j) {
    l.r[static_cast<std::size_t>(j - 1)] = cone.ladder(j);
    if (cone.active[static_cast<std::size_t>(j - 1)]) l.weight *= cone.scales.axis(j).log_step();
  }
  return l;
}

std::vector<std::string> coarseness_warnings(const ConeSpec& cone) {
  std::vector<std::string> out;
  for (int j : cone.active_blocks()) {
    const auto& ax = cone.scales.axis(j);
    const double ppd = ax.count > 1 ? std::log(10.0) / std::log(ax.ratio) : 0.0;
    if (ppd < 4.0 - 1e-9)
      out.push_back("block " + std::to_string(j) + " ladder has fewer than 4 points per decade");
  }
  return out;
}

// S^2 on the grid, accumulated per ladder triple in the frequency domain.
std::vector<double> area_direct(const SpatialField& f, const ConeSpec& cone) {
  const GridSpec& spec = f.spec;
  const int m = spec.m();
  const auto s = detail::block_symbols(spec);
  const Ladders lad = cone_ladders(cone);
  const auto blocks = cone.active_blocks();
  cvec fhat(f.values);
  detail::dft_cube_inplace(fhat, spec.n(), spec.dims(), -1);

  std::vector<std::array<double, 3>> triples;
  for (double a : lad.r[0])
    for (double b : lad.r[1])
      for (double c : lad.r[2]) triples.push_back({a, b, c});

  const int per_block = m + 1;
  int combos = 1;
  for (std::size_t k = 0; k < blocks.size(); ++k) combos *= per_block;
  const std::size_t N = spec.size();
  const double inv = 1.0 / static_cast<double>(N);

  std::vector<cvec> partial(detail::chunk_count(triples.size()), cvec(N));
  detail::parallel_chunks(triples.size(), [&](std::size_t chunk, std::size_t b, std::size_t e) {
    cvec buf(N);
    std::vector<double> G(N);
    for (std::size_t t = b; t < e; ++t) {
      const auto& r = triples[t];
      std::fill(G.begin(), G.end(), 0.0);
      for (int c = 0; c < combos; ++c) {
        int code = c;
        std::array<int, 3> choice{-1, -1, -1};  // -1 none, 0..m-1 spatial component, m scale
        for (int j : blocks) {
          choice[static_cast<std::size_t>(j - 1)] = code % per_block;
          code /= per_block;
        }
        for (std::size_t i = 0; i < N; ++i) {
          std::complex<double> sym = std::exp(-r[0] * s.a1[i] - r[1] * s.a2[i] - r[2] * s.a3[i]);
          for (int j : blocks) {
            const int ch = choice[static_cast<std::size_t>(j - 1)];
            sym *= ch < m ? std::complex<double>(0.0, s.q(j, i, ch)) : std::complex<double>(-s.a(j, i), 0.0);
          }
          buf[i] = fhat[i] * sym;
        }
        detail::dft_cube_inplace(buf, spec.n(), spec.dims(), +1);
        for (std::size_t i = 0; i < N; ++i) G[i] += std::norm(buf[i] * inv);
      }
      double rp = 1.0;
      for (int j : blocks) rp *= r[static_cast<std::size_t>(j - 1)];
      const double scale = lad.weight * rp * rp;
      for (std::size_t i = 0; i < N; ++i) buf[i] = G[i] * scale;
      detail::dft_cube_inplace(buf, spec.n(), spec.dims(), -1);
      const auto kappa = tube_average_multiplier(spec, {cone.beta * r[0], cone.beta * r[1], cone.beta * r[2]});
      auto& acc = partial[chunk];
      for (std::size_t i = 0; i < N; ++i) acc[i] += buf[i] * kappa[i];
    }
  });
  cvec total(N);
  for (const auto& p : partial)
    for (std::size_t i = 0; i < N; ++i) total[i] += p[i];
  detail::dft_cube_inplace(total, spec.n(), spec.dims(), +1);
  std::vector<double> out(N);
  for (std::size_t i = 0; i < N; ++i) out[i] = total[i].real() * inv;
  return out;
}

// Nonzero Fourier-series coefficients f(x) = sum c_xi e^{i xi x}.
struct Modes {
  std::vector<std::size_t> index;
  std::vector<std::complex<double>> coeff;
};

Modes nonzero_modes(const SpatialField& f) {
  cvec c(f.values);
  detail::dft_cube_inplace(c, f.spec.n(), f.spec.dims(), -1);
  double mx = 0.0;
  for (auto z : c) mx = std::max(mx, std::abs(z));
  Modes out;
  const double inv = 1.0 / static_cast<double>(f.spec.size());
  for (std::size_t i = 0; i < c.size(); ++i)
    if (mx > 0.0 && std::abs(c[i]) > 1e-13 * mx) {
      out.index.push_back(i);
      out.coeff.push_back(c[i] * inv);
    }
  return out;
}

// Flat index of xi - eta on the frequency lattice.
std::size_t difference_index(const GridSpec& spec, std::size_t xi, std::size_t eta) {
  const int d = spec.dims();
  const auto n = static_cast<std::size_t>(spec.n());
  std::size_t out = 0, stride = 1;
  for (int k = 0; k < d; ++k) {
    const std::size_t a = xi % n, b = eta % n;
    out += ((a + n - b) % n) * stride;
    stride *= n;
    xi /= n;
    eta /= n;
  }
  return out;
}

std::vector<double> area_bilinear(const SpatialField& f, const ConeSpec& cone, const Modes& modes) {
  const GridSpec& spec = f.spec;
  const int m = spec.m();
  const auto s = detail::block_symbols(spec);
  const auto sum_index = detail::sum_block_index(spec);
  const Ladders lad = cone_ladders(cone);
  const auto& R1 = lad.r[0];
  const auto& R2 = lad.r[1];
  const auto& R3 = lad.r[2];
  const std::size_t K1 = R1.size(), K2 = R2.size(), K3 = R3.size();
  const std::array<bool, 3> act = cone.active;

  // Ball multipliers of the dilated radii, per block ladder.
  auto balls = [&](const std::vector<double>& R) {
    std::vector<std::vector<double>> out;
    for (double r : R) out.push_back(detail::ball_multiplier(spec, cone.beta * r));
    return out;
  };
  const auto P1 = balls(R1), P2 = balls(R2), P3 = balls(R3);

  // Regime boundaries on ladder 3: count of r3 <= t.
  auto upto = [&](double t) {
    return static_cast<std::size_t>(std::upper_bound(R3.begin(), R3.end(), t) - R3.begin());
  };
  std::vector<std::size_t> ub_min(K1 * K2), ub_r1(K1), ub_r2(K2);
  for (std::size_t i = 0; i < K1; ++i) ub_r1[i] = upto(R1[i]);
  for (std::size_t k = 0; k < K2; ++k) ub_r2[k] = upto(R2[k]);
  for (std::size_t i = 0; i < K1; ++i)
    for (std::size_t k = 0; k < K2; ++k) ub_min[i * K2 + k] = upto(std::min(R1[i], R2[k]));

  const std::size_t M = modes.index.size();
  std::vector<double> T(M * M);
  detail::parallel_chunks(M * M, [&](std::size_t, std::size_t b, std::size_t e) {
    std::vector<double> g1(K1), g2(K2), g3(K3), pre3(K3 + 1), suf3(K3 + 1);
    for (std::size_t pq = b; pq < e; ++pq) {
      const std::size_t xi = modes.index[pq / M], eta = modes.index[pq % M];
      const std::size_t zeta = difference_index(spec, xi, eta);
      const std::size_t z1 = spec.block1_of(zeta), z2 = spec.block2_of(zeta), z3 = sum_index[zeta];
      auto profile = [&](int j, const std::vector<double>& R, std::vector<double>& g) {
        if (!act[static_cast<std::size_t>(j - 1)]) {
          g.assign(1, 1.0);
          return;
        }
        double qq = 0.0;
        for (int c = 0; c < m; ++c) qq += s.q(j, xi, c) * s.q(j, eta, c);
        const double coupling = qq + s.a(j, xi) * s.a(j, eta);
        const double decay = s.a(j, xi) + s.a(j, eta);
        for (std::size_t i = 0; i < R.size(); ++i) g[i] = R[i] * R[i] * coupling * std::exp(-R[i] * decay);
      };
      profile(1, R1, g1);
      profile(2, R2, g2);
      profile(3, R3, g3);
      pre3[0] = 0.0;
      for (std::size_t i = 0; i < K3; ++i) pre3[i + 1] = pre3[i] + g3[i];
      suf3[K3] = 0.0;
      for (std::size_t i = K3; i-- > 0;) suf3[i] = suf3[i + 1] + g3[i] * P3[i][z3];
      double total = 0.0;
      for (std::size_t i = 0; i < K1; ++i) {
        if (g1[i] == 0.0) continue;
        const double p1 = P1[i][z1];
        for (std::size_t k = 0; k < K2; ++k) {
          const double p2 = P2[k][z2];
          // Rect for r3 <= min(r1, r2); above it ParaFirst when r1 >= r2, else ParaSecond.
          double v = p1 * p2 * pre3[ub_min[i * K2 + k]];
          if (R1[i] >= R2[k])
            v += p1 * suf3[ub_r2[k]];
          else
            v += p2 * suf3[ub_r1[i]];
          total += g1[i] * g2[k] * v;
        }
      }
      T[pq] = total * lad.weight;
    }
  });

  cvec Z(spec.size());
  for (std::size_t p = 0; p < M; ++p)
    for (std::size_t q = 0; q < M; ++q)
      Z[difference_index(spec, modes.index[p], modes.index[q])] +=
          modes.coeff[p] * std::conj(modes.coeff[q]) * T[p * M + q];
  detail::dft_cube_inplace(Z, spec.n(), spec.dims(), +1);
  std::vector<double> out(spec.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = Z[i].real();
  return out;
}

OperatorOutput area_impl(const SpatialField& f, const ConeSpec& cone, AreaMethod method, const char* name) {
  cone.validate();
  const GridSpec& spec = f.spec;
  std::vector<double> s2;
  const Modes modes = method == AreaMethod::Direct ? Modes{} : nonzero_modes(f);
  if (method == AreaMethod::Auto) {
    const Ladders lad = cone_ladders(cone);
    const double K1 = static_cast<double>(lad.r[0].size()), K2 = static_cast<double>(lad.r[1].size()),
                 K3 = static_cast<double>(lad.r[2].size());
    const double N = static_cast<double>(spec.size());
    const double combos = std::pow(spec.m() + 1.0, static_cast<double>(cone.active_blocks().size()));
    const double direct = K1 * K2 * K3 * (combos + 1.0) * N * (std::log2(N) + 4.0);
    const double M = static_cast<double>(modes.index.size());
    const double bilinear = M * M * (K1 * K2 + 4.0 * (K1 + K2 + K3)) + N * std::log2(N);
    method = bilinear < direct && M * M < 5e7 ? AreaMethod::Bilinear : AreaMethod::Direct;
  }
  if (method == AreaMethod::Bilinear)
    s2 = area_bilinear(f, cone, modes);
  else
    s2 = area_direct(f, cone);
  for (double& v : s2) v = std::sqrt(std::max(0.0, v));
  return OperatorOutput{name, cone, SpatialField::from_real(spec, s2), coarseness_warnings(cone)};
}

}  // namespace

OperatorOutput area_function(const SpatialField& f, const ConeSpec& cone, AreaMethod method) {
  if (!cone.is_full()) throw ConfigError("area_function: all three blocks must be active (use partial_area)");
  return area_impl(f, cone, method, "area_function");
}

OperatorOutput partial_area(const SpatialField& f, const ConeSpec& cone, AreaMethod method) {
  if (cone.is_full()) throw ConfigError("partial_area: the full block set belongs to area_function");
  std::string name = "partial_area:";
  for (int j : cone.active_blocks()) name += std::to_string(j);
  const auto out = area_impl(f, cone, method, "");
  return OperatorOutput{name, out.cone, out.field, out.warnings};
}

}  // namespace tha
