#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fft.hpp"
#include "parallel.hpp"
#include "spectral.hpp"
#include "tha/operators.hpp"

namespace tha {

namespace {

void require_lambdas(std::span<const double> lambdas) {
  if (lambdas.empty()) throw ConfigError("lambda grid must be nonempty");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0)) throw ConfigError("lambda values must be positive");
    if (i > 0 && !(lambdas[i] > lambdas[i - 1])) throw ConfigError("lambda values must be increasing");
  }
}

}  // namespace

GoodLambdaReport good_lambda_rows(std::span<const double> area, std::span<const double> ustar,
                                  const GridSpec& spec, std::span<const double> lambdas) {
  require_lambdas(lambdas);
  if (area.size() != spec.size() || ustar.size() != spec.size())
    throw SpecMismatch("good_lambda_rows: sample count mismatch");
  GoodLambdaReport rep;
  const double cell = spec.cell_measure();
  for (double lam : lambdas) {
    GoodLambdaRow row;
    row.lambda = lam;
    row.lhs = distribution_measure(area, spec, lam);
    row.term1 = distribution_measure(ustar, spec, lam);
    double tail = 0.0;
    for (double u : ustar)
      if (u <= lam) tail += u * u;
    row.term2 = tail * cell / (lam * lam);
    const double denom = row.term1 + row.term2;
    row.c = row.lhs == 0.0 ? 0.0 : denom == 0.0 ? std::numeric_limits<double>::infinity() : row.lhs / denom;
    rep.max_c = std::max(rep.max_c, row.c);
    rep.rows.push_back(row);
  }
  return rep;
}

GoodLambdaReport good_lambda_sweep(const SpatialField& f, const ScaleGrid& scales, double beta,
                                   std::span<const double> lambdas, AreaMethod method) {
  if (!(beta > 1.0)) throw PreconditionError("good_lambda_sweep: beta must exceed 1");
  require_lambdas(lambdas);
  const auto S = area_function(f, ConeSpec::full(scales, 1.0), method);
  const auto U = nontangential_max(f, ConeSpec::full(scales, beta));
  return good_lambda_rows(S.field.real_part(), U.field.real_part(), f.spec, lambdas);
}

double domination_constant(std::span<const double> ustar, std::span<const double> mtube) {
  if (ustar.size() != mtube.size()) throw SpecMismatch("domination_constant: size mismatch");
  double c = 0.0;
  for (std::size_t i = 0; i < ustar.size(); ++i) {
    if (ustar[i] <= 0.0) continue;
    c = std::max(c, mtube[i] > 0.0 ? ustar[i] / mtube[i] : std::numeric_limits<double>::infinity());
  }
  return c;
}

SeparationReport separation_check(const SpatialField& f, double lambda, double beta, const ScaleGrid& scales) {
  if (!(lambda > 0.0)) throw ConfigError("separation_check: lambda must be positive");
  const GridSpec& spec = f.spec;
  const ConeSpec cone = ConeSpec::full(scales, beta);
  const auto ustar = nontangential_max(f, cone).field.real_part();

  std::vector<double> g(spec.size()), h(spec.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = ustar[i] <= lambda ? 1.0 : 0.0;
    h[i] = 1.0 - g[i];
  }
  SeparationReport rep;
  rep.good_measure = distribution_measure(g, spec, 0.5);
  if (rep.good_measure == 0.0) throw PreconditionError("separation_check: the good set {U* <= lambda} is empty");

  const SpatialField hf = SpatialField::from_real(spec, h);
  // The tube maximal function runs over all scales up to the box; the cone sees that far.
  const auto mh = tube_maximal(hf, scales.extended_to(spec.period())).field.real_part();
  const auto uh = nontangential_max(hf, cone).field.real_part();
  rep.c0 = domination_constant(uh, mh);
  std::vector<double> proxy(spec.size());
  for (std::size_t i = 0; i < proxy.size(); ++i)
    proxy[i] = rep.c0 == 0.0 || mh[i] <= 1.0 / (10.0 * rep.c0) ? 1.0 : 0.0;
  rep.proxy_measure = distribution_measure(proxy, spec, 0.5);

  const auto s = detail::block_symbols(spec);
  std::vector<std::complex<double>> ghat(g.begin(), g.end());
  detail::dft_cube_inplace(ghat, spec.n(), spec.dims(), -1);
  std::vector<std::array<double, 3>> triples;
  for (double a : cone.ladder(1))
    for (double b : cone.ladder(2))
      for (double c : cone.ladder(3)) triples.push_back({a, b, c});

  struct Partial {
    std::size_t inner_points = 0, inner_violations = 0, outer_points = 0, outer_violations = 0;
    double inner_min = std::numeric_limits<double>::infinity();
    double c1 = 0.0;
  };
  std::vector<Partial> parts(detail::chunk_count(triples.size()));
  const double inv = 1.0 / static_cast<double>(spec.size());
  detail::parallel_chunks(triples.size(), [&](std::size_t chunk, std::size_t b, std::size_t e) {
    auto& part = parts[chunk];
    std::vector<std::complex<double>> buf(spec.size());
    for (std::size_t t = b; t < e; ++t) {
      const auto& r = triples[t];
      for (std::size_t i = 0; i < buf.size(); ++i)
        buf[i] = ghat[i] * std::exp(-r[0] * s.a1[i] - r[1] * s.a2[i] - r[2] * s.a3[i]);
      detail::dft_cube_inplace(buf, spec.n(), spec.dims(), +1);
      const std::array<double, 3> br{beta * r[0], beta * r[1], beta * r[2]};
      const auto tent = tube_max_filter(proxy, spec, br);
      const auto wide = tube_max_filter(g, spec, br);
      for (std::size_t i = 0; i < buf.size(); ++i) {
        const double ug = buf[i].real() * inv;
        if (tent[i] > 0.5) {
          ++part.inner_points;
          part.inner_min = std::min(part.inner_min, ug);
          if (!(ug > 0.9)) ++part.inner_violations;
        }
        if (wide[i] < 0.5) {
          ++part.outer_points;
          part.c1 = std::max(part.c1, ug);
          if (!(ug < 0.9)) ++part.outer_violations;
        }
      }
    }
  });
  rep.inner_min = std::numeric_limits<double>::infinity();
  for (const auto& p : parts) {
    rep.inner_points += p.inner_points;
    rep.inner_violations += p.inner_violations;
    rep.outer_points += p.outer_points;
    rep.outer_violations += p.outer_violations;
    rep.inner_min = std::min(rep.inner_min, p.inner_min);
    rep.c1 = std::max(rep.c1, p.c1);
  }
  if (rep.inner_points == 0) rep.inner_min = 1.0;
  return rep;
}

double dyadic_ball_sum(int m, double a, double v) {
  if (!(a > 0.0)) throw ConfigError("dyadic_ball_sum: a must be positive");
  // Balls B(0, 2^nu a) contain v from nu0 on: sum 2^-nu / (v_m (2^nu a)^m) over nu >= nu0.
  int nu0 = 0;
  while (std::ldexp(a, nu0) <= std::abs(v)) ++nu0;
  const double q = std::ldexp(1.0, -(m + 1));
  return std::pow(q, nu0) / (1.0 - q) / (unit_ball_volume(m) * std::pow(a, m));
}

DyadicDominationReport dyadic_domination_check(int m, double a, std::size_t samples) {
  if (!(a > 0.0)) throw ConfigError("dyadic_domination_check: a must be positive");
  if (m < 1) throw ConfigError("dyadic_domination_check: m must be >= 1");
  DyadicDominationReport rep;
  auto ratio = [&](double v) {
    std::vector<double> vec(static_cast<std::size_t>(m), 0.0);
    vec[0] = v;
    return poisson_kernel_1d(m, a, vec) / dyadic_ball_sum(m, a, v);
  };
  rep.ratio_at_zero = ratio(0.0);
  rep.c = rep.ratio_at_zero;
  rep.samples = 1;
  const std::size_t count = std::max<std::size_t>(samples, 2);
  for (std::size_t k = 0; k < count; ++k) {
    const double t = -8.0 + 24.0 * static_cast<double>(k) / static_cast<double>(count - 1);
    rep.c = std::max(rep.c, ratio(a * std::exp2(t)));
    ++rep.samples;
  }
  return rep;
}

double lp_operator_norm(MaximalOp op, double p, std::span<const SpatialField> suite, const ConeSpec& cone) {
  if (!(p > 1.0)) throw ConfigError("lp_operator_norm: p must exceed 1");
  double best = 0.0;
  for (const auto& f : suite) {
    const double fn = lp_norm(f, p);
    if (fn == 0.0) continue;
    const auto out = op == MaximalOp::Tube ? tube_maximal(f, cone.scales) : nontangential_max(f, cone);
    best = std::max(best, lp_norm(out.field, p) / fn);
  }
  return best;
}

SpatialField reproduce(const SpatialField& f, const ScaleGrid& scales) {
  const auto s = detail::block_symbols(f.spec);
  FrequencyField F = forward_transform(f);
  std::array<std::vector<double>, 3> r;
  std::array<double, 3> w{};
  for (int j = 1; j <= 3; ++j) {
    r[static_cast<std::size_t>(j - 1)] = scales.axis(j).values();
    w[static_cast<std::size_t>(j - 1)] = scales.axis(j).log_step();
  }
  for (std::size_t i = 0; i < F.coefficients.size(); ++i) {
    double mult = 64.0;
    for (int j = 1; j <= 3; ++j) {
      const double a = s.a(j, i);
      double sum = 0.0;
      for (double rj : r[static_cast<std::size_t>(j - 1)]) {
        const double t = rj * a * std::exp(-rj * a);
        sum += t * t;
      }
      mult *= w[static_cast<std::size_t>(j - 1)] * sum;
    }
    F.coefficients[i] *= mult;
  }
  return inverse_transform(F, f.real);
}

double degenerate_mass(const SpatialField& f) {
  const auto s = detail::block_symbols(f.spec);
  const FrequencyField F = forward_transform(f);
  double total = 0.0, bad = 0.0;
  for (std::size_t i = 0; i < F.coefficients.size(); ++i) {
    const double e = std::norm(F.coefficients[i]);
    total += e;
    if (s.a1[i] == 0.0 || s.a2[i] == 0.0 || s.a3[i] == 0.0) bad += e;
  }
  return total > 0.0 ? std::sqrt(bad / total) : 0.0;
}

double reproducing_residual(const SpatialField& f, const ScaleGrid& scales, bool allow_degenerate) {
  const double fn = lp_norm(f, 2.0);
  if (fn == 0.0) throw PreconditionError("reproducing_residual: zero field");
  if (!allow_degenerate && degenerate_mass(f) > 1e-12)
    throw PreconditionError("reproducing_residual: field has mass on a degenerate frequency set");
  const SpatialField g = reproduce(f, scales);
  std::vector<double> diff(f.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = std::abs(g.values[i] - f.values[i]);
  return lp_norm(diff, f.spec, 2.0) / fn;
}

LlogLReport llogl_rows(std::span<const double> area, const SpatialField& f, std::span<const double> lambdas) {
  require_lambdas(lambdas);
  if (area.size() != f.size()) throw SpecMismatch("llogl_rows: sample count mismatch");
  LlogLReport rep;
  for (double lam : lambdas) {
    LlogLRow row;
    row.lambda = lam;
    row.lhs = distribution_measure(area, f.spec, lam);
    row.rhs = llogl_functional(f, lam);
    row.ratio = row.lhs == 0.0 ? 0.0 : row.rhs == 0.0 ? std::numeric_limits<double>::infinity() : row.lhs / row.rhs;
    rep.max_ratio = std::max(rep.max_ratio, row.ratio);
    rep.rows.push_back(row);
  }
  return rep;
}

LlogLReport llogl_endpoint_sweep(const SpatialField& f, const ScaleGrid& scales, std::span<const double> lambdas,
                                 AreaMethod method) {
  const auto S = area_function(f, ConeSpec::full(scales, 1.0), method);
  return llogl_rows(S.field.real_part(), f, lambdas);
}

}  // namespace tha
