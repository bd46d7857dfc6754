#include "tha/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "tha/errors.hpp"
#include "tha/geometry.hpp"
#include "tha/grid.hpp"
#include "tha/kernels.hpp"
#include "tha/operators.hpp"
#include "tha/suite.hpp"

namespace tha {

namespace {

// Largest grid a scenario will allocate (points of the 2m-dimensional torus).
constexpr std::size_t kMaxPoints = std::size_t{1} << 20;

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s + ",") {
    if (c == ',') {
      const auto b = cur.find_first_not_of(" \t");
      const auto e = cur.find_last_not_of(" \t");
      if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
      cur.clear();
    } else {
      cur += c;
    }
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
  }
}

long to_long(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: '" + key + "' expects true/false, got '" + v + "'");
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split_list(v)) out.push_back(to_double(key, s));
  return out;
}

// Scenario-specific [params] keys with their defaults.
const std::map<std::string, std::map<std::string, std::string>>& param_defaults() {
  static const std::map<std::string, std::map<std::string, std::string>> d{
      {"verify-kernel", {{"r", "0.5,0.5,0.5"}, {"tolerance", "1e-3"}}},
      {"verify-identities", {{"r", "0.3,0.4,0.5"}, {"dr", "0.02"}, {"bump_width", "0"}}},
      {"verify-geometry",
       {{"tubes", "50"}, {"samples", "2000"}, {"volume_tubes", "20"}, {"volume_samples", "1000000"},
        {"tilings", "15"}}},
      {"maximal-suite", {{"refine", "true"}, {"p", "2"}}},
      {"good-lambda", {{"refine", "true"}}},
      {"separation", {{"lambda_fraction", "0.5"}}},
      {"covering", {{"masks", "100"}, {"max_rects", "8"}, {"kappas", "1,2"}, {"types", "I,II,III,IV,V"},
                    {"refine", "true"}}},
      {"reproducing", {{"refine", "true"}}},
      {"llogl", {{"refine", "true"}}},
  };
  return d;
}

const std::string& param(const ScenarioConfig& c, const std::string& key) {
  const auto it = c.params.find(key);
  if (it == c.params.end()) throw ConfigError("config: missing parameter '" + key + "'");
  return it->second;
}

double param_double(const ScenarioConfig& c, const std::string& key) { return to_double(key, param(c, key)); }
long param_long(const ScenarioConfig& c, const std::string& key) { return to_long(key, param(c, key)); }

// "name" or "name:count" entries.
std::vector<std::pair<std::string, std::size_t>> generator_entries(const ScenarioConfig& c) {
  std::vector<std::pair<std::string, std::size_t>> out;
  for (const auto& g : c.generators) {
    const auto colon = g.find(':');
    std::string name = g.substr(0, colon);
    std::size_t count = c.suite_count;
    if (colon != std::string::npos) {
      const long k = to_long("suite.generators", g.substr(colon + 1));
      if (k < 1) throw ConfigError("config: generator count must be positive in '" + g + "'");
      count = static_cast<std::size_t>(k);
    }
    const auto& known = suite_generators();
    if (std::find(known.begin(), known.end(), name) == known.end())
      throw ConfigError("config: unknown suite generator '" + name + "'");
    out.emplace_back(name, count);
  }
  return out;
}

void check_size(int m, int n) {
  double pts = 1.0;
  for (int k = 0; k < 2 * m; ++k) pts *= n;
  if (pts > static_cast<double>(kMaxPoints))
    throw ConfigError("config: grid m=" + std::to_string(m) + ", n=" + std::to_string(n) + " has " + num(pts) +
                      " points; the limit is " + std::to_string(kMaxPoints));
}

bool refines(const ScenarioConfig& c) {
  const auto it = c.params.find("refine");
  return it != c.params.end() && to_bool("params.refine", it->second);
}

void validate(const ScenarioConfig& c) {
  make_grid(c.m, c.n, c.L);
  check_size(c.m, refines(c) ? 2 * c.n : c.n);
  ScaleLadder::geometric(c.r_min, c.decades, c.ppd);
  if (refines(c)) ScaleLadder::geometric(c.r_min, c.decades, 2 * c.ppd);
  if (!(c.beta >= 1.0)) throw ConfigError("config: beta must be >= 1");
  if (!(c.lambda_min > 0.0) || !(c.lambda_max > c.lambda_min) || c.lambda_count < 2)
    throw ConfigError("config: lambda grid needs 0 < min < max and count >= 2");
  if (c.suite_count < 1) throw ConfigError("config: suite count must be positive");
  if (c.max_mode < 1 || c.modes < 1) throw ConfigError("config: max_mode and modes must be positive");
  if (c.width < 0.0) throw ConfigError("config: suite width must be non-negative");
  if (c.out_dir.empty()) throw ConfigError("config: output dir must not be empty");
  generator_entries(c);
  // Typed parameters parse here so a bad value fails before any work starts.
  for (const auto& [key, value] : c.params) {
    if (key == "r") {
      const auto r = to_doubles(key, value);
      if (r.size() != 3 || *std::min_element(r.begin(), r.end()) <= 0.0)
        throw ConfigError("config: params.r needs three positive radii");
    } else if (key == "kappas") {
      if (to_doubles(key, value).empty()) throw ConfigError("config: params.kappas is empty");
    } else if (key == "types") {
      for (const auto& t : split_list(value)) parse_dyadic_type(t);
    } else if (key == "refine") {
      to_bool(key, value);
    } else if (key == "tubes" || key == "samples" || key == "volume_tubes" || key == "volume_samples" ||
               key == "tilings" || key == "masks" || key == "max_rects") {
      if (to_long(key, value) < 1) throw ConfigError("config: params." + key + " must be positive");
    } else if (!(to_double(key, value) >= 0.0)) {
      throw ConfigError("config: params." + key + " must be non-negative");
    }
  }
}

ScaleGrid ladder(const ScenarioConfig& c, int ppd_factor = 1) {
  return ScaleGrid::geometric(c.r_min, c.decades, c.ppd * ppd_factor);
}

std::vector<double> lambda_grid(const ScenarioConfig& c, double scale) {
  std::vector<double> out(static_cast<std::size_t>(c.lambda_count));
  const double a = std::log(c.lambda_min), b = std::log(c.lambda_max);
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = scale * std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(out.size() - 1));
  return out;
}

struct Member {
  std::string generator;
  std::size_t index = 0;
  SpatialField field;
};

std::vector<Member> build_suite(const ScenarioConfig& c, const GridSpec& spec) {
  std::vector<Member> out;
  std::uint64_t k = 0;
  for (const auto& [name, count] : generator_entries(c)) {
    SuiteOptions opt;
    opt.count = count;
    opt.max_mode = c.max_mode;
    opt.modes = c.modes;
    opt.width = c.width;
    auto fields = generate_suite(name, c.suite_seed + 1000 * k++, spec, opt);
    for (std::size_t i = 0; i < fields.size(); ++i) out.push_back({name, i, std::move(fields[i])});
  }
  return out;
}

void add_check(ScenarioResult& res, std::string name, bool must_pass, bool passed, std::string detail) {
  res.checks.push_back({std::move(name), must_pass, passed, std::move(detail)});
}

double drift(double a, double b) {
  if (a == b) return 1.0;
  if (!(a > 0.0) || !(b > 0.0)) return std::numeric_limits<double>::infinity();
  return std::max(a, b) / std::min(a, b);
}

// ---------------------------------------------------------------------------

ScenarioResult run_verify_kernel(const ScenarioConfig& c) {
  if (c.m != 1) throw ConfigError("verify-kernel: the physical kernel is implemented for m = 1");
  ScenarioResult res;
  const GridSpec spec = make_grid(c.m, c.n, c.L);
  const auto r = to_doubles("r", param(c, "r"));
  const auto triple = ScaleTriple::make(r[0], r[1], r[2]);

  const auto quad = twisted_kernel_physical(spec, triple);
  FrequencyField F{spec, std::vector<Complex>(spec.size())};
  const auto mult = twisted_multiplier_field(spec, triple);
  for (std::size_t i = 0; i < mult.size(); ++i) F.coefficients[i] = mult[i];
  const auto spectral = inverse_transform(F, true);

  double err = 0.0, peak = 0.0;
  std::ostringstream csv;
  csv << "i1,i2,x1,x2,quadrature,spectral,abs_diff\n";
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double q = quad.values[i].real(), s = spectral.values[i].real();
    err = std::max(err, std::abs(q - s));
    peak = std::max(peak, std::abs(s));
    const auto x = spec.coordinates(i);
    csv << spec.block1_of(i) << ',' << spec.block2_of(i) << ',' << num(x[0]) << ',' << num(x[1]) << ',' << num(q)
        << ',' << num(s) << ',' << num(std::abs(q - s)) << '\n';
  }
  const double rel = err / peak;
  const double tol = param_double(c, "tolerance");
  add_check(res, "kernel_crossvalidation", true, rel <= tol, "rel_sup_err=" + num(rel) + " tol=" + num(tol));

  // Transform sanity on a random field.
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(spec.size());
  for (double& x : v) x = g(rng);
  const auto f = SpatialField::from_real(spec, v);
  const auto Ff = forward_transform(f);
  const auto back = inverse_transform(Ff, true);
  double rt = 0.0, fmax = 0.0, energy = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    rt = std::max(rt, std::abs(back.values[i].real() - v[i]));
    fmax = std::max(fmax, std::abs(v[i]));
  }
  for (const auto& z : Ff.coefficients) energy += std::norm(z);
  energy *= Ff.cell_measure();
  const double l2 = std::pow(lp_norm(f, 2.0), 2.0);
  const double parseval = std::abs(energy - l2) / l2;
  add_check(res, "fft_round_trip", true, rt / fmax <= 1e-12, "rel_err=" + num(rt / fmax));
  add_check(res, "parseval", true, parseval <= 1e-12, "rel_err=" + num(parseval));

  res.files["verify-kernel.csv"] = csv.str();
  return res;
}

ScenarioResult run_verify_identities(const ScenarioConfig& c) {
  ScenarioResult res;
  const GridSpec spec = make_grid(c.m, c.n, c.L);
  const ScaleGrid scales = ladder(c);
  const auto members = build_suite(c, spec);

  std::ostringstream l2;
  l2 << "generator,index,quantity,ratio,target,rel_err\n";
  const std::array<int, 1> b3{3};
  const std::array<int, 2> b12{1, 2};
  struct Target {
    const char* name;
    double value;
    double tol;
  };
  const Target targets[] = {{"S3", 0.5, 0.02}, {"S12", 0.25, 0.02}, {"S", 0.125, 0.03}};
  double worst[3] = {0.0, 0.0, 0.0};
  for (const auto& mem : members) {
    const double fn = std::pow(lp_norm(mem.field, 2.0), 2.0);
    if (fn == 0.0) throw PreconditionError("verify-identities: suite member with zero norm");
    const double dm = degenerate_mass(mem.field);
    if (dm > 1e-8) res.notes.push_back(mem.generator + " #" + std::to_string(mem.index) +
                                       " has degenerate-frequency mass " + num(dm));
    const SpatialField fields[3] = {partial_area(mem.field, ConeSpec::partial(scales, b3)).field,
                                    partial_area(mem.field, ConeSpec::partial(scales, b12)).field,
                                    area_function(mem.field, ConeSpec::full(scales)).field};
    for (int q = 0; q < 3; ++q) {
      const double ratio = std::pow(lp_norm(fields[q], 2.0), 2.0) / fn;
      const double rel = std::abs(ratio - targets[q].value) / targets[q].value;
      worst[q] = std::max(worst[q], rel);
      l2 << mem.generator << ',' << mem.index << ',' << targets[q].name << ',' << num(ratio) << ','
         << num(targets[q].value) << ',' << num(rel) << '\n';
    }
  }
  for (int q = 0; q < 3; ++q)
    add_check(res, std::string("l2_constant_") + targets[q].name, true, worst[q] <= targets[q].tol,
              "max_rel_err=" + num(worst[q]) + " tol=" + num(targets[q].tol));

  // Multi-harmonicity on a smooth bump: residuals are O(dr^2), so halving dr divides them by 4.
  const auto r = to_doubles("r", param(c, "r"));
  const auto triple = ScaleTriple::make(r[0], r[1], r[2]);
  const double dr = param_double(c, "dr");
  const double bw = param_double(c, "bump_width") > 0.0 ? param_double(c, "bump_width") : c.L / 4.0;
  const auto bump = bump_field(spec, std::vector<double>(static_cast<std::size_t>(spec.dims()), c.L / 2.0), bw);
  std::ostringstream harm;
  harm << "identity,block,dr,residual,ratio\n";
  for (int which = 0; which < 2; ++which) {
    const char* name = which == 0 ? "harmonic" : "square";
    for (int j = 1; j <= 3; ++j) {
      double prev = 0.0;
      double first_ratio = 0.0;
      for (int k = 0; k < 3; ++k) {
        const double step = dr / std::pow(2.0, k);
        const double res_k = which == 0 ? harmonicity_residual(bump, triple, j, step)
                                        : square_identity_residual(bump, triple, j, step);
        const double ratio = k == 0 ? 0.0 : prev / res_k;
        if (k == 1) first_ratio = ratio;
        harm << name << ',' << j << ',' << num(step) << ',' << num(res_k) << ',' << (k == 0 ? "" : num(ratio))
             << '\n';
        prev = res_k;
      }
      add_check(res, std::string(name) + "_convergence_block" + std::to_string(j), true,
                std::abs(first_ratio - 4.0) <= 0.5, "ratio=" + num(first_ratio) + " target=4+-0.5");
    }
  }
  res.files["l2_constants.csv"] = l2.str();
  res.files["harmonicity.csv"] = harm.str();
  return res;
}

// Tube radii in a prescribed regime, with all ratios in [1, 4].
std::array<double, 3> radii_in_regime(Regime g, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double small = scale * (0.5 + 0.5 * u(rng));
  const double a = small * (1.0 + 3.0 * u(rng)), b = small * (1.0 + 3.0 * u(rng));
  switch (g) {
    case Regime::Rect: return {a, b, small};
    case Regime::ParaFirst: return {a, small * 0.999, b};
    case Regime::ParaSecond: return {small * 0.999, a, b};
  }
  return {a, b, small};
}

ScenarioResult run_verify_geometry(const ScenarioConfig& c) {
  ScenarioResult res;
  const GridSpec spec = make_grid(c.m, c.n, c.L);
  const int m = c.m;
  const auto dims = static_cast<std::size_t>(2 * m);
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  // Containment T(x, r/2) ⊂ pi(B~(x, r)) ⊂ T(x, 2r).
  const long tubes = param_long(c, "tubes"), samples = param_long(c, "samples");
  std::ostringstream cont;
  cont << "tube,regime,r1,r2,r3,inner_samples,inner_violations,outer_samples,outer_violations\n";
  std::size_t total = 0, violations = 0;
  for (long t = 0; t < tubes; ++t) {
    std::vector<double> x(dims);
    for (double& v : x) v = c.L * u(rng);
    std::array<double, 3> r;
    for (double& v : r) v = std::exp(std::log(0.05) + u(rng) * std::log(100.0));
    const auto rep = containment_check(x, r, static_cast<std::size_t>(samples), c.seed + 17 * (t + 1));
    total += rep.inner_samples + rep.outer_samples;
    violations += rep.inner_violations + rep.outer_violations;
    cont << t << ',' << regime_name(classify_regime(r)) << ',' << num(r[0]) << ',' << num(r[1]) << ','
         << num(r[2]) << ',' << rep.inner_samples << ',' << rep.inner_violations << ',' << rep.outer_samples
         << ',' << rep.outer_violations << '\n';
  }
  add_check(res, "containment", true, violations == 0,
            std::to_string(violations) + " violations over " + std::to_string(total) + " samples");

  // Volumes against Monte Carlo over a bounding box of the membership region.
  const long vt = param_long(c, "volume_tubes"), vs = param_long(c, "volume_samples");
  std::ostringstream vol;
  vol << "tube,regime,r1,r2,r3,exact,monte_carlo,rel_err\n";
  double worst = 0.0;
  for (long t = 0; t < vt; ++t) {
    const Regime g = static_cast<Regime>(t % 3);
    const auto r = radii_in_regime(g, rng, c.L / 16.0);
    std::vector<double> x(dims);
    for (double& v : x) v = c.L * u(rng);
    const TubeSpec tube = make_tube(x, r);
    // Half-widths per component: first block then second block.
    double h1 = r[0], h2 = r[1];
    if (g == Regime::ParaFirst) h1 = r[0] + r[2], h2 = r[2];
    if (g == Regime::ParaSecond) h1 = r[2], h2 = r[1] + r[2];
    std::vector<double> p(dims);
    long hits = 0;
    for (long s = 0; s < vs; ++s) {
      for (int k = 0; k < m; ++k) {
        p[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)] + h1 * (2.0 * u(rng) - 1.0);
        p[static_cast<std::size_t>(m + k)] = x[static_cast<std::size_t>(m + k)] + h2 * (2.0 * u(rng) - 1.0);
      }
      hits += tube_contains(tube, p);
    }
    const double box = std::pow(2.0 * h1, m) * std::pow(2.0 * h2, m);
    const double mc = box * static_cast<double>(hits) / static_cast<double>(vs);
    const double exact = tube_volume(tube);
    const double rel = std::abs(mc - exact) / exact;
    worst = std::max(worst, rel);
    vol << t << ',' << regime_name(tube.regime()) << ',' << num(r[0]) << ',' << num(r[1]) << ',' << num(r[2])
        << ',' << num(exact) << ',' << num(mc) << ',' << num(rel) << '\n';
  }
  add_check(res, "tube_volume", true, worst <= 0.01, "max_rel_err=" + num(worst) + " tol=0.01");

  // Dyadic tilings: coverage exactly one for every admissible scale, cycling through the types.
  const long tilings = param_long(c, "tilings");
  const int e = static_cast<int>(std::lround(std::log2(spec.spacing())));
  const int top = static_cast<int>(std::lround(std::log2(c.L)));
  std::uniform_int_distribution<int> level(e, top);
  std::ostringstream til;
  til << "j1,j2,j3,type,tubes,min_cover,max_cover\n";
  bool tiled = true;
  long done = 0;
  int attempts = 0;
  std::set<std::array<int, 3>> seen;
  while (done < tilings) {
    if (++attempts > 100000) throw DomainError("verify-geometry: window admits too few distinct scales");
    const std::array<int, 3> j{level(rng), level(rng), level(rng)};
    const DyadicType want = static_cast<DyadicType>(done % 5);
    if (classify_scale(j).type != want || seen.count(j)) continue;
    std::vector<DyadicTube> list;
    try {
      list = enumerate_scale(j, spec);
    } catch (const DomainError&) {
      continue;
    }
    seen.insert(j);
    const auto cover = coverage_count(list, spec);
    const auto [lo, hi] = std::minmax_element(cover.begin(), cover.end());
    tiled = tiled && *lo == 1 && *hi == 1;
    til << j[0] << ',' << j[1] << ',' << j[2] << ',' << dyadic_type_name(want) << ',' << list.size() << ','
        << *lo << ',' << *hi << '\n';
    ++done;
  }
  add_check(res, "dyadic_tiling", true, tiled, std::to_string(done) + " scales");

  res.files["containment.csv"] = cont.str();
  res.files["volumes.csv"] = vol.str();
  res.files["tilings.csv"] = til.str();
  return res;
}

// Largest domination constant over the suite, with one CSV row per member.
double domination_over_suite(const std::vector<Member>& members, const ScaleGrid& scales, double beta, int n,
                             double p, std::ostringstream& csv, std::size_t& violations, double& c0_out) {
  std::vector<std::vector<double>> ustars, mtubes;
  double c0 = 0.0;
  for (const auto& mem : members) {
    ustars.push_back(nontangential_max(mem.field, ConeSpec::full(scales, beta)).field.real_part());
    mtubes.push_back(tube_maximal(mem.field, scales.extended_to(mem.field.spec.period())).field.real_part());
    c0 = std::max(c0, domination_constant(ustars.back(), mtubes.back()));
  }
  violations = 0;
  for (std::size_t k = 0; k < members.size(); ++k) {
    const auto& mem = members[k];
    const GridSpec& spec = mem.field.spec;
    for (std::size_t i = 0; i < spec.size(); ++i)
      if (ustars[k][i] > c0 * mtubes[k][i]) ++violations;
    const double fp = lp_norm(mem.field, p);
    csv << n << ',' << mem.generator << ',' << mem.index << ','
        << num(domination_constant(ustars[k], mtubes[k])) << ',' << num(lp_norm(ustars[k], spec, p) / fp) << ','
        << num(lp_norm(mtubes[k], spec, p) / fp) << '\n';
  }
  c0_out = c0;
  return c0;
}

ScenarioResult run_maximal_suite(const ScenarioConfig& c) {
  ScenarioResult res;
  const double p = param_double(c, "p");
  if (!(p >= 1.0)) throw ConfigError("maximal-suite: p must be >= 1");
  std::ostringstream csv;
  csv << "n,generator,index,c0,ustar_lp_ratio,mtube_lp_ratio\n";
  std::vector<int> sizes{c.n};
  if (refines(c)) sizes.push_back(2 * c.n);
  std::vector<double> c0s;
  for (int n : sizes) {
    const GridSpec spec = make_grid(c.m, n, c.L);
    const auto members = build_suite(c, spec);
    std::size_t violations = 0;
    double c0 = 0.0;
    domination_over_suite(members, ladder(c), c.beta, n, p, csv, violations, c0);
    c0s.push_back(c0);
    add_check(res, "domination_n" + std::to_string(n), true, violations == 0 && std::isfinite(c0),
              "C0=" + num(c0) + " violations=" + std::to_string(violations) + " functions=" +
                  std::to_string(members.size()));
  }
  if (c0s.size() == 2) {
    const double d = drift(c0s[0], c0s[1]);
    add_check(res, "domination_grid_drift", false, d < 1.5, "drift=" + num(d) + " threshold=1.5");
  }
  res.files["maximal-suite.csv"] = csv.str();
  return res;
}

ScenarioResult run_good_lambda(const ScenarioConfig& c) {
  ScenarioResult res;
  std::ostringstream csv;
  csv << "n,ppd,generator,index,lambda,lhs,term1,term2,c\n";
  struct Run {
    int n;
    int factor;
    const char* label;
  };
  std::vector<Run> runs{{c.n, 1, "base"}};
  if (refines(c)) {
    runs.push_back({2 * c.n, 1, "grid_doubled"});
    runs.push_back({c.n, 2, "density_doubled"});
  }
  std::vector<double> maxima;
  for (const auto& run : runs) {
    const GridSpec spec = make_grid(c.m, run.n, c.L);
    const ScaleGrid scales = ladder(c, run.factor);
    double max_c = 0.0, max_partial = 0.0;
    for (const auto& mem : build_suite(c, spec)) {
      const double scale = c.lambda_relative ? mem.field.max_abs() : 1.0;
      const auto rep = good_lambda_sweep(mem.field, scales, c.beta, lambda_grid(c, scale));
      for (const auto& row : rep.rows) {
        csv << run.n << ',' << c.ppd * run.factor << ',' << mem.generator << ',' << mem.index << ','
            << num(row.lambda) << ',' << num(row.lhs) << ',' << num(row.term1) << ',' << num(row.term2) << ','
            << num(row.c) << '\n';
        // Below min U* the first term is the whole box and C <= 1 trivially.
        if (row.term1 < spec.volume()) max_partial = std::max(max_partial, row.c);
      }
      max_c = std::max(max_c, rep.max_c);
    }
    maxima.push_back(max_c);
    add_check(res, std::string("good_lambda_finite_") + run.label, false, std::isfinite(max_c),
              "max_C=" + num(max_c) + " max_C_where_ustar_below_lambda_somewhere=" + num(max_partial));
  }
  for (std::size_t k = 1; k < maxima.size(); ++k) {
    const double d = drift(maxima[0], maxima[k]);
    add_check(res, std::string("good_lambda_drift_") + runs[k].label, false, d < 3.0,
              "drift=" + num(d) + " threshold=3");
  }
  res.files["good-lambda.csv"] = csv.str();
  return res;
}

ScenarioResult run_separation(const ScenarioConfig& c) {
  ScenarioResult res;
  const GridSpec spec = make_grid(c.m, c.n, c.L);
  const ScaleGrid scales = ladder(c);
  const double frac = param_double(c, "lambda_fraction");
  if (!(frac > 0.0 && frac < 1.0)) throw ConfigError("separation: lambda_fraction must lie in (0, 1)");
  std::ostringstream csv;
  csv << "generator,index,lambda,c0,good_measure,proxy_measure,inner_points,inner_violations,inner_min,"
         "outer_points,outer_violations,c1\n";
  std::size_t inner = 0, outer = 0, inner_points = 0, outer_points = 0;
  double c1 = 0.0;
  for (const auto& mem : build_suite(c, spec)) {
    const auto ustar = nontangential_max(mem.field, ConeSpec::full(scales, c.beta)).field.real_part();
    const auto [lo, hi] = std::minmax_element(ustar.begin(), ustar.end());
    const double lambda = *lo + frac * (*hi - *lo);
    const auto rep = separation_check(mem.field, lambda, c.beta, scales);
    inner += rep.inner_violations;
    outer += rep.outer_violations;
    inner_points += rep.inner_points;
    outer_points += rep.outer_points;
    c1 = std::max(c1, rep.c1);
    csv << mem.generator << ',' << mem.index << ',' << num(lambda) << ',' << num(rep.c0) << ','
        << num(rep.good_measure) << ',' << num(rep.proxy_measure) << ',' << rep.inner_points << ','
        << rep.inner_violations << ',' << num(rep.inner_min) << ',' << rep.outer_points << ','
        << rep.outer_violations << ',' << num(rep.c1) << '\n';
  }
  add_check(res, "separation_inner", false, inner == 0 && inner_points > 0,
            std::to_string(inner) + " of " + std::to_string(inner_points) + " points with U_g <= 0.9 on W");
  add_check(res, "separation_outer", false, outer == 0 && outer_points > 0 && c1 < 0.9,
            std::to_string(outer) + " of " + std::to_string(outer_points) +
                " points with U_g >= 0.9 off W~, C1=" + num(c1));
  res.files["separation.csv"] = csv.str();
  return res;
}

// The same set on a grid refined by `factor` per axis.
OpenSetMask refine_mask(const OpenSetMask& coarse, int factor) {
  const GridSpec& cs = coarse.spec;
  const GridSpec fs = make_grid(cs.m(), cs.n() * factor, cs.period());
  OpenSetMask fine = OpenSetMask::empty(fs);
  std::vector<int> a(static_cast<std::size_t>(fs.m())), b(a);
  for (std::size_t i = 0; i < fs.size(); ++i) {
    fs.block_indices(fs.block1_of(i), a);
    fs.block_indices(fs.block2_of(i), b);
    for (int& v : a) v /= factor;
    for (int& v : b) v /= factor;
    fine.cells[i] = coarse.cells[cs.join(cs.block_flat(a), cs.block_flat(b))];
  }
  return fine;
}

ScenarioResult run_covering(const ScenarioConfig& c) {
  ScenarioResult res;
  const GridSpec spec = make_grid(c.m, c.n, c.L);
  const long masks = param_long(c, "masks"), max_rects = param_long(c, "max_rects");
  const auto kappas = to_doubles("kappas", param(c, "kappas"));
  std::vector<DyadicType> types;
  for (const auto& t : split_list(param(c, "types"))) types.push_back(parse_dyadic_type(t));

  std::vector<OpenSetMask> omegas;
  for (long k = 0; k < masks; ++k)
    omegas.push_back(random_dyadic_union(spec, static_cast<std::size_t>(max_rects), c.suite_seed + k,
                                         static_cast<DyadicType>(k % 5)));

  std::ostringstream csv;
  csv << "n,mask,type,kappa,measure,sum,ratio,tubes\n";
  std::vector<int> factors{1};
  if (refines(c)) factors.push_back(2);
  // constants[factor][type][kappa]
  std::vector<std::vector<std::vector<double>>> constants;
  for (int factor : factors) {
    const int n = c.n * factor;
    const double h = c.L / n;
    // Halo ladder from one cell to the box.
    const ScaleGrid halo_scales = ScaleGrid::geometric(h, std::log10(static_cast<double>(n)), c.ppd);
    std::vector<std::vector<double>> cst(types.size(), std::vector<double>(kappas.size(), 0.0));
    for (long k = 0; k < masks; ++k) {
      const OpenSetMask omega = factor == 1 ? omegas[static_cast<std::size_t>(k)]
                                            : refine_mask(omegas[static_cast<std::size_t>(k)], factor);
      const OpenSetMask halo = tube_halo(omega, halo_scales);
      for (std::size_t t = 0; t < types.size(); ++t)
        for (std::size_t q = 0; q < kappas.size(); ++q) {
          const auto cs = covering_sum(omega, halo, types[t], kappas[q]);
          cst[t][q] = std::max(cst[t][q], cs.ratio);
          csv << n << ',' << k << ',' << dyadic_type_name(types[t]) << ',' << num(kappas[q]) << ','
              << num(omega.measure()) << ',' << num(cs.sum) << ',' << num(cs.ratio) << ',' << cs.tubes << '\n';
        }
    }
    constants.push_back(cst);
  }
  std::ostringstream summary;
  summary << "type,kappa,constant,constant_refined,drift\n";
  for (std::size_t t = 0; t < types.size(); ++t)
    for (std::size_t q = 0; q < kappas.size(); ++q) {
      const std::string tag = std::string(dyadic_type_name(types[t])) + "_kappa" + num(kappas[q]);
      const double base = constants[0][t][q];
      add_check(res, "covering_constant_" + tag, false, std::isfinite(base), "C=" + num(base));
      summary << dyadic_type_name(types[t]) << ',' << num(kappas[q]) << ',' << num(base);
      if (constants.size() == 2) {
        const double d = drift(base, constants[1][t][q]);
        add_check(res, "covering_drift_" + tag, false, d < 2.0, "drift=" + num(d) + " threshold=2");
        summary << ',' << num(constants[1][t][q]) << ',' << num(d);
      } else {
        summary << ",,";
      }
      summary << '\n';
    }
  res.files["covering.csv"] = csv.str();
  res.files["covering_constants.csv"] = summary.str();
  return res;
}

ScenarioResult run_reproducing(const ScenarioConfig& c) {
  ScenarioResult res;
  const GridSpec spec = make_grid(c.m, c.n, c.L);
  const auto members = build_suite(c, spec);
  std::ostringstream csv;
  csv << "generator,index,ppd,residual\n";
  double worst = 0.0, worst_ratio = std::numeric_limits<double>::infinity();
  for (const auto& mem : members) {
    const double base = reproducing_residual(mem.field, ladder(c));
    worst = std::max(worst, base);
    csv << mem.generator << ',' << mem.index << ',' << c.ppd << ',' << num(base) << '\n';
    if (refines(c)) {
      const double fine = reproducing_residual(mem.field, ladder(c, 2));
      csv << mem.generator << ',' << mem.index << ',' << 2 * c.ppd << ',' << num(fine) << '\n';
      worst_ratio = std::min(worst_ratio, base / fine);
    }
  }
  add_check(res, "reproducing_residual", true, worst <= 1e-2, "max_rel_err=" + num(worst) + " tol=0.01");
  if (refines(c))
    add_check(res, "reproducing_density_halving", false, std::abs(worst_ratio - 2.0) <= 0.5,
              "min error ratio under density doubling=" + num(worst_ratio) + " target=2+-0.5");
  res.files["reproducing.csv"] = csv.str();
  return res;
}

ScenarioResult run_llogl(const ScenarioConfig& c) {
  ScenarioResult res;
  std::ostringstream csv;
  csv << "n,generator,index,lambda,lhs,rhs,ratio\n";
  std::vector<int> sizes{c.n};
  if (refines(c)) sizes.push_back(2 * c.n);
  std::vector<double> maxima;
  for (int n : sizes) {
    const GridSpec spec = make_grid(c.m, n, c.L);
    double max_ratio = 0.0;
    for (const auto& mem : build_suite(c, spec)) {
      const double scale = c.lambda_relative ? mem.field.max_abs() : 1.0;
      const auto rep = llogl_endpoint_sweep(mem.field, ladder(c), lambda_grid(c, scale));
      for (const auto& row : rep.rows)
        csv << n << ',' << mem.generator << ',' << mem.index << ',' << num(row.lambda) << ',' << num(row.lhs)
            << ',' << num(row.rhs) << ',' << num(row.ratio) << '\n';
      max_ratio = std::max(max_ratio, rep.max_ratio);
    }
    maxima.push_back(max_ratio);
    add_check(res, "llogl_finite_n" + std::to_string(n), false, std::isfinite(max_ratio),
              "max_ratio=" + num(max_ratio));
  }
  if (maxima.size() == 2) {
    const double d = drift(maxima[0], maxima[1]);
    add_check(res, "llogl_refinement_drift", false, d < 2.0, "drift=" + num(d) + " threshold=2");
  }
  res.files["llogl.csv"] = csv.str();
  return res;
}

std::string ini_key(const std::string& section, const std::string& key) { return section + "." + key; }

}  // namespace

const std::vector<std::string>& scenario_ids() {
  static const std::vector<std::string> ids{"verify-kernel", "verify-identities", "verify-geometry",
                                            "maximal-suite", "good-lambda",       "separation",
                                            "covering",      "reproducing",       "llogl"};
  return ids;
}

ScenarioConfig default_config(const std::string& id) {
  const auto& d = param_defaults();
  const auto it = d.find(id);
  if (it == d.end()) throw ConfigError("config: unknown scenario id '" + id + "'");
  ScenarioConfig c;
  c.id = id;
  c.params = it->second;
  c.out_dir = "out/" + id;
  const double two_pi = 2.0 * std::numbers::pi;
  if (id == "verify-kernel") {
    c.n = 256;
    c.L = 16.0;
  } else if (id == "verify-identities") {
    c.n = 64;
    c.L = two_pi;
    c.r_min = 5e-4;
    c.decades = 5.0;
    c.ppd = 32;
    c.generators = {"random-bandlimited"};
    c.suite_count = 3;
    c.max_mode = 6;
    c.modes = 4;
  } else if (id == "verify-geometry") {
    c.n = 64;
    c.L = 64.0;
  } else if (id == "maximal-suite" || id == "good-lambda" || id == "separation" || id == "llogl") {
    // One-cell spacing and beta r between 1 and 10 cells keeps the cones local.
    c.L = 64.0;
    c.r_min = 1.0 / 16.0;
    c.decades = 1.0;
    if (id == "maximal-suite") c.generators = {"bump:25", "random-bandlimited:25"};
    if (id == "good-lambda") {
      c.generators = {"bump:3", "random-bandlimited:2"};
      c.decades = 2.0;
    }
    if (id == "separation") {
      // Small bumps in a large box leave room where the tube maximal function of the bad set
      // drops below 1/(10 C0).
      c.n = 256;
      c.L = 256.0;
      c.generators = {"bump:3"};
      c.width = 3.0;
    }
    if (id == "llogl") {
      c.generators = {"spike:10"};
      c.width = 2.0;
      c.lambda_min = 1e-3;
      c.lambda_max = 1.0;
    }
  } else if (id == "covering") {
    c.L = 64.0;
  } else if (id == "reproducing") {
    c.L = two_pi;
    c.r_min = 1e-4;
    c.decades = 6.0;
    c.ppd = 64;
    c.generators = {"random-bandlimited"};
    c.suite_count = 3;
    c.max_mode = 6;
    c.modes = 4;
  }
  return c;
}

ScenarioConfig parse_config_text(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  const auto id = tree.get_optional<std::string>("scenario.id");
  if (!id) throw ConfigError("config: missing [scenario] id");
  ScenarioConfig c = default_config(*id);

  static const std::map<std::string, std::set<std::string>> known{
      {"scenario", {"id", "seed"}},
      {"grid", {"m", "n", "L"}},
      {"ladder", {"r_min", "decades", "ppd"}},
      {"cone", {"beta"}},
      {"lambda", {"min", "max", "count", "relative"}},
      {"suite", {"generators", "count", "seed", "max_mode", "modes", "width"}},
      {"params", {}},
      {"output", {"dir"}},
  };
  for (const auto& [section, body] : tree) {
    const auto sec = known.find(section);
    if (sec == known.end()) throw ConfigError("config: unknown section [" + section + "]");
    if (body.empty() && !body.data().empty())
      throw ConfigError("config: key '" + section + "' outside a section");
    for (const auto& [key, node] : body) {
      const std::string v = node.data();
      const std::string k = ini_key(section, key);
      if (section == "params") {
        if (!c.params.count(key))
          throw ConfigError("config: scenario " + c.id + " has no parameter '" + key + "'");
        c.params[key] = v;
        continue;
      }
      if (!sec->second.count(key)) throw ConfigError("config: unknown key '" + k + "'");
      if (k == "scenario.seed") c.seed = static_cast<std::uint64_t>(to_long(k, v));
      else if (k == "grid.m") c.m = static_cast<int>(to_long(k, v));
      else if (k == "grid.n") c.n = static_cast<int>(to_long(k, v));
      else if (k == "grid.L") c.L = to_double(k, v);
      else if (k == "ladder.r_min") c.r_min = to_double(k, v);
      else if (k == "ladder.decades") c.decades = to_double(k, v);
      else if (k == "ladder.ppd") c.ppd = static_cast<int>(to_long(k, v));
      else if (k == "cone.beta") c.beta = to_double(k, v);
      else if (k == "lambda.min") c.lambda_min = to_double(k, v);
      else if (k == "lambda.max") c.lambda_max = to_double(k, v);
      else if (k == "lambda.count") c.lambda_count = static_cast<int>(to_long(k, v));
      else if (k == "lambda.relative") c.lambda_relative = to_bool(k, v);
      else if (k == "suite.generators") c.generators = split_list(v);
      else if (k == "suite.count") {
        const long cnt = to_long(k, v);
        if (cnt < 1) throw ConfigError("config: suite.count must be positive");
        c.suite_count = static_cast<std::size_t>(cnt);
      } else if (k == "suite.seed") c.suite_seed = static_cast<std::uint64_t>(to_long(k, v));
      else if (k == "suite.max_mode") c.max_mode = static_cast<int>(to_long(k, v));
      else if (k == "suite.modes") c.modes = static_cast<int>(to_long(k, v));
      else if (k == "suite.width") c.width = to_double(k, v);
      else if (k == "output.dir") c.out_dir = v;
    }
  }
  validate(c);
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

bool ScenarioResult::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& k) { return k.passed || !k.must_pass; });
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
  validate(config);
  ScenarioResult res;
  const std::string& id = config.id;
  if (id == "verify-kernel") res = run_verify_kernel(config);
  else if (id == "verify-identities") res = run_verify_identities(config);
  else if (id == "verify-geometry") res = run_verify_geometry(config);
  else if (id == "maximal-suite") res = run_maximal_suite(config);
  else if (id == "good-lambda") res = run_good_lambda(config);
  else if (id == "separation") res = run_separation(config);
  else if (id == "covering") res = run_covering(config);
  else if (id == "reproducing") res = run_reproducing(config);
  else if (id == "llogl") res = run_llogl(config);
  else throw ConfigError("config: unknown scenario id '" + id + "'");
  res.id = id;
  return res;
}

std::string summary_text(const ScenarioResult& result, bool with_timestamp) {
  std::ostringstream out;
  out << "scenario: " << result.id << '\n';
  if (with_timestamp) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[64];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    out << "generated: " << buf << '\n';
  }
  out << "status: " << (result.ok() ? "PASS" : "FAIL") << '\n';
  for (const auto& k : result.checks)
    out << "check " << k.name << " [" << (k.must_pass ? "must-pass" : "report-only") << "]: "
        << (k.passed ? "PASS" : "FAIL") << "  " << k.detail << '\n';
  for (const auto& n : result.notes) out << "note: " << n << '\n';
  for (const auto& [name, body] : result.files)
    out << "file: " << name << " (" << std::max<long>(0, std::count(body.begin(), body.end(), '\n') - 1)
        << " rows)\n";
  return out.str();
}

void write_result(const ScenarioResult& result, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("output: cannot create '" + dir + "': " + ec.message());
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    out << body;
    if (!out) throw ConfigError("output: cannot write '" + (fs::path(dir) / name).string() + "'");
  };
  for (const auto& [name, body] : result.files) write(name, body);
  write("summary.txt", summary_text(result, true));
}

std::vector<ScenarioConfig> selftest_configs() {
  std::vector<ScenarioConfig> out;
  ScenarioConfig k = default_config("verify-kernel");
  k.n = 64;
  out.push_back(k);

  ScenarioConfig id = default_config("verify-identities");
  id.n = 32;
  id.suite_count = 2;
  out.push_back(id);

  ScenarioConfig g = default_config("verify-geometry");
  g.params["tubes"] = "20";
  g.params["samples"] = "500";
  g.params["volume_tubes"] = "6";
  g.params["volume_samples"] = "400000";
  g.params["tilings"] = "10";
  out.push_back(g);

  ScenarioConfig r = default_config("reproducing");
  r.n = 32;
  r.suite_count = 2;
  r.params["refine"] = "false";
  out.push_back(r);
  for (auto& c : out) c.out_dir = c.id;
  return out;
}

}  // namespace tha
