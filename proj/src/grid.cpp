#include "tha/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "fft.hpp"

namespace tha {

GridSpec make_grid(int m, int n, double period) {
  if (m < 1) throw ConfigError("grid: block dimension m must be >= 1");
  if (n < 2 || !std::has_single_bit(static_cast<unsigned>(n)))
    throw ConfigError("grid: n must be a power of two >= 2, got " + std::to_string(n));
  if (!(period > 0.0) || !std::isfinite(period))
    throw ConfigError("grid: period must be positive and finite");
  GridSpec g;
  g.m_ = m;
  g.n_ = n;
  g.period_ = period;
  g.block_size_ = 1;
  for (int k = 0; k < m; ++k) g.block_size_ *= static_cast<std::size_t>(n);
  g.size_ = g.block_size_ * g.block_size_;
  return g;
}

double GridSpec::cell_measure() const { return std::pow(spacing(), dims()); }
double GridSpec::volume() const { return std::pow(period_, dims()); }

double GridSpec::frequency(int i) const {
  return 2.0 * std::numbers::pi / period_ * signed_index(i);
}

double GridSpec::max_frequency() const {
  return 2.0 * std::numbers::pi / period_ * (n_ / 2 - 1);
}

void GridSpec::block_indices(std::size_t block_flat, std::span<int> out) const {
  for (int k = m_ - 1; k >= 0; --k) {
    out[static_cast<std::size_t>(k)] = static_cast<int>(block_flat % static_cast<std::size_t>(n_));
    block_flat /= static_cast<std::size_t>(n_);
  }
}

std::size_t GridSpec::block_flat(std::span<const int> idx) const {
  std::size_t flat = 0;
  for (int k = 0; k < m_; ++k) {
    int i = idx[static_cast<std::size_t>(k)] % n_;
    if (i < 0) i += n_;
    flat = flat * static_cast<std::size_t>(n_) + static_cast<std::size_t>(i);
  }
  return flat;
}

std::vector<double> GridSpec::coordinates(std::size_t flat) const {
  std::vector<int> idx(static_cast<std::size_t>(m_));
  std::vector<double> x(static_cast<std::size_t>(dims()));
  block_indices(block1_of(flat), idx);
  for (int k = 0; k < m_; ++k) x[static_cast<std::size_t>(k)] = idx[static_cast<std::size_t>(k)] * spacing();
  block_indices(block2_of(flat), idx);
  for (int k = 0; k < m_; ++k)
    x[static_cast<std::size_t>(m_ + k)] = idx[static_cast<std::size_t>(k)] * spacing();
  return x;
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) throw SpecMismatch(std::string(what) + ": fields live on different grids");
}

SpatialField::SpatialField(GridSpec s, std::vector<Complex> v, bool is_real)
    : spec(s), values(std::move(v)), real(is_real) {
  if (values.size() != spec.size())
    throw SpecMismatch("field: sample count does not match n^{2m}");
  if (real)
    for (auto& z : values) z = {z.real(), 0.0};
}

SpatialField SpatialField::zeros(const GridSpec& s) {
  return SpatialField(s, std::vector<Complex>(s.size()), true);
}

SpatialField SpatialField::from_real(const GridSpec& s, std::span<const double> v) {
  if (v.size() != s.size()) throw SpecMismatch("field: sample count does not match n^{2m}");
  std::vector<Complex> c(v.begin(), v.end());
  return SpatialField(s, std::move(c), true);
}

std::vector<double> SpatialField::real_part() const {
  std::vector<double> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(), [](Complex z) { return z.real(); });
  return out;
}

std::vector<double> SpatialField::magnitude() const {
  std::vector<double> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(), [](Complex z) { return std::abs(z); });
  return out;
}

double SpatialField::max_abs() const {
  double best = 0.0;
  for (auto z : values) best = std::max(best, std::abs(z));
  return best;
}

double SpatialField::mean() const {
  double s = 0.0;
  for (auto z : values) s += z.real();
  return s / static_cast<double>(values.size());
}

double FrequencyField::cell_measure() const { return 1.0 / spec.volume(); }

FrequencyField forward_transform(const SpatialField& f) {
  FrequencyField F{f.spec, f.values};
  detail::dft_cube_inplace(F.coefficients, f.spec.n(), f.spec.dims(), -1);
  const double h = f.spec.cell_measure();
  for (auto& c : F.coefficients) c *= h;
  return F;
}

SpatialField inverse_transform(const FrequencyField& F, bool real) {
  std::vector<Complex> v = F.coefficients;
  detail::dft_cube_inplace(v, F.spec.n(), F.spec.dims(), +1);
  const double inv = 1.0 / F.spec.volume();
  for (auto& z : v) z *= inv;
  return SpatialField(F.spec, std::move(v), real);
}

double lp_norm(std::span<const double> values, const GridSpec& spec, double p) {
  if (values.size() != spec.size()) throw SpecMismatch("lp_norm: sample count mismatch");
  if (std::isinf(p) && p > 0) {
    double best = 0.0;
    for (double v : values) best = std::max(best, std::abs(v));
    return best;
  }
  if (!(p >= 1.0)) throw ConfigError("lp_norm: p must be >= 1");
  double s = 0.0;
  if (p == 2.0) {
    for (double v : values) s += v * v;
    return std::sqrt(s * spec.cell_measure());
  }
  for (double v : values) s += std::pow(std::abs(v), p);
  return std::pow(s * spec.cell_measure(), 1.0 / p);
}

double lp_norm(const SpatialField& f, double p) {
  return lp_norm(f.magnitude(), f.spec, p);
}

double distribution_measure(std::span<const double> values, const GridSpec& spec, double lambda) {
  std::size_t count = 0;
  for (double v : values)
    if (std::abs(v) > lambda) ++count;
  return static_cast<double>(count) * spec.cell_measure();
}

double distribution_measure(const SpatialField& f, double lambda) {
  return distribution_measure(f.magnitude(), f.spec, lambda);
}

double llogl_functional(const SpatialField& f, double lambda) {
  if (!(lambda > 0.0)) throw PreconditionError("llogl_functional: lambda must be positive");
  double s = 0.0;
  for (auto z : f.values) {
    const double t = std::abs(z) / lambda;
    s += t * std::log(std::numbers::e + t);
  }
  return s * f.spec.cell_measure();
}

namespace {

template <typename T>
void put(std::ostream& out, T v) {
  static_assert(std::endian::native == std::endian::little, "little-endian host required");
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ConfigError("field file: truncated input");
  return v;
}

}  // namespace

void write_field_header(std::ostream& out, const GridSpec& spec, bool is_real) {
  out.write("THA1", 4);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(spec.m()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(spec.n()));
  put<double>(out, spec.period());
  put<std::uint8_t>(out, is_real ? 0 : 1);
}

GridSpec read_field_header(std::istream& in, bool& is_real) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "THA1", 4) != 0) throw ConfigError("field file: bad magic");
  const auto m = get<std::uint32_t>(in);
  const auto n = get<std::uint32_t>(in);
  const auto L = get<double>(in);
  const auto flag = get<std::uint8_t>(in);
  if (flag > 1) throw ConfigError("field file: bad real/complex flag");
  is_real = flag == 0;
  return make_grid(static_cast<int>(m), static_cast<int>(n), L);
}

void write_field_samples(std::ostream& out, const SpatialField& f) {
  for (auto z : f.values) {
    put<double>(out, z.real());
    if (!f.real) put<double>(out, z.imag());
  }
}

std::vector<Complex> read_field_samples(std::istream& in, const GridSpec& spec, bool is_real) {
  std::vector<Complex> v(spec.size());
  for (auto& z : v) {
    const double re = get<double>(in);
    const double im = is_real ? 0.0 : get<double>(in);
    z = {re, im};
  }
  return v;
}

void save_field(const std::string& path, const SpatialField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  write_field_header(out, f.spec, f.real);
  write_field_samples(out, f);
}

SpatialField load_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  bool is_real = true;
  GridSpec spec = read_field_header(in, is_real);
  return SpatialField(spec, read_field_samples(in, spec, is_real), is_real);
}

void write_field_csv(std::ostream& out, const SpatialField& f) {
  const int d = f.spec.dims();
  const int m = f.spec.m();
  for (int a = 0; a < d; ++a) out << (a < m ? "x1_" : "x2_") << (a % m + 1) << ',';
  out << (f.real ? "value\n" : "re,im\n");
  out << std::setprecision(17);
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (double c : f.spec.coordinates(i)) out << c << ',';
    out << f.values[i].real();
    if (!f.real) out << ',' << f.values[i].imag();
    out << '\n';
  }
}

}  // namespace tha
