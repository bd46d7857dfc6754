#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tha/errors.hpp"

namespace tha {

using Complex = std::complex<double>;

/// Periodic sampling of the torus [0,L)^{2m} with n points per axis.
///
/// Axes 0..m-1 carry the first block x1, axes m..2m-1 the second block x2.
/// Flat indices are row-major over the 2m axes.
class GridSpec {
 public:
  GridSpec() = default;

  int m() const { return m_; }
  int n() const { return n_; }
  double period() const { return period_; }
  int dims() const { return 2 * m_; }

  double spacing() const { return period_ / n_; }
  std::size_t size() const { return size_; }
  /// Number of points of one block, n^m.
  std::size_t block_size() const { return block_size_; }
  double cell_measure() const;
  double volume() const;

  /// Signed lattice index in {-n/2, ..., n/2-1} for an FFT-ordered index.
  int signed_index(int i) const { return i < n_ / 2 ? i : i - n_; }
  /// Angular frequency (2*pi/L) * signed_index(i).
  double frequency(int i) const;
  /// Largest positive lattice frequency, (2*pi/L) * (n/2 - 1).
  double max_frequency() const;

  /// Split a flat index into its block-1 and block-2 flat sub-indices.
  std::size_t block1_of(std::size_t flat) const { return flat / block_size_; }
  std::size_t block2_of(std::size_t flat) const { return flat % block_size_; }
  std::size_t join(std::size_t b1, std::size_t b2) const { return b1 * block_size_ + b2; }
  /// Axis indices of a block flat index (length m).
  void block_indices(std::size_t block_flat, std::span<int> out) const;
  std::size_t block_flat(std::span<const int> idx) const;
  /// Physical coordinates of a point (length 2m).
  std::vector<double> coordinates(std::size_t flat) const;

  bool operator==(const GridSpec&) const = default;

 private:
  friend GridSpec make_grid(int, int, double);
  int m_ = 0;
  int n_ = 0;
  double period_ = 0.0;
  std::size_t size_ = 0;
  std::size_t block_size_ = 0;
};

/// Validated grid; throws ConfigError on a bad m, n, or period.
GridSpec make_grid(int m, int n, double period);

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what);

/// Samples of a function on the grid. Real fields keep zero imaginary parts.
struct SpatialField {
  GridSpec spec;
  std::vector<Complex> values;
  bool real = true;

  SpatialField() = default;
  SpatialField(GridSpec s, std::vector<Complex> v, bool is_real);

  static SpatialField zeros(const GridSpec& s);
  static SpatialField from_real(const GridSpec& s, std::span<const double> v);

  std::size_t size() const { return values.size(); }
  std::vector<double> real_part() const;
  std::vector<double> magnitude() const;
  double max_abs() const;
  double mean() const;
};

/// Fourier coefficients in the integral convention
/// F(xi) = h^{2m} * sum_x f(x) exp(-i xi.x), indexed like the spatial grid.
struct FrequencyField {
  GridSpec spec;
  std::vector<Complex> coefficients;

  /// Measure of one frequency cell including the (2 pi)^{-2m} Plancherel factor: 1/L^{2m}.
  double cell_measure() const;
};

FrequencyField forward_transform(const SpatialField& f);
/// Inverse of forward_transform. `real` tags the result and drops imaginary parts.
SpatialField inverse_transform(const FrequencyField& F, bool real);

/// Riemann-sum L^p norm with cell measure (L/n)^{2m}; p = infinity allowed.
double lp_norm(const SpatialField& f, double p);
double lp_norm(std::span<const double> values, const GridSpec& spec, double p);

/// Lebesgue measure of {|f| > lambda}. Negative lambda returns the total measure.
double distribution_measure(const SpatialField& f, double lambda);
double distribution_measure(std::span<const double> values, const GridSpec& spec, double lambda);

/// Riemann sum of (|f|/lambda) log(e + |f|/lambda).
double llogl_functional(const SpatialField& f, double lambda);

// Binary field format: "THA1", m (u32), n (u32), L (f64), flag (u8: 0 real, 1 complex),
// then row-major f64 samples (interleaved re/im when complex). Little-endian.
void write_field_header(std::ostream& out, const GridSpec& spec, bool is_real);
GridSpec read_field_header(std::istream& in, bool& is_real);
void write_field_samples(std::ostream& out, const SpatialField& f);
std::vector<Complex> read_field_samples(std::istream& in, const GridSpec& spec, bool is_real);

void save_field(const std::string& path, const SpatialField& f);
SpatialField load_field(const std::string& path);

/// One CSV row per grid point: coordinates then value (re, im for complex fields).
void write_field_csv(std::ostream& out, const SpatialField& f);

}  // namespace tha
