#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tha/grid.hpp"

namespace tha {

/// Scale point r = (r1, r2, r3). Blocks are numbered 1..3.
///
/// A block marked `boundary` stands for the limit r_j -> 0+: its Poisson factor is the
/// identity and its radius reads as zero.
struct ScaleTriple {
  std::array<double, 3> r{1.0, 1.0, 1.0};
  std::array<bool, 3> boundary{false, false, false};

  static ScaleTriple make(double r1, double r2, double r3);
  /// All three blocks at the boundary (multiplier identically one).
  static ScaleTriple identity();

  ScaleTriple with_boundary(int block) const;
  ScaleTriple with_radius(int block, double value) const;
  bool is_boundary(int block) const { return boundary[static_cast<std::size_t>(block - 1)]; }
  /// r_j, or 0 for a boundary block.
  double radius(int block) const;
  std::array<double, 3> radii() const { return {radius(1), radius(2), radius(3)}; }
};

/// Geometric ladder r_min * ratio^k, k = 0..count-1, discretizing dr/r with weight ln(ratio).
struct ScaleLadder {
  double r_min = 1.0;
  double ratio = 2.0;
  int count = 1;

  static ScaleLadder geometric(double r_min, double decades, int points_per_decade);
  std::vector<double> values() const;
  double log_step() const;
  double r_max() const;
};

/// One ladder per block.
struct ScaleGrid {
  std::array<ScaleLadder, 3> axes;

  static ScaleGrid uniform(const ScaleLadder& ladder);
  static ScaleGrid geometric(double r_min, double decades, int points_per_decade);
  const ScaleLadder& axis(int block) const { return axes[static_cast<std::size_t>(block - 1)]; }
  /// Same ladders continued with their own ratios until every axis reaches `r_top`.
  ScaleGrid extended_to(double r_top) const;
  /// Throws DomainError when r_min is below `factor` grid spacings.
  void require_resolved(const GridSpec& spec, double factor) const;
};

/// Samples of U_f(., r) together with the scale they were taken at.
struct ExtensionField {
  ScaleTriple scale;
  SpatialField field;
};

/// Poisson kernel normalization in R^m, c_m = Gamma((m+1)/2) / pi^{(m+1)/2} (c_1 = 1/pi).
double poisson_constant(int m);
/// c_m a / (a^2 + |v|^2)^{(m+1)/2}.
double poisson_kernel_1d(int m, double a, std::span<const double> v);
/// Period-L sum of the one-dimensional Poisson kernel, in closed form.
double periodized_poisson_1d(double a, double x, double period);

/// Periodic twisted Poisson kernel sampled on the grid by adaptive quadrature of the fiber
/// integral int P_{r1}(x1-u) P_{r2}(x2-u) P_{r3}(u) du over one period. m = 1 only.
SpatialField twisted_kernel_physical(const GridSpec& spec, const ScaleTriple& r);

/// exp(-r1|xi1| - r2|xi2| - r3|xi1+xi2|); boundary blocks contribute 1.
double twisted_multiplier(std::span<const double> xi1, std::span<const double> xi2,
                          const ScaleTriple& r);

/// Multiplier evaluated on the frequency lattice of `spec` (FFT ordering).
std::vector<double> twisted_multiplier_field(const GridSpec& spec, const ScaleTriple& r);

ExtensionField extend(const SpatialField& f, const ScaleTriple& r);

enum class BlockAction { None, Spatial, Scale };

struct BlockDerivative {
  BlockAction action = BlockAction::None;
  int component = 1;  ///< spatial component 1..m when action == Spatial

  static BlockDerivative none() { return {}; }
  static BlockDerivative spatial(int k) { return {BlockAction::Spatial, k}; }
  static BlockDerivative scale() { return {BlockAction::Scale, 1}; }
};

/// One action per block. Block 3's spatial action is the twisted direction d/dx1 + d/dx2.
struct BlockDerivativeSpec {
  std::array<BlockDerivative, 3> blocks{};
  /// Permit d/dr_j on a boundary block, read as the analytic limit r_j -> 0+.
  bool boundary_limit = false;
};

SpatialField block_derivative_field(const SpatialField& f, const ScaleTriple& r,
                                    const BlockDerivativeSpec& d);

/// Sum over all one-action-per-listed-block combinations of |derivative field|^2.
SpatialField mixed_gradient_sq(const SpatialField& f, const ScaleTriple& r,
                               std::span<const int> blocks);

/// L2 norm of spectral spatial Laplacian (block j) of U_f plus the centered second
/// difference in r_j. Vanishes to O(dr^2).
double harmonicity_residual(const SpatialField& f, const ScaleTriple& r, int block, double dr);

/// L2 norm of the discrete Delta_j(U_f^2) minus 2 |nabla_j U_f|^2.
double square_identity_residual(const SpatialField& f, const ScaleTriple& r, int block, double dr);

// Extension fields use the grid binary format with a scale header
// (three f64 radii, three u8 boundary flags) between the grid header and the samples.
void save_extension(const std::string& path, const ExtensionField& u);
ExtensionField load_extension(const std::string& path);

}  // namespace tha
