#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tha/grid.hpp"
#include "tha/kernels.hpp"

namespace tha {

// ---------------------------------------------------------------------------
// Continuous tubes T(x, r)
// ---------------------------------------------------------------------------

/// Shape of T(0, r): a product of balls, or a parallelogram sheared along the
/// first or second block. Ties resolve with priority Rect > ParaFirst > ParaSecond.
enum class Regime { Rect, ParaFirst, ParaSecond };

/// Rect iff r1, r2 >= r3; else ParaFirst iff r1, r3 >= r2; else ParaSecond.
/// Zero radii are allowed (degenerate cross-sections of partial cones).
Regime classify_regime(const std::array<double, 3>& r);
const char* regime_name(Regime g);
/// The two radii that define the shape: (r1,r2), (r1,r3) or (r2,r3).
std::array<double, 2> defining_pair(const std::array<double, 3>& r);

struct TubeSpec {
  std::vector<double> center;  ///< length 2m
  std::array<double, 3> radii{1.0, 1.0, 1.0};

  int m() const { return static_cast<int>(center.size() / 2); }
  Regime regime() const { return classify_regime(radii); }
};

TubeSpec make_tube(std::vector<double> center, const std::array<double, 3>& radii);

bool tube_contains(const TubeSpec& tube, std::span<const double> p);

/// Volume of the unit ball in R^m (v_1 = 2).
double unit_ball_volume(int m);
/// Exact Lebesgue volume v_m^2 (r_a r_b)^m of the membership region.
double tube_volume(const TubeSpec& tube);

/// pi(x1, x2, x3) = (x1 + x3, x2 + x3); q has length 3m.
std::vector<double> pi_project(std::span<const double> q, int m);

/// True when the offset d (length 2m) lies in pi(B1(r1) x B2(r2) x B3(r3)),
/// i.e. some u with |u| < r3 has |d1 - u| < r1 and |d2 - u| < r2.
bool in_projected_ball(std::span<const double> d, const std::array<double, 3>& r);

struct ContainmentReport {
  std::size_t inner_samples = 0;     ///< points drawn from T(x, inner_factor r)
  std::size_t inner_violations = 0;  ///< of those, not in pi(B~(x, r))
  std::size_t outer_samples = 0;     ///< projected product-ball points
  std::size_t outer_violations = 0;  ///< of those, not in T(x, outer_factor r)
};

/// Sampling check of T(x, r/2) ⊂ pi(B~(x, r)) ⊂ T(x, 2r). Violations are counted, not thrown.
ContainmentReport containment_check(std::span<const double> x, const std::array<double, 3>& r,
                                    std::size_t samples, std::uint64_t seed,
                                    double inner_factor = 0.5, double outer_factor = 2.0);

// ---------------------------------------------------------------------------
// Rasterized tubes on the periodic grid
// ---------------------------------------------------------------------------
//
// A rasterized ball of radius rho is {k in Z^m : |k| h < rho} ∪ {0}; tubes are built from
// two balls through the shear of their regime. Offsets wrap with multiplicity, which is the
// periodization of the continuous tube indicator.

/// Number of lattice offsets in the rasterized tube.
double tube_cell_count(const GridSpec& spec, const std::array<double, 3>& radii);

/// Transform of the normalized tube indicator on the frequency lattice (FFT ordering).
/// Multiplying a spectrum by it averages the field over T(x, r).
std::vector<double> tube_average_multiplier(const GridSpec& spec, const std::array<double, 3>& radii);

/// Average of `values` over T(x, r) at every grid point.
std::vector<double> tube_average(std::span<const double> values, const GridSpec& spec,
                                 const std::array<double, 3>& radii);

/// max over y in T(x, r) of values(y), at every grid point.
std::vector<double> tube_max_filter(std::span<const double> values, const GridSpec& spec,
                                    const std::array<double, 3>& radii);

// ---------------------------------------------------------------------------
// Dyadic tubes
// ---------------------------------------------------------------------------

enum class DyadicType { I, II, III, IV, V };
const char* dyadic_type_name(DyadicType t);
DyadicType parse_dyadic_type(const std::string& s);

struct ScaleClass {
  DyadicType type = DyadicType::I;
  int s1 = 0;  ///< exponent of the first defining interval
  int s2 = 0;  ///< exponent of the second defining interval
  bool operator==(const ScaleClass&) const = default;
};

/// Type and defining scales of the dyadic rectangles of scale j in Z^3.
ScaleClass classify_scale(const std::array<int, 3>& j);

/// True when (s1, s2) satisfies the scale-order constraint of the type.
bool type_admits(DyadicType t, int s1, int s2);

/// I x J (type I), I x_t J (types II/III) or I _t x J (types IV/V) translated by a lattice
/// element. I has side 2^{j1}, J side 2^{j2}; `a`, `b` are the per-component interval
/// indices, so n1 = a 2^{j1}, n2 = b 2^{j2}.
struct DyadicTube {
  DyadicType type = DyadicType::I;
  int j1 = 0;
  int j2 = 0;
  std::vector<long> a;
  std::vector<long> b;

  int m() const { return static_cast<int>(a.size()); }
  double measure() const;
  /// The translating lattice element: (n1, n2), (n1+n2, n2) or (n1, n1+n2).
  std::vector<double> lattice_offset() const;
  bool contains(std::span<const double> p) const;
  bool operator==(const DyadicTube&) const = default;
};

/// Every dyadic tube of scale j that meets the periodic window of `spec`; they tile it.
/// Throws DomainError when a defining interval is finer than a cell or wider than the box.
std::vector<DyadicTube> enumerate_scale(const std::array<int, 3>& j, const GridSpec& spec);

/// Number of tubes in `tubes` covering each grid cell (by lower-left corner).
std::vector<int> coverage_count(std::span<const DyadicTube> tubes, const GridSpec& spec);

/// Grid-aligned union of finest-scale cells.
struct OpenSetMask {
  GridSpec spec;
  std::vector<std::uint8_t> cells;

  static OpenSetMask empty(const GridSpec& spec);
  static OpenSetMask from_predicate(const GridSpec& spec, const std::vector<double>& values,
                                    double threshold);
  std::size_t count() const;
  double measure() const;
  bool is_empty() const { return count() == 0; }
  bool subset_of(const OpenSetMask& other) const;
  void add(const DyadicTube& tube);
  bool contains(const DyadicTube& tube) const;
  std::vector<double> indicator() const;
};

/// Tubes of `type` contained in the mask that cannot be doubled along `axis` (1: the first
/// interval I, 2: the second interval J) and stay inside. Empty mask gives an empty list.
std::vector<DyadicTube> maximal_tubes(const OpenSetMask& omega, DyadicType type, int axis);

/// Enlarge interval `which` (1: I, 2: J) of R to its largest dyadic ancestor for which the
/// enlarged tube stays inside `halo`. Returns R unchanged when no ancestor fits.
DyadicTube journe_enlarge(const DyadicTube& R, const OpenSetMask& halo, int which = 1);

struct CoveringSum {
  double sum = 0.0;
  double ratio = 0.0;  ///< sum / |Omega|
  std::size_t tubes = 0;
};

/// sum over R in m_axis(Omega) of |R| (l / l_hat)^kappa, where the interval not used for
/// maximality is enlarged inside `halo` (axis 2 enlarges I, axis 1 enlarges J).
CoveringSum covering_sum(const OpenSetMask& omega, const OpenSetMask& halo, DyadicType type,
                         double kappa, int axis = 2);

// Masks: PBM (P1) with rows = block-1 index and columns = block-2 index, plus a JSON
// sidecar `<path>.json` holding m, n, L.
void save_mask(const std::string& path, const OpenSetMask& mask);
OpenSetMask load_mask(const std::string& path);

/// CSV rows: type, j1, j2, lattice offset components.
void write_tubes_csv(std::ostream& out, std::span<const DyadicTube> tubes);

}  // namespace tha
