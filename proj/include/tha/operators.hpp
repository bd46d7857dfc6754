#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tha/geometry.hpp"
#include "tha/grid.hpp"
#include "tha/kernels.hpp"

namespace tha {

/// Worker threads for per-scale loops (0 = hardware concurrency). Results do not depend on it.
void set_thread_count(int threads);
int thread_count();

/// Aperture-beta cone over a scale ladder. Inactive blocks sit at the boundary (radius 0).
struct ConeSpec {
  double beta = 1.0;
  ScaleGrid scales;
  std::array<bool, 3> active{true, true, true};

  static ConeSpec full(const ScaleGrid& scales, double beta = 1.0);
  static ConeSpec partial(const ScaleGrid& scales, std::span<const int> blocks, double beta = 1.0);

  std::vector<int> active_blocks() const;
  bool is_full() const { return active[0] && active[1] && active[2]; }
  /// Throws ConfigError on beta < 1 or an empty active set.
  void validate() const;
  /// Ladder of block j: the scale ladder when active, {0} otherwise.
  std::vector<double> ladder(int block) const;
};

struct OperatorOutput {
  std::string op;
  ConeSpec cone;
  SpatialField field;
  std::vector<std::string> warnings;
};

/// sup over ladder triples of the tube average of |f|; `only` restricts to one regime.
OperatorOutput tube_maximal(const SpatialField& f, const ScaleGrid& scales,
                            std::optional<Regime> only = std::nullopt);

/// sup over ladder r and y in T(x, beta r) of |U_f(y, r)|.
OperatorOutput nontangential_max(const SpatialField& f, const ConeSpec& cone);

/// Direct: one tube-averaged gradient field per ladder triple. Bilinear: sums over pairs of
/// nonzero modes with the scale sums in closed prefix form (cheap for sparse spectra).
enum class AreaMethod { Auto, Direct, Bilinear };

/// Twisted area function over the full cone (all three blocks).
OperatorOutput area_function(const SpatialField& f, const ConeSpec& cone,
                             AreaMethod method = AreaMethod::Auto);

/// Area function over a proper nonempty subset of blocks; the rest sit at the boundary.
OperatorOutput partial_area(const SpatialField& f, const ConeSpec& cone,
                            AreaMethod method = AreaMethod::Auto);

/// Tube halo {M_tube(chi_Omega) > 1/2}.
OpenSetMask tube_halo(const OpenSetMask& omega, const ScaleGrid& scales);

// ---------------------------------------------------------------------------
// Empirical checks
// ---------------------------------------------------------------------------

struct GoodLambdaRow {
  double lambda = 0.0;
  double lhs = 0.0;    ///< |{S > lambda}|
  double term1 = 0.0;  ///< |{U* > lambda}|
  double term2 = 0.0;  ///< lambda^-2 int_{U* <= lambda} (U*)^2
  double c = 0.0;      ///< lhs / (term1 + term2); 0 when lhs = 0
};

struct GoodLambdaReport {
  std::vector<GoodLambdaRow> rows;
  double max_c = 0.0;
};

/// Rows from precomputed S and U* samples.
GoodLambdaReport good_lambda_rows(std::span<const double> area, std::span<const double> ustar,
                                  const GridSpec& spec, std::span<const double> lambdas);

GoodLambdaReport good_lambda_sweep(const SpatialField& f, const ScaleGrid& scales, double beta,
                                   std::span<const double> lambdas,
                                   AreaMethod method = AreaMethod::Auto);

/// Smallest C0 with U_h* <= C0 M_tube(h) at every grid point (0/0 counts as 0).
double domination_constant(std::span<const double> ustar, std::span<const double> mtube);

struct SeparationReport {
  double c0 = 0.0;              ///< measured on h = chi of the bad set, M_tube up to the box size
  double good_measure = 0.0;    ///< |E|
  double proxy_measure = 0.0;   ///< |A|
  std::size_t inner_points = 0;
  std::size_t inner_violations = 0;  ///< U_g <= 9/10 on W
  double inner_min = 1.0;
  std::size_t outer_points = 0;
  std::size_t outer_violations = 0;  ///< U_g >= 9/10 off W~
  double c1 = 0.0;                   ///< max U_g off W~
};

SeparationReport separation_check(const SpatialField& f, double lambda, double beta,
                                  const ScaleGrid& scales);

struct DyadicDominationReport {
  double c = 0.0;             ///< sup of the ratio over the sweep
  double ratio_at_zero = 0.0;
  std::size_t samples = 0;
};

/// Poisson kernel against sum_nu 2^-nu chi_B(0, 2^nu a)/|B(0, 2^nu a)| over |v|/a in {0} ∪ [2^-8, 2^16].
DyadicDominationReport dyadic_domination_check(int m, double a, std::size_t samples);
/// Right-hand side of the dyadic comparison at |v| (closed-form geometric tail).
double dyadic_ball_sum(int m, double a, double v);

enum class MaximalOp { Tube, NonTangential };

/// max over the suite of ||op f||_p / ||f||_p.
double lp_operator_norm(MaximalOp op, double p, std::span<const SpatialField> suite, const ConeSpec& cone);

/// 64 sum_ladder w_r f * Q_r * Q_r with per-block multiplier (r_j a_j e^{-r_j a_j})^2.
SpatialField reproduce(const SpatialField& f, const ScaleGrid& scales);

/// Relative L2 error of reproduce(f). Mass on the degenerate frequency sets is a
/// PreconditionError unless `allow_degenerate`.
double reproducing_residual(const SpatialField& f, const ScaleGrid& scales, bool allow_degenerate = false);

/// Relative L2 mass of f on {xi1 = 0} ∪ {xi2 = 0} ∪ {xi1 + xi2 = 0}.
double degenerate_mass(const SpatialField& f);

struct LlogLRow {
  double lambda = 0.0;
  double lhs = 0.0;  ///< |{S > lambda}|
  double rhs = 0.0;  ///< int |f|/lambda log(e + |f|/lambda)
  double ratio = 0.0;
};

struct LlogLReport {
  std::vector<LlogLRow> rows;
  double max_ratio = 0.0;
};

LlogLReport llogl_rows(std::span<const double> area, const SpatialField& f, std::span<const double> lambdas);
LlogLReport llogl_endpoint_sweep(const SpatialField& f, const ScaleGrid& scales,
                                 std::span<const double> lambdas, AreaMethod method = AreaMethod::Auto);

}  // namespace tha
