#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "roughsk/models.hpp"
#include "roughsk/sde.hpp"
#include "roughsk/types.hpp"

namespace roughsk {

enum class LiftConvention { Ito, Stratonovich, LimitLift };

/// Level-1 path on a (coarse) grid plus the level-2 increment of every grid
/// step. Any other level-2 increment follows from Chen's relation.
struct GridRoughPath {
    SamplePath base;
    std::vector<double> step_areas;  ///< n blocks of d*d, row-major per block
    LiftConvention convention = LiftConvention::Ito;

    Eigen::Index steps() const { return base.steps(); }
    int dim() const { return base.dim(); }
    Mat step_area(Eigen::Index i) const;
};

/// Every `factor`-th point of a path.
SamplePath coarsen(const SamplePath& path, int refinement);

/// Level-2 increments over each coarse step of `refinement` fine steps.
///   Ito:          sum_i (X_{u_i} - X_s) (x) dX_i
///   Stratonovich: sum_i ((X_{u_i} + X_{u_{i+1}})/2 - X_s) (x) dX_i
/// With refinement 1 the Ito areas vanish identically, which is why lifts of
/// simulated paths are taken on a coarsened grid.
GridRoughPath ito_lift(const SamplePath& fine, int refinement = 1);
GridRoughPath stratonovich_lift(const SamplePath& fine, int refinement = 1);

/// Stratonovich lift plus the left-point quadrature of
/// 1/2 (J M^{-T} - M^{-1} J)(X_u) du along the fine path.
GridRoughPath limit_lift(const SamplePath& fine, const ModelSpec& model, int refinement = 1);

/// Level-2 increment between coarse nodes i < j, folded left to right with
/// Chen's relation.
Mat chen_area(const GridRoughPath& rp, Eigen::Index i, Eigen::Index j);

/// Grids with more steps than this are scanned on dyadic gaps only.
inline constexpr Eigen::Index kExhaustivePairLimit = 2048;

/// max_{s<t} |X_{s,t}| / |t-s|^alpha over grid pairs. Above
/// kExhaustivePairLimit steps only gaps 1, 2, 4, ... are scanned, which
/// bounds the exhaustive value from below.
double holder_norm(const SamplePath& path, double alpha);

/// max_{s<t} |XX_{s,t}| / |t-s|^{2 alpha} (Frobenius norm), same pair policy.
double level2_norm(const GridRoughPath& rp, double alpha);

/// Level-1 and level-2 parts of the inhomogeneous distance.
struct RoughDistance {
    double level1 = 0.0;
    double level2 = 0.0;
    double total() const { return level1 + level2; }
};
RoughDistance rough_distance(const GridRoughPath& a, const GridRoughPath& b, double alpha);

/// rho_alpha = ||X - Y||_alpha + ||XX - YY||_{2 alpha} on a shared grid.
/// Meaningful as a rough-path metric for alpha in (1/3, 1/2); not enforced.
double rho_alpha(const GridRoughPath& a, const GridRoughPath& b, double alpha);

/// CSV `i,j,a11,a12,...,add` of Chen-reconstructed areas for all coarse
/// pairs with j - i <= max_gap (0: no limit).
void write_lift_csv(std::ostream& os, const GridRoughPath& rp, Eigen::Index max_gap = 0);

}  // namespace roughsk
