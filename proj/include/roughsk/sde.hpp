#pragma once

#include <cstdint>
#include <iosfwd>

#include "roughsk/models.hpp"
#include "roughsk/types.hpp"

namespace roughsk {

/// Brownian increments dW_i ~ N(0, dt id) on a uniform grid, one row per step.
struct NoiseBundle {
    double dt = 0.0;
    std::uint64_t seed = 0;
    RowMat increments;  ///< n x d
    /// n x 2d standard normals for the part of the within-step noise integrals
    /// not determined by the increments. Empty: that part is dropped.
    RowMat bridge;

    Eigen::Index steps() const { return increments.rows(); }
    int dim() const { return static_cast<int>(increments.cols()); }
    double horizon() const { return dt * static_cast<double>(steps()); }

    static NoiseBundle zeros(Eigen::Index n, int d, double dt);
};

/// Deterministic in `seed`; row i depends only on (seed, i). Increments use
/// the stream rng::stream_key(seed), bridge normals rng::stream_key(seed, 1),
/// so harness code passes rng::stream_key(seed, e, k) to obtain independent
/// per-path bundles.
NoiseBundle sample_noise(Eigen::Index n, int d, double dt, std::uint64_t seed);

/// Trajectory on t0 + i dt, i = 0..n.
struct SamplePath {
    double t0 = 0.0;
    double dt = 0.0;
    RowMat values;  ///< (n+1) x d

    Eigen::Index steps() const { return values.rows() - 1; }
    int dim() const { return static_cast<int>(values.cols()); }
    double time(Eigen::Index i) const { return t0 + dt * static_cast<double>(i); }
    double horizon() const { return dt * static_cast<double>(steps()); }
    auto point(Eigen::Index i) const { return values.row(i).transpose(); }
};

enum class Scheme { EulerMaruyama, ExponentialEuler };

struct SimulationLimits {
    double blowup_threshold = 1e8;
    /// Euler-Maruyama needs dt <= stability_factor * eps^2 / |M|.
    double stability_factor = 0.1;
};

struct FastSlowPaths {
    SamplePath x;
    SamplePath y;
};

/// Integrates the rescaled Langevin system
///   dX = Y/eps dt,  dY = -M(X) Y/eps^2 dt + F(X)/eps dt + dW/eps,  X_0 = Y_0 = 0.
///
/// EulerMaruyama:
///   X+ = X + dt/eps Y,  Y+ = Y - dt/eps^2 M Y + dt/eps F + dW/eps.
/// ExponentialEuler freezes M and F at the left node and solves the resulting
/// linear SDE exactly in law. With A = -M/eps^2, E = e^{A dt},
/// P1 = int_0^dt e^{As} ds, P2 = int_0^dt (dt - s) e^{As} ds and g = F + dW/dt:
///   Y+ = E Y + P1 g / eps + b_Y / eps,  X+ = X + P1 Y / eps + P2 g / eps^2 + b_X / eps^2,
/// where P1 dW/dt and P2 dW/dt are the conditional means of the stochastic
/// integrals given dW, and (b_X, b_Y) is the independent Gaussian remainder
/// drawn from noise.bridge. Without the remainder the stationary law of Y is
/// off by O(dt/eps^2).
FastSlowPaths simulate_fast_slow(const ModelSpec& model, double epsilon, const NoiseBundle& noise,
                                 Scheme scheme, const SimulationLimits& limits = {});

/// Euler-Maruyama (Ito) for dX = [S(X) + M^{-1}F(X)] dt + M^{-1}(X) dW, X_0 = 0.
SamplePath simulate_limit(const ModelSpec& model, const NoiseBundle& noise,
                          const SimulationLimits& limits = {});

/// Exact OU stepping for dY = -M Y dt + dW at a frozen friction value:
/// Y+ = e^{-M dt} Y + L dW / sqrt(dt), L L^T = J - e^{-M dt} J e^{-M^T dt}.
SamplePath simulate_frozen(const Mat& friction, const NoiseBundle& noise);
SamplePath simulate_frozen(const Mat& friction, const NoiseBundle& noise, const Vec& y0);

struct PhaseSpacePaths {
    SamplePath velocity;  ///< V = Y / eps
    SamplePath momentum;  ///< P = eps Y
};

PhaseSpacePaths change_of_variables(const SamplePath& x, const SamplePath& y, double epsilon);

/// Exact step matrices for the linear system dz = (A z + g) dt on a step of
/// length h: E = e^{Ah}, P1 = int_0^h e^{As} ds, P2 = int_0^h (h - s) e^{As} ds.
struct PhiMatrices {
    Mat e;
    Mat p1;
    Mat p2;
};
PhiMatrices phi_matrices(const Mat& a, double h);

/// Lower factor L (2d x 2d) of the covariance of
///   (int_0^h Q(h-s) dW_s, int_0^h e^{A(h-s)} dW_s),  Q(t) = int_0^t e^{Ar} dr,
/// conditional on W_h. Rows 0..d-1 belong to the first integral.
Mat bridge_factor(const Mat& a, double h);

/// CSV with header t,x1..xd[,y1..yd] and 17 significant digits.
void write_path_csv(std::ostream& os, const SamplePath& x, const SamplePath* y = nullptr);

}  // namespace roughsk
