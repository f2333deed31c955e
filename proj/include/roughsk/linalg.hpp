#pragma once

#include "roughsk/models.hpp"
#include "roughsk/types.hpp"

namespace roughsk {

/// Which Lyapunov equation to solve.
///   MJ_JMt:  M A + A M^T = B   (covariance J of the frozen OU process)
///   MtA_AM:  M^T A + A M = B   (quadratic part of the Poisson corrector)
enum class LyapunovForm { MJ_JMt, MtA_AM };

struct LyapunovSolution {
    Mat matrix;
    double residual_norm = 0.0;  ///< Frobenius norm of the equation residual
};

/// Solves the Lyapunov equation through its d^2 x d^2 Kronecker form with
/// partially pivoted LU. Unique solvability needs the symmetric part of M to be
/// positive definite; a numerically singular system raises SingularSystem.
/// Symmetric B yields an exactly symmetric result.
LyapunovSolution solve_lyapunov(const Mat& m, const Mat& b, LyapunovForm form);

/// Residual of `a` in the chosen Lyapunov equation.
Mat lyapunov_residual(const Mat& m, const Mat& a, const Mat& b, LyapunovForm form);

/// J with M J + J M^T = id.
Mat covariance_J(const Mat& m);

/// Matrix exponential (scaling and squaring Pade, via Eigen).
Mat expm(const Mat& a);

/// S_j(x) = sum_{k,l} (d_{x_l} M^{-1})_{jk}(x) J_{kl}(x).
Vec noise_induced_drift(const ModelSpec& model, const Vec& x);

/// 1/2 (J M^{-T} - M^{-1} J) at x: the density of the area correction carried
/// by the limiting rough path.
Mat area_correction_integrand(const ModelSpec& model, const Vec& x);
/// Same quantity from a friction matrix value.
Mat area_correction_integrand(const Mat& m);

}  // namespace roughsk
