#include "roughsk/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>

#include "roughsk/errors.hpp"

namespace roughsk {

namespace {

// Reciprocal condition below which the Kronecker system is declared singular.
constexpr double kMinRcond = 1e-13;

}  // namespace

Mat lyapunov_residual(const Mat& m, const Mat& a, const Mat& b, LyapunovForm form) {
    if (form == LyapunovForm::MJ_JMt) return m * a + a * m.transpose() - b;
    return m.transpose() * a + a * m - b;
}

LyapunovSolution solve_lyapunov(const Mat& m, const Mat& b, LyapunovForm form) {
    const Eigen::Index d = m.rows();
    if (m.cols() != d || b.rows() != d || b.cols() != d)
        throw GridMismatch("solve_lyapunov: M and B must be square of equal size");
    if (!m.allFinite() || !b.allFinite()) throw NonFiniteField("solve_lyapunov: non-finite input");

    // Column-major vec: vec(P A + A Q) = (I (x) P + Q^T (x) I) vec(A).
    // MJ_JMt: P = M, Q = M^T.  MtA_AM: P = M^T, Q = M.
    const Mat p = form == LyapunovForm::MJ_JMt ? m : Mat(m.transpose());
    const Mat qt = form == LyapunovForm::MJ_JMt ? m : Mat(m.transpose());
    const Eigen::Index n = d * d;
    Mat k = Mat::Zero(n, n);
    for (Eigen::Index c = 0; c < d; ++c) {
        k.block(c * d, c * d, d, d) += p;
        for (Eigen::Index r = 0; r < d; ++r) {
            const double q = qt(c, r);
            if (q != 0.0) k.block(c * d, r * d, d, d).diagonal().array() += q;
        }
    }
    Eigen::PartialPivLU<Mat> lu(k);
    // Eigen's estimate can miss an exactly zero pivot, so look at the pivots too.
    const Vec pivots = lu.matrixLU().diagonal().cwiseAbs();
    const double rcond = std::min(lu.rcond(), pivots.minCoeff() / pivots.maxCoeff());
    if (!(rcond > kMinRcond))
        throw SingularSystem("Lyapunov system is numerically singular (rcond " +
                             std::to_string(rcond) + ")");
    const Vec rhs = Eigen::Map<const Vec>(b.data(), n);
    Vec sol = lu.solve(rhs);
    Mat a = Eigen::Map<Mat>(sol.data(), d, d);
    if (b.isApprox(b.transpose(), 0.0)) a = 0.5 * (a + a.transpose()).eval();

    LyapunovSolution out;
    out.residual_norm = lyapunov_residual(m, a, b, form).norm();
    out.matrix = std::move(a);
    return out;
}

Mat covariance_J(const Mat& m) {
    return solve_lyapunov(m, Mat::Identity(m.rows(), m.cols()), LyapunovForm::MJ_JMt).matrix;
}

Mat expm(const Mat& a) { return a.exp(); }

Vec noise_induced_drift(const ModelSpec& model, const Vec& x) {
    const int d = model.dim;
    if (model.constant_friction) return Vec::Zero(d);
    const Mat j = covariance_J(model.friction_at(x));
    const auto dminv = model.inverse_friction_gradient(x);
    Vec s = Vec::Zero(d);
    for (int l = 0; l < d; ++l) s.noalias() += dminv[l] * j.col(l);
    return s;
}

Mat area_correction_integrand(const Mat& m) {
    const Mat j = covariance_J(m);
    const Mat minv = m.partialPivLu().inverse();
    return 0.5 * (j * minv.transpose() - minv * j);
}

Mat area_correction_integrand(const ModelSpec& model, const Vec& x) {
    return area_correction_integrand(model.friction_at(x));
}

}  // namespace roughsk
