#include "roughsk/sde.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <vector>

#include "roughsk/errors.hpp"
#include "roughsk/linalg.hpp"
#include "roughsk/rng.hpp"

namespace roughsk {

NoiseBundle NoiseBundle::zeros(Eigen::Index n, int d, double dt) {
    NoiseBundle b;
    b.dt = dt;
    b.increments = RowMat::Zero(n, d);
    return b;
}

NoiseBundle sample_noise(Eigen::Index n, int d, double dt, std::uint64_t seed) {
    if (n < 1 || d < 1 || !(dt > 0.0)) throw ConfigError("sample_noise: need n >= 1, d >= 1, dt > 0");
    NoiseBundle b;
    b.dt = dt;
    b.seed = seed;
    b.increments.resize(n, d);
    b.bridge.resize(n, 2 * d);
    const auto key = rng::stream_key(seed);
    const auto bridge_key = rng::stream_key(seed, 1);
    const double scale = std::sqrt(dt);
    for (Eigen::Index i = 0; i < n; ++i) {
        std::span<double> row(b.increments.row(i).data(), static_cast<std::size_t>(d));
        rng::normal_row(key, static_cast<std::uint64_t>(i), row);
        for (auto& v : row) v *= scale;
        rng::normal_row(bridge_key, static_cast<std::uint64_t>(i),
                        std::span<double>(b.bridge.row(i).data(), static_cast<std::size_t>(2 * d)));
    }
    return b;
}

namespace {

// (e^z - 1)/z and (e^z - 1 - z)/z^2 without cancellation near 0.
double phi1(double z) { return z == 0.0 ? 1.0 : std::expm1(z) / z; }

double phi2(double z) {
    if (std::abs(z) < 0.5) {
        double term = 0.5, sum = 0.5;
        for (int k = 1; k < 25; ++k) {
            term *= z / (k + 2);
            sum += term;
        }
        return sum;
    }
    return (std::expm1(z) - z) / (z * z);
}

SamplePath make_path(Eigen::Index n, int d, double dt) {
    SamplePath p;
    p.dt = dt;
    p.values = RowMat::Zero(n + 1, d);
    return p;
}

void guard(const Vec& state, double threshold, Eigen::Index step, const char* what) {
    const double norm = state.norm();
    if (!(norm <= threshold))
        throw BlowUp(std::string(what) + " left the ball of radius " + std::to_string(threshold) +
                     " at step " + std::to_string(step));
}

}  // namespace

namespace {

bool is_diagonal(const Mat& a) {
    for (Eigen::Index c = 0; c < a.cols(); ++c)
        for (Eigen::Index r = 0; r < a.rows(); ++r)
            if (r != c && a(r, c) != 0.0) return false;
    return true;
}

// Series helpers for the scalar bridge moments; k starts where the closed
// forms would cancel.
//   sum_{k>=1} (2^k - 1) z^{k-1} / (k+1)!   and   sum_{k>=2} (2^k - 2) z^{k-2} / (k+1)!
double cross_series(double z) {
    if (std::abs(z) >= 0.5) return (phi1(2.0 * z) - phi1(z)) / z;
    double sum = 0.0, zk = 1.0, fact = 2.0, pow2 = 2.0;
    for (int k = 1; k < 30; ++k) {
        sum += (pow2 - 1.0) * zk / fact;
        zk *= z;
        pow2 *= 2.0;
        fact *= k + 2;
    }
    return sum;
}

double var_series(double z) {
    if (std::abs(z) >= 0.5) return (phi1(2.0 * z) - 2.0 * phi1(z) + 1.0) / (z * z);
    double sum = 0.0, zk = 1.0, fact = 6.0, pow2 = 4.0;
    for (int k = 2; k < 31; ++k) {
        sum += (pow2 - 2.0) * zk / fact;
        zk *= z;
        pow2 *= 2.0;
        fact *= k + 2;
    }
    return sum;
}

}  // namespace

PhiMatrices phi_matrices(const Mat& a, double h) {
    const Eigen::Index d = a.rows();
    PhiMatrices out;
    if (is_diagonal(a)) {
        out.e = Mat::Zero(d, d);
        out.p1 = Mat::Zero(d, d);
        out.p2 = Mat::Zero(d, d);
        for (Eigen::Index j = 0; j < d; ++j) {
            const double z = a(j, j) * h;
            out.e(j, j) = std::exp(z);
            out.p1(j, j) = h * phi1(z);
            out.p2(j, j) = h * h * phi2(z);
        }
        return out;
    }
    // Van Loan block exponential.
    Mat c = Mat::Zero(3 * d, 3 * d);
    c.block(0, 0, d, d) = a * h;
    c.block(0, d, d, d).diagonal().setConstant(h);
    c.block(d, 2 * d, d, d).diagonal().setConstant(h);
    const Mat ec = expm(c);
    out.e = ec.block(0, 0, d, d);
    out.p1 = ec.block(0, d, d, d);
    out.p2 = ec.block(0, 2 * d, d, d);
    return out;
}

Mat bridge_factor(const Mat& a, double h) {
    const Eigen::Index d = a.rows();
    if (is_diagonal(a)) {
        // Coordinates decouple; 2x2 conditional covariance of (V_j, U_j) in closed form.
        Mat l = Mat::Zero(2 * d, 2 * d);
        for (Eigen::Index j = 0; j < d; ++j) {
            const double z = a(j, j) * h;
            const double p1 = h * phi1(z), p2 = h * h * phi2(z);
            const double vv = h * h * h * var_series(z) - p2 * p2 / h;
            const double vu = h * h * cross_series(z) - p2 * p1 / h;
            const double uu = h * (phi1(2.0 * z) - phi1(z) * phi1(z));
            const double l11 = std::sqrt(std::max(vv, 0.0));
            const double l21 = l11 > 0.0 ? vu / l11 : 0.0;
            l(j, j) = l11;
            l(d + j, j) = l21;
            l(d + j, d + j) = std::sqrt(std::max(uu - l21 * l21, 0.0));
        }
        return l;
    }
    // Z = (W, V, U) with dW = dW, dV = U dt, dU = A U dt + dW; Van Loan for
    // Cov(Z_h) = int_0^h e^{Gs} B B^T e^{G^T s} ds.
    const Eigen::Index n = 3 * d;
    Mat g = Mat::Zero(n, n);
    g.block(d, 2 * d, d, d).setIdentity();
    g.block(2 * d, 2 * d, d, d) = a;
    Mat b = Mat::Zero(n, d);
    b.topRows(d).setIdentity();
    b.bottomRows(d).setIdentity();
    Mat c = Mat::Zero(2 * n, 2 * n);
    c.block(0, 0, n, n) = -g * h;
    c.block(0, n, n, n) = b * b.transpose() * h;
    c.block(n, n, n, n) = g.transpose() * h;
    const Mat ec = expm(c);
    const Mat cov = ec.block(n, n, n, n).transpose() * ec.block(0, n, n, n);
    const Mat crw = cov.block(d, 0, 2 * d, d);
    Mat cond = cov.block(d, d, 2 * d, 2 * d) - crw * crw.transpose() / h;
    cond = 0.5 * (cond + cond.transpose()).eval();
    // The remainder is nearly singular for small h |A|; a clipped spectral
    // square root is more forgiving than Cholesky.
    Eigen::SelfAdjointEigenSolver<Mat> es(cond);
    const Vec root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal();
}

FastSlowPaths simulate_fast_slow(const ModelSpec& model, double epsilon, const NoiseBundle& noise,
                                 Scheme scheme, const SimulationLimits& limits) {
    const int d = model.dim;
    if (noise.dim() != d) throw GridMismatch("noise dimension does not match model");
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in (0, 1]");
    const double dt = noise.dt;
    const double eps2 = epsilon * epsilon;
    if (scheme == Scheme::EulerMaruyama) {
        const double limit = limits.stability_factor * eps2 / model.friction_norm_estimate();
        if (dt > limit)
            throw StabilityViolation("Euler-Maruyama needs dt <= " + std::to_string(limit) +
                                     ", got " + std::to_string(dt));
    } else if (dt > epsilon) {
        throw StabilityViolation("exponential Euler needs dt <= eps");
    }

    const Eigen::Index n = noise.steps();
    FastSlowPaths out{make_path(n, d, dt), make_path(n, d, dt)};
    Vec x = Vec::Zero(d), y = Vec::Zero(d), g(d), xn(d), yn(d);

    Mat cached_m, bridge_l;
    PhiMatrices phi;
    const bool with_bridge = scheme == Scheme::ExponentialEuler && noise.bridge.rows() == n;
    if (noise.bridge.size() != 0 && !with_bridge && scheme == Scheme::ExponentialEuler)
        throw GridMismatch("bridge normals do not match the noise increments");
    Vec bridge(2 * d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto dw = noise.increments.row(i).transpose();
        const Vec f = model.force_at(x);
        if (scheme == Scheme::EulerMaruyama) {
            const Mat m = model.friction_at(x);
            xn.noalias() = x + (dt / epsilon) * y;
            yn.noalias() = y - (dt / eps2) * (m * y) + (dt / epsilon) * f + dw / epsilon;
        } else {
            if (cached_m.size() == 0 || !model.constant_friction) {
                Mat m = model.friction_at(x);
                if (cached_m.size() == 0 || m != cached_m) {
                    phi = phi_matrices(-m / eps2, dt);
                    if (with_bridge) bridge_l = bridge_factor(-m / eps2, dt);
                    cached_m = std::move(m);
                }
            }
            g.noalias() = f + dw / dt;
            yn.noalias() = phi.e * y + phi.p1 * g / epsilon;
            xn.noalias() = x + phi.p1 * y / epsilon + phi.p2 * g / eps2;
            if (with_bridge) {
                bridge.noalias() = bridge_l * noise.bridge.row(i).transpose();
                xn += bridge.head(d) / eps2;
                yn += bridge.tail(d) / epsilon;
            }
        }
        x.swap(xn);
        y.swap(yn);
        guard(x, limits.blowup_threshold, i + 1, "X");
        guard(y, limits.blowup_threshold, i + 1, "Y");
        out.x.values.row(i + 1) = x.transpose();
        out.y.values.row(i + 1) = y.transpose();
    }
    return out;
}

SamplePath simulate_limit(const ModelSpec& model, const NoiseBundle& noise,
                          const SimulationLimits& limits) {
    const int d = model.dim;
    if (noise.dim() != d) throw GridMismatch("noise dimension does not match model");
    const double dt = noise.dt;
    const Eigen::Index n = noise.steps();
    SamplePath out = make_path(n, d, dt);
    Vec x = Vec::Zero(d);

    Mat minv;
    Vec drift(d);
    if (model.constant_friction) minv = model.friction_at(x).partialPivLu().inverse();
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto dw = noise.increments.row(i).transpose();
        if (!model.constant_friction) minv = model.friction_at(x).partialPivLu().inverse();
        drift.noalias() = minv * model.force_at(x);
        if (!model.constant_friction) drift += noise_induced_drift(model, x);
        x += drift * dt + minv * dw;
        guard(x, limits.blowup_threshold, i + 1, "X");
        out.values.row(i + 1) = x.transpose();
    }
    return out;
}

SamplePath simulate_frozen(const Mat& friction, const NoiseBundle& noise) {
    return simulate_frozen(friction, noise, Vec::Zero(friction.rows()));
}

SamplePath simulate_frozen(const Mat& friction, const NoiseBundle& noise, const Vec& y0) {
    const Eigen::Index d = friction.rows();
    if (noise.dim() != d || y0.size() != d) throw GridMismatch("frozen process dimension mismatch");
    const double dt = noise.dt;
    const Mat e = expm(-friction * dt);
    const Mat j = covariance_J(friction);
    Mat q = j - e * j * e.transpose();
    q = 0.5 * (q + q.transpose()).eval();
    Eigen::LLT<Mat> llt(q);
    if (llt.info() != Eigen::Success)
        throw SingularSystem("one-step covariance of the frozen process is not positive definite");
    const Mat l = Mat(llt.matrixL()) / std::sqrt(dt);

    const Eigen::Index n = noise.steps();
    SamplePath out = make_path(n, static_cast<int>(d), dt);
    Vec y = y0, yn(d);
    out.values.row(0) = y.transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
        yn.noalias() = e * y + l * noise.increments.row(i).transpose();
        y.swap(yn);
        out.values.row(i + 1) = y.transpose();
    }
    return out;
}

PhaseSpacePaths change_of_variables(const SamplePath& x, const SamplePath& y, double epsilon) {
    if (x.values.rows() != y.values.rows() || x.dt != y.dt || x.t0 != y.t0)
        throw GridMismatch("change_of_variables: paths do not share a grid");
    PhaseSpacePaths out{y, y};
    out.velocity.values /= epsilon;
    out.momentum.values *= epsilon;
    return out;
}

void write_path_csv(std::ostream& os, const SamplePath& x, const SamplePath* y) {
    if (y && (y->values.rows() != x.values.rows() || y->dim() != x.dim()))
        throw GridMismatch("write_path_csv: paths do not share a grid");
    os << 't';
    for (int j = 1; j <= x.dim(); ++j) os << ",x" << j;
    if (y)
        for (int j = 1; j <= y->dim(); ++j) os << ",y" << j;
    os << '\n';
    char buf[40];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
    };
    for (Eigen::Index i = 0; i < x.values.rows(); ++i) {
        put(x.time(i));
        for (int j = 0; j < x.dim(); ++j) {
            os << ',';
            put(x.values(i, j));
        }
        if (y)
            for (int j = 0; j < y->dim(); ++j) {
                os << ',';
                put(y->values(i, j));
            }
        os << '\n';
    }
}

}  // namespace roughsk
