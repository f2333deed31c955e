#pragma once

// Reference computations used only by the tests. They deliberately avoid
// the library's own kernels (no expm, no Kronecker solver).

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <functional>
#include <random>

#include "roughsk/types.hpp"

namespace oracle {

using roughsk::Mat;
using roughsk::Vec;

// Random matrix whose symmetric part has all eigenvalues >= floor.
inline Mat random_stable(int d, double floor, std::mt19937_64& gen) {
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> u(0.0, 2.0);
    Mat g(d, d), k(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            g(i, j) = n01(gen);
            k(i, j) = n01(gen);
        }
    Eigen::HouseholderQR<Mat> qr(g);
    const Mat q = qr.householderQ();
    Vec lam(d);
    for (int i = 0; i < d; ++i) lam(i) = floor + u(gen);
    const Mat sym = q * lam.asDiagonal() * q.transpose();
    return sym + 0.5 * (k - k.transpose());
}

// e^{tA} through a complex eigendecomposition, valid for diagonalisable A.
class EigenExp {
public:
    explicit EigenExp(const Mat& a) : es_(a) { vinv_ = es_.eigenvectors().inverse(); }
    Mat operator()(double t) const {
        const Eigen::VectorXcd ex = (es_.eigenvalues() * t).array().exp();
        return (es_.eigenvectors() * ex.asDiagonal() * vinv_).real();
    }

private:
    Eigen::EigenSolver<Mat> es_;
    Eigen::MatrixXcd vinv_;
};

// Adaptive Gauss-Kronrod (7/15) for matrix-valued integrands, using boost's
// node and weight tables.
inline Mat gk15(const std::function<Mat(double)>& f, double a, double b, Mat* err) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    const auto& x = GK::abscissa();
    const auto& wk = GK::weights();
    const auto& wg = boost::math::quadrature::gauss<double, 7>::weights();
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    Mat fc = f(c);
    Mat kron = wk[0] * fc;
    Mat gauss = wg[0] * fc;
    for (std::size_t i = 1; i < x.size(); ++i) {
        const Mat s = f(c - h * x[i]) + f(c + h * x[i]);
        kron += wk[i] * s;
        if (i % 2 == 0) gauss += wg[i / 2] * s;
    }
    *err = (kron - gauss) * h;
    return kron * h;
}

inline Mat integrate(const std::function<Mat(double)>& f, double a, double b, double tol, int depth = 0) {
    Mat err;
    const Mat whole = gk15(f, a, b, &err);
    if (err.norm() <= tol || depth > 40) return whole;
    const double mid = 0.5 * (a + b);
    return integrate(f, a, mid, 0.5 * tol, depth + 1) + integrate(f, mid, b, 0.5 * tol, depth + 1);
}

// A = int_0^horizon e^{-Mt} B e^{-M^T t} dt.
inline Mat lyapunov_by_quadrature(const Mat& m, const Mat& b, double horizon, double tol) {
    const EigenExp em(-m);
    return integrate(
        [&](double t) {
            const Mat e = em(t);
            return Mat(e * b * e.transpose());
        },
        0.0, horizon, tol);
}

}  // namespace oracle
