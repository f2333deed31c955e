#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "roughsk/models.hpp"
#include "roughsk/sde.hpp"
#include "roughsk/types.hpp"

namespace roughsk {

/// Average of f(x, .) under the invariant law N(0, J(x)) of the frozen
/// process: x_i g(x) J_kl(x) (XYY) or g(x) J_kl(x) (YY).
double fbar(const ScalarObservableSpec& obs, const ModelSpec& model, const Vec& x);

/// Explicit solution of -L^x phi = f - fbar:
///   phi(x, y) = c(x) (y^T A(x) y - Tr[A(x) J(x)]),  c = x_i g(x) or g(x),
/// with M^T A + A M = (e_k e_l^T + e_l e_k^T)/2. Only y-derivatives are
/// provided.
class PoissonSolution {
public:
    PoissonSolution(ScalarObservableSpec obs, ModelSpec model);

    const ScalarObservableSpec& observable() const { return obs_; }
    Mat a_matrix(const Vec& x) const;
    double a_residual(const Vec& x) const;

    double evaluate(const Vec& x, const Vec& y) const;
    Vec grad_y(const Vec& x, const Vec& y) const;  ///< 2 c(x) A y
    Mat hess_y(const Vec& x) const;                 ///< 2 c(x) A

private:
    ScalarObservableSpec obs_;
    ModelSpec model_;
};

/// A scalar function of (x, y). Missing y-derivatives are replaced by central
/// differences (gradient step 1e-5, Hessian step 1e-4).
struct TestFunction {
    std::function<double(const Vec&, const Vec&)> value;
    std::function<Vec(const Vec&, const Vec&)> grad_y;
    std::function<Mat(const Vec&, const Vec&)> hess_y;
};

TestFunction as_test_function(const PoissonSolution& phi);

/// L^x phi(x, y) = (D_y phi, -M y) + 1/2 Tr D_yy phi.
double generator_apply(const TestFunction& phi, const Mat& friction, const Vec& x, const Vec& y);

/// max over probes of |L^x phi + f - fbar| for the explicit corrector.
double poisson_residual(const ScalarObservableSpec& obs, const ModelSpec& model,
                        const std::vector<std::pair<Vec, Vec>>& probes);

/// |int_0^T f(X_s, Y_s) - fbar(X_s) ds| by left-point quadrature.
double averaging_error(const SamplePath& x, const SamplePath& y, const ScalarObservableSpec& obs,
                       const ModelSpec& model);

struct CovarianceEstimate {
    Mat covariance;
    Mat standard_error;  ///< batch-means standard error per entry
    std::size_t samples = 0;
};

/// Sample covariance of the states after dropping the first burn_in_fraction
/// of the path. Needs at least 1000 retained points.
Mat empirical_invariant_covariance(const SamplePath& frozen, double burn_in_fraction = 0.2);

/// Same estimate with batch-means standard errors from `batches` contiguous
/// blocks, which accounts for the autocorrelation of the chain.
CovarianceEstimate invariant_covariance_estimate(const SamplePath& frozen,
                                                 double burn_in_fraction = 0.2,
                                                 int batches = 50);

}  // namespace roughsk
