#include "roughsk/averaging.hpp"

#include <algorithm>
#include <cmath>

#include "roughsk/errors.hpp"
#include "roughsk/linalg.hpp"

namespace roughsk {

namespace {

constexpr double kFdGradStep = 1e-5;
constexpr double kFdHessStep = 1e-4;

Mat symmetric_unit(int d, int k, int l) {
    Mat b = Mat::Zero(d, d);
    b(k, l) += 0.5;
    b(l, k) += 0.5;
    return b;
}

}  // namespace

double fbar(const ScalarObservableSpec& obs, const ModelSpec& model, const Vec& x) {
    obs.validate(model.dim);
    const Mat j = covariance_J(model.friction_at(x));
    return obs.prefactor(x) * j(obs.k, obs.l);
}

PoissonSolution::PoissonSolution(ScalarObservableSpec obs, ModelSpec model)
    : obs_(std::move(obs)), model_(std::move(model)) {
    obs_.validate(model_.dim);
}

Mat PoissonSolution::a_matrix(const Vec& x) const {
    return solve_lyapunov(model_.friction_at(x), symmetric_unit(model_.dim, obs_.k, obs_.l),
                          LyapunovForm::MtA_AM)
        .matrix;
}

double PoissonSolution::a_residual(const Vec& x) const {
    return solve_lyapunov(model_.friction_at(x), symmetric_unit(model_.dim, obs_.k, obs_.l),
                          LyapunovForm::MtA_AM)
        .residual_norm;
}

double PoissonSolution::evaluate(const Vec& x, const Vec& y) const {
    const Mat m = model_.friction_at(x);
    const Mat a = solve_lyapunov(m, symmetric_unit(model_.dim, obs_.k, obs_.l), LyapunovForm::MtA_AM).matrix;
    const Mat j = covariance_J(m);
    return obs_.prefactor(x) * (y.dot(a * y) - (a * j).trace());
}

Vec PoissonSolution::grad_y(const Vec& x, const Vec& y) const {
    return 2.0 * obs_.prefactor(x) * (a_matrix(x) * y);
}

Mat PoissonSolution::hess_y(const Vec& x) const { return 2.0 * obs_.prefactor(x) * a_matrix(x); }

TestFunction as_test_function(const PoissonSolution& phi) {
    TestFunction t;
    t.value = [phi](const Vec& x, const Vec& y) { return phi.evaluate(x, y); };
    t.grad_y = [phi](const Vec& x, const Vec& y) { return phi.grad_y(x, y); };
    t.hess_y = [phi](const Vec& x, const Vec&) { return phi.hess_y(x); };
    return t;
}

double generator_apply(const TestFunction& phi, const Mat& friction, const Vec& x, const Vec& y) {
    const Eigen::Index d = y.size();
    Vec grad;
    if (phi.grad_y) {
        grad = phi.grad_y(x, y);
    } else {
        grad.resize(d);
        Vec yp = y, ym = y;
        for (Eigen::Index a = 0; a < d; ++a) {
            yp(a) = y(a) + kFdGradStep;
            ym(a) = y(a) - kFdGradStep;
            grad(a) = (phi.value(x, yp) - phi.value(x, ym)) / (2.0 * kFdGradStep);
            yp(a) = ym(a) = y(a);
        }
    }
    double trace = 0.0;
    if (phi.hess_y) {
        trace = phi.hess_y(x, y).trace();
    } else {
        const double h = kFdHessStep;
        const double centre = phi.value(x, y);
        Vec yp = y, ym = y;
        for (Eigen::Index a = 0; a < d; ++a) {
            yp(a) = y(a) + h;
            ym(a) = y(a) - h;
            trace += (phi.value(x, yp) - 2.0 * centre + phi.value(x, ym)) / (h * h);
            yp(a) = ym(a) = y(a);
        }
    }
    const double out = grad.dot(-friction * y) + 0.5 * trace;
    if (!std::isfinite(out)) throw NonFiniteField("generator_apply produced a non-finite value");
    return out;
}

double poisson_residual(const ScalarObservableSpec& obs, const ModelSpec& model,
                        const std::vector<std::pair<Vec, Vec>>& probes) {
    const PoissonSolution phi(obs, model);
    const TestFunction t = as_test_function(phi);
    double worst = 0.0;
    for (const auto& [x, y] : probes) {
        if (!x.allFinite() || !y.allFinite()) throw NonFiniteField("poisson_residual: non-finite probe");
        const double lhs = generator_apply(t, model.friction_at(x), x, y);
        const double r = std::abs(lhs + obs.value(x, y) - fbar(obs, model, x));
        worst = std::max(worst, r);
    }
    return worst;
}

double averaging_error(const SamplePath& x, const SamplePath& y, const ScalarObservableSpec& obs,
                       const ModelSpec& model) {
    if (x.values.rows() != y.values.rows() || x.dt != y.dt || x.dim() != y.dim())
        throw GridMismatch("averaging_error: X and Y do not share a grid");
    obs.validate(model.dim);
    double j_kl = 0.0;
    if (model.constant_friction) j_kl = covariance_J(model.friction_at(Vec::Zero(model.dim)))(obs.k, obs.l);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < x.steps(); ++i) {
        const Vec xi = x.point(i);
        const Vec yi = y.point(i);
        const double jkl = model.constant_friction ? j_kl : covariance_J(model.friction_at(xi))(obs.k, obs.l);
        sum += obs.prefactor(xi) * (yi(obs.k) * yi(obs.l) - jkl);
    }
    return std::abs(sum * x.dt);
}

namespace {

Eigen::Index retained_start(const SamplePath& path, double burn_in_fraction) {
    if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0))
        throw ConfigError("burn_in_fraction must lie in [0, 1)");
    const Eigen::Index total = path.values.rows();
    const auto start = static_cast<Eigen::Index>(std::floor(burn_in_fraction * static_cast<double>(total)));
    if (total - start < 1000)
        throw InsufficientData("need at least 1000 points after burn-in, have " +
                               std::to_string(total - start));
    return start;
}

}  // namespace

Mat empirical_invariant_covariance(const SamplePath& frozen, double burn_in_fraction) {
    const Eigen::Index start = retained_start(frozen, burn_in_fraction);
    const auto block = frozen.values.bottomRows(frozen.values.rows() - start);
    const Eigen::RowVectorXd mean = block.colwise().mean();
    const RowMat centred = block.rowwise() - mean;
    return (centred.transpose() * centred) / static_cast<double>(block.rows() - 1);
}

CovarianceEstimate invariant_covariance_estimate(const SamplePath& frozen, double burn_in_fraction,
                                                 int batches) {
    if (batches < 2) throw ConfigError("need at least two batches");
    const Eigen::Index start = retained_start(frozen, burn_in_fraction);
    const auto block = frozen.values.bottomRows(frozen.values.rows() - start);
    const Eigen::RowVectorXd mean = block.colwise().mean();
    const RowMat centred = block.rowwise() - mean;
    const int d = frozen.dim();

    CovarianceEstimate out;
    out.samples = static_cast<std::size_t>(block.rows());
    out.covariance = (centred.transpose() * centred) / static_cast<double>(block.rows() - 1);

    const Eigen::Index len = block.rows() / batches;
    Mat sum = Mat::Zero(d, d), sum2 = Mat::Zero(d, d);
    for (int b = 0; b < batches; ++b) {
        const auto part = centred.middleRows(b * len, len);
        const Mat c = (part.transpose() * part) / static_cast<double>(len);
        sum += c;
        sum2 += c.cwiseProduct(c);
    }
    const Mat mean_c = sum / batches;
    const Mat var = (sum2 / batches - mean_c.cwiseProduct(mean_c)) * (static_cast<double>(batches) / (batches - 1));
    out.standard_error = (var.cwiseMax(0.0) / batches).cwiseSqrt();
    return out;
}

}  // namespace roughsk
