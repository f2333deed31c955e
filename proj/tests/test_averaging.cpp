#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "roughsk/averaging.hpp"
#include "roughsk/errors.hpp"
#include "roughsk/linalg.hpp"
#include "roughsk/rng.hpp"
#include "roughsk/sde.hpp"

using namespace roughsk;
using Catch::Approx;

namespace {

std::vector<std::pair<Vec, Vec>> random_probes(int d, std::size_t n, double box, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-box, box);
    std::normal_distribution<double> n01;
    std::vector<std::pair<Vec, Vec>> out;
    for (std::size_t k = 0; k < n; ++k) {
        Vec x(d), y(d);
        for (int j = 0; j < d; ++j) {
            x(j) = u(gen);
            y(j) = 2.0 * n01(gen);
        }
        out.emplace_back(x, y);
    }
    return out;
}

TestFunction value_only(std::function<double(const Vec&, const Vec&)> f) {
    TestFunction t;
    t.value = std::move(f);
    return t;
}

SamplePath constant_path(const Vec& v, long n, double dt) {
    SamplePath p;
    p.dt = dt;
    p.values = v.transpose().replicate(n + 1, 1);
    return p;
}

}  // namespace

TEST_CASE("fbar examples") {
    const auto iso = builtin_model("const_iso");
    const Vec x = Vec::Constant(2, 0.3);
    CHECK(fbar(unit_observable(ObservableKind::YY, 0, 0, 0), iso, x) == Approx(0.5));
    CHECK(fbar(unit_observable(ObservableKind::YY, 0, 0, 1), iso, x) == 0.0);
    const double half_pi = std::numbers::pi / 2;
    CHECK(fbar(unit_observable(ObservableKind::XYY, 0, 0, 0), builtin_model("scalar_sin"), Vec::Constant(1, half_pi)) ==
          Approx(half_pi / 6.0).epsilon(1e-14));
}

TEST_CASE("fbar is symmetric in the fast indices") {
    for (const auto& name : builtin_model_names()) {
        const auto model = builtin_model(name);
        const int d = model.dim;
        for (const auto& [x, y] : random_probes(d, 20, 3.0, 1))
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l)
                    CHECK(fbar(unit_observable(ObservableKind::YY, 0, k, l), model, x) ==
                          fbar(unit_observable(ObservableKind::YY, 0, l, k), model, x));
    }
}

TEST_CASE("generator on simple test functions") {
    const Mat id = Mat::Identity(2, 2);
    const auto sq = value_only([](const Vec&, const Vec& y) { return y.squaredNorm(); });
    const Vec x = Vec::Zero(2);
    CHECK(generator_apply(sq, id, x, (Vec(2) << 1, 0).finished()) == Approx(0.0).margin(1e-6));
    const Vec y = (Vec(2) << 0.7, -1.2).finished();
    CHECK(generator_apply(sq, id, x, y) == Approx(-2.0 * y.squaredNorm() + 2.0).margin(1e-6));

    TestFunction exact;
    exact.value = [](const Vec&, const Vec& z) { return z.squaredNorm(); };
    exact.grad_y = [](const Vec&, const Vec& z) { return Vec(2.0 * z); };
    exact.hess_y = [](const Vec&, const Vec& z) { return Mat(2.0 * Mat::Identity(z.size(), z.size())); };
    CHECK(generator_apply(exact, id, x, y) == Approx(-2.0 * y.squaredNorm() + 2.0).epsilon(1e-15));

    CHECK(generator_apply(value_only([](const Vec&, const Vec&) { return 3.0; }), id, x, y) == Approx(0.0).margin(1e-9));
}

TEST_CASE("generator on the quadratic corrector form") {
    const Mat m = (Mat(2, 2) << 2.0, 0.5, -0.3, 1.5).finished();
    for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
            Mat e = Mat::Zero(2, 2);
            e(k, l) += 0.5;
            e(l, k) += 0.5;
            const Mat a = solve_lyapunov(m, e, LyapunovForm::MtA_AM).matrix;
            const auto phi = value_only([a](const Vec&, const Vec& y) { return y.dot(a * y); });
            for (const auto& [x, y] : random_probes(2, 10, 1.0, 4))
                CHECK(generator_apply(phi, m, x, y) == Approx(-y(k) * y(l) + a.trace()).margin(1e-5));
        }
}

TEST_CASE("analytic corrector derivatives match finite differences") {
    const auto model = builtin_model("diag_tanh");
    const PoissonSolution phi(unit_observable(ObservableKind::XYY, 1, 0, 1), model);
    const auto fd = value_only([&](const Vec& x, const Vec& y) { return phi.evaluate(x, y); });
    for (const auto& [x, y] : random_probes(2, 20, 2.0, 5)) {
        CHECK(phi.a_residual(x) <= 1e-10);
        CHECK(std::isfinite(phi.evaluate(x, y)));
        const double analytic = generator_apply(as_test_function(phi), model.friction_at(x), x, y);
        const double numeric = generator_apply(fd, model.friction_at(x), x, y);
        CHECK(analytic == Approx(numeric).margin(1e-5));
        const Vec g = phi.grad_y(x, y);
        for (int j = 0; j < 2; ++j) {
            Vec yp = y, ym = y;
            yp(j) += 1e-5;
            ym(j) -= 1e-5;
            CHECK(g(j) == Approx((phi.evaluate(x, yp) - phi.evaluate(x, ym)) / 2e-5).margin(1e-6));
        }
    }
}

TEST_CASE("Poisson residual examples") {
    const auto iso = builtin_model("const_iso");
    for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
            CHECK(poisson_residual(unit_observable(ObservableKind::YY, 0, k, l), iso, random_probes(2, 50, 5.0, 6)) <= 1e-9);

    auto on_axis = random_probes(2, 50, 5.0, 7);
    for (auto& [x, y] : on_axis) x(0) = 0.0;
    CHECK(poisson_residual(unit_observable(ObservableKind::XYY, 0, 0, 1), builtin_model("diag_tanh"), on_axis) <= 1e-9);

    CHECK(poisson_residual(unit_observable(ObservableKind::XYY, 0, 0, 0), builtin_model("scalar_sin"),
                           random_probes(1, 100, 2.0, 8)) <= 1e-7);
}

TEST_CASE("Poisson residual for every model, index and kind") {
    for (const auto& name : builtin_model_names()) {
        const auto model = builtin_model(name);
        const int d = model.dim;
        const auto probes = random_probes(d, 100, 5.0, 9);
        for (auto kind : {ObservableKind::XYY, ObservableKind::YY})
            for (int i = 0; i < d; ++i)
                for (int k = 0; k < d; ++k)
                    for (int l = 0; l < d; ++l) {
                        auto obs = unit_observable(kind, i, k, l);
                        INFO(name << " k=" << k << " l=" << l << " i=" << i);
                        CHECK(poisson_residual(obs, model, probes) <= 1e-7);
                    }
    }
}

TEST_CASE("Poisson residual with a non-constant weight g") {
    const auto model = builtin_model("scalar_sin");
    auto obs = unit_observable(ObservableKind::XYY, 0, 0, 0);
    obs.g = [](const Vec& x) { return std::cos(x(0)); };
    obs.g_grad = [](const Vec& x) { return Vec::Constant(1, -std::sin(x(0))); };
    CHECK(poisson_residual(obs, model, random_probes(1, 100, 4.0, 10)) <= 1e-7);
}

TEST_CASE("corrector grows at most polynomially") {
    const auto model = builtin_model("const_rot2");
    const PoissonSolution phi(unit_observable(ObservableKind::XYY, 0, 0, 1), model);
    auto ratio = [&](const Vec& x, const Vec& y) {
        return std::abs(phi.evaluate(x, y)) / (1.0 + std::pow(x.norm(), 3) + std::pow(y.norm(), 3));
    };
    double c = 0.0;
    for (const auto& [x, y] : random_probes(2, 200, 2.0, 11)) c = std::max(c, ratio(x, y));
    for (const auto& [x, y] : random_probes(2, 2000, 50.0, 12)) CHECK(ratio(x, y) <= 2.0 * c);
}

TEST_CASE("averaging error with a frozen fast variable") {
    const auto iso = builtin_model("const_iso");
    const auto x = constant_path(Vec::Zero(2), 100, 0.01);
    const auto y = constant_path(Vec::Zero(2), 100, 0.01);
    CHECK(averaging_error(x, y, unit_observable(ObservableKind::YY, 0, 1, 1), iso) == Approx(0.5).epsilon(1e-14));

    const auto x0 = constant_path(Vec::Zero(2), 0, 0.01);
    CHECK(averaging_error(x0, x0, unit_observable(ObservableKind::YY, 0, 0, 0), iso) == 0.0);

    const auto shorter = constant_path(Vec::Zero(2), 50, 0.01);
    CHECK_THROWS_AS(averaging_error(x, shorter, unit_observable(ObservableKind::YY, 0, 0, 0), iso), GridMismatch);
}

TEST_CASE("invariant covariance of a decaying path vanishes") {
    const Vec y0 = Vec::Constant(2, 1.0);
    const auto path = simulate_frozen(Mat::Identity(2, 2), NoiseBundle::zeros(5000, 2, 0.1), y0);
    CHECK(empirical_invariant_covariance(path).norm() < 1e-30);
    const auto tiny = simulate_frozen(Mat::Identity(2, 2), NoiseBundle::zeros(900, 2, 0.1), y0);
    CHECK_THROWS_AS(empirical_invariant_covariance(tiny), InsufficientData);
}

TEST_CASE("invariant covariance error decays like N^{-1/2}") {
    const Mat m = (Mat(2, 2) << 1, 1, -1, 1).finished();
    const Mat j = covariance_J(m);
    std::vector<double> logn, logerr;
    for (long n : {4000L, 16000L, 64000L, 256000L}) {
        double sq = 0.0;
        const int reps = 12;
        for (int r = 0; r < reps; ++r) {
            const auto path = simulate_frozen(m, sample_noise(n, 2, 0.1, rng::stream_key(77, n, r)));
            sq += (empirical_invariant_covariance(path, 0.0) - j).squaredNorm();
        }
        logn.push_back(std::log(double(n)));
        logerr.push_back(0.5 * std::log(sq / reps));
    }
    // least-squares slope and the worst deviation from the fitted line
    const double mx = (logn[0] + logn[1] + logn[2] + logn[3]) / 4, my = (logerr[0] + logerr[1] + logerr[2] + logerr[3]) / 4;
    double sxy = 0, sxx = 0;
    for (int i = 0; i < 4; ++i) {
        sxy += (logn[i] - mx) * (logerr[i] - my);
        sxx += (logn[i] - mx) * (logn[i] - mx);
    }
    const double slope = sxy / sxx;
    CHECK(slope == Approx(-0.5).margin(0.15));
    for (int i = 0; i < 4; ++i) {
        const double line = my - 0.5 * (logn[i] - mx);
        CHECK(std::abs(logerr[i] - line) <= std::log(3.0));
    }
}
