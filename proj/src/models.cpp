#include "roughsk/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "roughsk/errors.hpp"
#include "roughsk/rng.hpp"

namespace roughsk {

namespace {

void require_finite(const Mat& m, const char* what) {
    if (!m.allFinite()) throw NonFiniteField(std::string(what) + " returned non-finite entries");
}

Mat inverse(const Mat& m) { return m.partialPivLu().inverse(); }

}  // namespace

Mat ModelSpec::friction_at(const Vec& x) const {
    Mat m = friction(x);
    require_finite(m, "friction");
    return m;
}

Vec ModelSpec::force_at(const Vec& x) const {
    if (!force) return Vec::Zero(dim);
    Vec f = force(x);
    require_finite(f, "force");
    return f;
}

std::vector<Mat> ModelSpec::friction_gradient(const Vec& x) const {
    if (friction_grad) {
        auto g = friction_grad(x);
        for (const auto& m : g) require_finite(m, "friction_grad");
        return g;
    }
    std::vector<Mat> g(dim);
    Vec xp = x, xm = x;
    for (int j = 0; j < dim; ++j) {
        xp(j) = x(j) + kGradientStep;
        xm(j) = x(j) - kGradientStep;
        g[j] = (friction_at(xp) - friction_at(xm)) / (2.0 * kGradientStep);
        xp(j) = xm(j) = x(j);
    }
    return g;
}

std::vector<Mat> ModelSpec::inverse_friction_gradient(const Vec& x) const {
    std::vector<Mat> g(dim);
    if (constant_friction) {
        for (auto& m : g) m = Mat::Zero(dim, dim);
        return g;
    }
    if (friction_grad) {
        const Mat minv = inverse(friction_at(x));
        const auto dm = friction_gradient(x);
        for (int j = 0; j < dim; ++j) g[j] = -minv * dm[j] * minv;
        return g;
    }
    Vec xp = x, xm = x;
    for (int j = 0; j < dim; ++j) {
        xp(j) = x(j) + kGradientStep;
        xm(j) = x(j) - kGradientStep;
        g[j] = (inverse(friction_at(xp)) - inverse(friction_at(xm))) / (2.0 * kGradientStep);
        xp(j) = xm(j) = x(j);
    }
    return g;
}

double ModelSpec::friction_norm_estimate() const {
    if (friction_norm_bound) return *friction_norm_bound;
    const Mat m = friction_at(Vec::Zero(dim));
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(0);
}

double ScalarObservableSpec::g_at(const Vec& x) const { return g ? g(x) : 1.0; }

double ScalarObservableSpec::prefactor(const Vec& x) const {
    const double gx = g_at(x);
    return kind == ObservableKind::XYY ? x(i) * gx : gx;
}

double ScalarObservableSpec::value(const Vec& x, const Vec& y) const {
    return prefactor(x) * y(k) * y(l);
}

void ScalarObservableSpec::validate(int dim) const {
    auto in_range = [dim](int idx) { return idx >= 0 && idx < dim; };
    if (!in_range(k) || !in_range(l) || (kind == ObservableKind::XYY && !in_range(i)))
        throw ConfigError("observable index out of range for dimension " + std::to_string(dim));
}

ScalarObservableSpec unit_observable(ObservableKind kind, int i, int k, int l) {
    ScalarObservableSpec obs;
    obs.kind = kind;
    obs.i = i;
    obs.k = k;
    obs.l = l;
    obs.g = [](const Vec&) { return 1.0; };
    obs.g_grad = [](const Vec& x) { return Vec::Zero(x.size()); };
    return obs;
}

const AssumptionCheck& AssumptionReport::check(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return c;
    throw IndexError("no assumption check named '" + name + "'");
}

namespace {

struct ProbeEval {
    Mat m;
    Mat minv;
    Vec dminv;  // stacked d(M^{-1})/dx_j, Frobenius-compatible
    Vec f;
};

double flat_distance(const Mat& a, const Mat& b) { return (a - b).norm(); }

}  // namespace

AssumptionReport check_assumptions(const ModelSpec& model, const std::vector<Vec>& probes,
                                   std::uint64_t rng_seed) {
    if (probes.empty()) throw InsufficientData("check_assumptions needs at least one probe");
    const int d = model.dim;
    AssumptionReport report;

    std::vector<ProbeEval> evals;
    evals.reserve(probes.size());
    AssumptionCheck a1{"A1_min_eigenvalue", true, std::numeric_limits<double>::infinity(),
                       model.lambda, {}};
    AssumptionCheck minv_bound{"A3_bounded_Minv", true, 0.0, 1.0 / model.lambda, {}};
    AssumptionCheck fbound{"A4_force_bound", true, 0.0, model.force_bound, {}};
    AssumptionCheck grad{"friction_grad_consistency", true, 0.0, 1e-5, {}};

    for (const auto& x : probes) {
        if (x.size() != d) throw GridMismatch("probe dimension does not match model");
        ProbeEval e;
        e.m = model.friction_at(x);
        e.minv = inverse(e.m);
        require_finite(e.minv, "friction inverse");
        const auto dminv = model.inverse_friction_gradient(x);
        e.dminv.resize(static_cast<Eigen::Index>(d) * d * d);
        for (int j = 0; j < d; ++j)
            e.dminv.segment(static_cast<Eigen::Index>(j) * d * d, d * d) =
                Eigen::Map<const Vec>(dminv[j].data(), d * d);
        require_finite(e.dminv, "friction inverse gradient");
        e.f = model.force_at(x);

        const Mat sym = 0.5 * (e.m + e.m.transpose());
        const double lmin = Eigen::SelfAdjointEigenSolver<Mat>(sym, Eigen::EigenvaluesOnly)
                                .eigenvalues()(0);
        if (lmin < a1.value) {
            a1.value = lmin;
            a1.witness = x;
        }
        const double inv_norm = Eigen::JacobiSVD<Mat>(e.minv).singularValues()(0);
        if (inv_norm > minv_bound.value) {
            minv_bound.value = inv_norm;
            minv_bound.witness = x;
        }
        const double fn = e.f.norm();
        if (fn > fbound.value || fbound.witness.size() == 0) {
            fbound.value = std::max(fbound.value, fn);
            fbound.witness = x;
        }
        if (model.friction_grad) {
            const auto analytic = model.friction_gradient(x);
            Vec xp = x, xm = x;
            for (int j = 0; j < d; ++j) {
                xp(j) = x(j) + kGradientStep;
                xm(j) = x(j) - kGradientStep;
                const Mat fd = (model.friction_at(xp) - model.friction_at(xm)) / (2.0 * kGradientStep);
                xp(j) = xm(j) = x(j);
                const double rel = (analytic[j] - fd).norm() / std::max(1.0, analytic[j].norm());
                if (rel > grad.value) {
                    grad.value = rel;
                    grad.witness = x;
                }
            }
        }
        evals.push_back(std::move(e));
    }

    a1.passed = a1.value >= model.lambda;
    // Small slack: the bound is attained exactly by constant models.
    minv_bound.passed = minv_bound.value <= minv_bound.bound * (1.0 + 1e-12);
    fbound.passed = fbound.value <= model.force_bound;
    grad.passed = grad.value <= grad.bound;
    report.min_sym_eigenvalue = a1.value;
    report.min_eigen_witness = a1.witness;

    // Lipschitz quotients over probe pairs.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    const std::size_t n = probes.size();
    constexpr std::size_t kMaxPairs = 4096;
    if (n * (n - 1) / 2 <= kMaxPairs) {
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
    } else {
        const auto key = rng::stream_key(rng_seed, 0xA55);
        for (std::size_t p = 0; pairs.size() < kMaxPairs; ++p) {
            const auto a = static_cast<std::size_t>(rng::word(key, 2 * p) % n);
            const auto b = static_cast<std::size_t>(rng::word(key, 2 * p + 1) % n);
            if (a != b) pairs.emplace_back(a, b);
        }
    }

    AssumptionCheck lip_m{"A3_lipschitz_M", true, 0.0, model.lipschitz_bound, {}};
    AssumptionCheck lip_minv{"A3_lipschitz_Minv", true, 0.0, model.lipschitz_bound, {}};
    AssumptionCheck lip_dminv{"A3_lipschitz_dMinv", true, 0.0, model.lipschitz_bound, {}};
    AssumptionCheck lip_f{"A4_lipschitz_F", true, 0.0, model.lipschitz_bound, {}};
    auto update = [](AssumptionCheck& c, double q, const Vec& w) {
        if (q > c.value) {
            c.value = q;
            c.witness = w;
        }
    };
    for (const auto& [a, b] : pairs) {
        const double dx = (probes[a] - probes[b]).norm();
        if (dx == 0.0) continue;
        update(lip_m, flat_distance(evals[a].m, evals[b].m) / dx, probes[a]);
        update(lip_minv, flat_distance(evals[a].minv, evals[b].minv) / dx, probes[a]);
        update(lip_dminv, (evals[a].dminv - evals[b].dminv).norm() / dx, probes[a]);
        update(lip_f, (evals[a].f - evals[b].f).norm() / dx, probes[a]);
    }
    for (auto* c : {&lip_m, &lip_minv, &lip_dminv, &lip_f}) c->passed = c->value <= c->bound;

    report.checks = {a1, minv_bound, lip_m, lip_minv, lip_dminv, lip_f, fbound};
    if (model.friction_grad) report.checks.push_back(grad);
    report.passed = std::all_of(report.checks.begin(), report.checks.end(),
                                [](const AssumptionCheck& c) { return c.passed; });
    return report;
}

std::vector<Vec> probe_cloud(int dim, std::size_t n, double lo, double hi, std::uint64_t seed) {
    const auto key = rng::stream_key(seed, 0xC10D);
    std::vector<Vec> out(n, Vec(dim));
    for (std::size_t p = 0; p < n; ++p)
        for (int j = 0; j < dim; ++j)
            out[p](j) = lo + (hi - lo) * rng::uniform(key, p * static_cast<std::size_t>(dim) + j);
    return out;
}

namespace {

ModelSpec make_const_iso() {
    ModelSpec m;
    m.name = "const_iso";
    m.dim = 2;
    m.friction = [](const Vec&) { return Mat::Identity(2, 2); };
    m.friction_grad = [](const Vec&) { return std::vector<Mat>(2, Mat::Zero(2, 2)); };
    m.force = [](const Vec&) { return Vec::Zero(2); };
    m.lambda = 1.0;
    m.force_bound = 0.0;
    m.lipschitz_bound = 1.0;
    m.friction_norm_bound = 1.0;
    m.constant_friction = true;
    return m;
}

ModelSpec make_const_rot2() {
    ModelSpec m;
    m.name = "const_rot2";
    m.dim = 2;
    m.friction = [](const Vec&) {
        Mat r(2, 2);
        r << 1.0, 1.0, -1.0, 1.0;
        return r;
    };
    m.friction_grad = [](const Vec&) { return std::vector<Mat>(2, Mat::Zero(2, 2)); };
    m.force = [](const Vec&) { return Vec::Zero(2); };
    m.lambda = 1.0;
    m.force_bound = 0.0;
    m.lipschitz_bound = 1.0;
    m.friction_norm_bound = std::sqrt(2.0);
    m.constant_friction = true;
    return m;
}

ModelSpec make_scalar_sin() {
    ModelSpec m;
    m.name = "scalar_sin";
    m.dim = 1;
    m.friction = [](const Vec& x) { return Mat::Constant(1, 1, 2.0 + std::sin(x(0))); };
    m.friction_grad = [](const Vec& x) {
        return std::vector<Mat>{Mat::Constant(1, 1, std::cos(x(0)))};
    };
    m.force = [](const Vec& x) { return Vec::Constant(1, std::sin(x(0))); };
    m.lambda = 1.0;
    m.force_bound = 1.0;
    // |d/dx (-cos/m^2)| = |sin/m^2 + 2 cos^2/m^3| <= 3.
    m.lipschitz_bound = 3.0;
    m.friction_norm_bound = 3.0;
    return m;
}

ModelSpec make_diag_tanh() {
    ModelSpec m;
    m.name = "diag_tanh";
    m.dim = 2;
    m.friction = [](const Vec& x) {
        Mat r = Mat::Zero(2, 2);
        r(0, 0) = 2.0 + std::tanh(x(0));
        r(1, 1) = 2.0 + std::tanh(x(1));
        return r;
    };
    m.friction_grad = [](const Vec& x) {
        std::vector<Mat> g(2, Mat::Zero(2, 2));
        for (int j = 0; j < 2; ++j) {
            const double c = std::cosh(x(j));
            g[j](j, j) = 1.0 / (c * c);
        }
        return g;
    };
    m.force = [](const Vec& x) {
        Vec f(2);
        f << 0.5 * std::sin(x(1)), -0.5 * std::sin(x(0));
        return f;
    };
    m.lambda = 1.0;
    m.force_bound = 1.0;
    // |d/dx (sech^2/m^2)| <= 2|tanh| sech^2/m^2 + 2 sech^4/m^3 <= 4.
    m.lipschitz_bound = 4.0;
    m.friction_norm_bound = 3.0;
    return m;
}

const std::map<std::string, ModelSpec (*)()>& registry() {
    static const std::map<std::string, ModelSpec (*)()> r = {
        {"const_iso", &make_const_iso},
        {"const_rot2", &make_const_rot2},
        {"diag_tanh", &make_diag_tanh},
        {"scalar_sin", &make_scalar_sin},
    };
    return r;
}

}  // namespace

ModelSpec builtin_model(const std::string& name) {
    const auto& r = registry();
    auto it = r.find(name);
    if (it == r.end()) throw UnknownModel(name);
    return it->second();
}

std::vector<std::string> builtin_model_names() {
    std::vector<std::string> names;
    for (const auto& [k, v] : registry()) names.push_back(k);
    return names;
}

}  // namespace roughsk
