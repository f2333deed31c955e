#include "roughsk/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "roughsk/averaging.hpp"
#include "roughsk/errors.hpp"
#include "roughsk/parallel.hpp"
#include "roughsk/rng.hpp"

namespace roughsk {

PathFailure::PathFailure(double eps, std::size_t k, const std::string& what)
    : Error("epsilon " + std::to_string(eps) + ", path " + std::to_string(k) + ": " + what),
      epsilon(eps),
      path(k) {}

MetricEstimate estimate(std::string name, const std::vector<double>& samples) {
    MetricEstimate m;
    m.name = std::move(name);
    m.n = samples.size();
    if (samples.empty()) return m;
    m.mean = pairwise_sum(samples) / static_cast<double>(m.n);
    if (m.n > 1) {
        std::vector<double> sq(samples.size());
        std::transform(samples.begin(), samples.end(), sq.begin(),
                       [&](double v) { return (v - m.mean) * (v - m.mean); });
        const double var = pairwise_sum(sq) / static_cast<double>(m.n - 1);
        m.standard_error = std::sqrt(var / static_cast<double>(m.n));
    }
    return m;
}

const MetricEstimate& EpsilonRecord::metric(const std::string& name) const {
    for (const auto& m : metrics)
        if (m.name == name) return m;
    throw IndexError("no metric named '" + name + "'");
}

namespace {

ModelSpec configured_model(const ExperimentConfig& config) {
    ModelSpec model = builtin_model(config.model_name);
    model.horizon = config.horizon;
    return model;
}

NoiseBundle path_noise(const ExperimentConfig& config, const GridPlan& plan, int dim, std::size_t e,
                       std::size_t k) {
    return sample_noise(plan.fine_steps, dim, plan.fine_dt, rng::stream_key(config.seed, e, k));
}

// Runs fn for every path of one epsilon and tags failures with (eps, k).
template <class Result, class Fn>
std::vector<Result> run_paths(double epsilon, std::size_t n, Fn fn) {
    std::vector<Result> out(n);
    parallel_for(n, [&](std::size_t k) {
        try {
            out[k] = fn(k);
        } catch (const PathFailure&) {
            throw;
        } catch (const std::exception& ex) {
            throw PathFailure(epsilon, k, ex.what());
        }
    });
    return out;
}

struct PathResult {
    std::vector<double> scalars;   // fixed layout, see run_convergence
    std::vector<double> y_powers;  // |Y_t|^p at coarse nodes, p-major
};

double ipow(double v, int p) {
    double r = 1.0;
    for (int i = 0; i < p; ++i) r *= v;
    return r;
}

}  // namespace

ConvergenceReport run_convergence(const ExperimentConfig& config) {
    config.validate();
    const auto started = std::chrono::steady_clock::now();
    const ModelSpec model = configured_model(config);
    const ScalarObservableSpec obs = config.observable.spec();
    const int d = model.dim;
    const int c = config.coarsen;
    const std::size_t n_paths = static_cast<std::size_t>(config.n_paths);
    const auto& ps = config.p_moments;

    ConvergenceReport report;
    report.meta.config_hash = config_hash(config);
    report.meta.seed = config.seed;
    report.meta.model = config.model_name;
    report.meta.scheme = scheme_name(config.scheme);
    report.meta.alpha = config.alpha;
    report.meta.horizon = config.horizon;
    report.meta.n_paths = config.n_paths;
    report.meta.coarsen = config.coarsen;

    std::vector<std::pair<int, int>> upper;
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b) upper.emplace_back(a, b);

    for (std::size_t e = 0; e < config.epsilons.size(); ++e) {
        const double eps = config.epsilons[e];
        const GridPlan plan = plan_grid(config, eps);
        const long nc = plan.coarse_steps;

        auto results = run_paths<PathResult>(eps, n_paths, [&](std::size_t k) {
            const NoiseBundle noise = path_noise(config, plan, d, e, k);
            const FastSlowPaths fs = simulate_fast_slow(model, eps, noise, config.scheme);
            const SamplePath limit = simulate_limit(model, noise);
            const GridRoughPath lift_eps = ito_lift(fs.x, c);
            const GridRoughPath lift_lim = limit_lift(limit, model, c);
            const GridRoughPath strat_lim = stratonovich_lift(limit, c);

            const RoughDistance dist = rough_distance(lift_eps, lift_lim, config.alpha);
            double sup = 0.0;
            for (long t = 0; t <= nc; ++t)
                sup = std::max(sup, (lift_eps.base.values.row(t) - lift_lim.base.values.row(t)).norm());
            const double xh = holder_norm(lift_eps.base, config.alpha);
            const Mat area_eps = chen_area(lift_eps, 0, nc);
            const Mat area_lim = chen_area(lift_lim, 0, nc);
            const double gap = (area_eps - chen_area(strat_lim, 0, nc)).norm();
            const double avg = averaging_error(fs.x, fs.y, obs, model);

            PathResult r;
            for (int p : ps) {
                r.scalars.push_back(ipow(dist.total(), p));
                r.scalars.push_back(ipow(dist.level1, p));
                r.scalars.push_back(ipow(dist.level2, p));
                r.scalars.push_back(ipow(sup, p));
                r.scalars.push_back(ipow(xh, p));
            }
            r.scalars.push_back(avg);
            r.scalars.push_back(gap);
            for (const auto& [a, b] : upper) r.scalars.push_back(0.5 * (area_eps(a, b) - area_eps(b, a)));
            for (const auto& [a, b] : upper) r.scalars.push_back(0.5 * (area_lim(a, b) - area_lim(b, a)));
            r.y_powers.reserve(ps.size() * static_cast<std::size_t>(nc + 1));
            for (int p : ps)
                for (long t = 0; t <= nc; ++t) r.y_powers.push_back(ipow(fs.y.point(t * c).norm(), p));
            return r;
        });

        EpsilonRecord rec;
        rec.epsilon = eps;
        rec.grid = plan;
        auto column = [&](std::size_t idx) {
            std::vector<double> v(n_paths);
            for (std::size_t k = 0; k < n_paths; ++k) v[k] = results[k].scalars[idx];
            return v;
        };
        std::size_t idx = 0;
        for (int p : ps) {
            const std::string suffix = "_p" + std::to_string(p);
            rec.metrics.push_back(estimate("rho_alpha" + suffix, column(idx++)));
            rec.metrics.push_back(estimate("holder_error" + suffix, column(idx++)));
            rec.metrics.push_back(estimate("level2_error" + suffix, column(idx++)));
            rec.metrics.push_back(estimate("sup_error" + suffix, column(idx++)));
            rec.metrics.push_back(estimate("x_holder" + suffix, column(idx++)));
        }
        rec.metrics.push_back(estimate("averaging_error", column(idx++)));
        rec.metrics.push_back(estimate("ito_strat_gap", column(idx++)));
        for (const auto& [a, b] : upper)
            rec.metrics.push_back(estimate("ito_area_antisym_" + std::to_string(a + 1) + std::to_string(b + 1), column(idx++)));
        for (const auto& [a, b] : upper)
            rec.metrics.push_back(estimate("limit_area_antisym_" + std::to_string(a + 1) + std::to_string(b + 1), column(idx++)));
        for (std::size_t pi = 0; pi < ps.size(); ++pi) {
            MetricEstimate best;
            for (long t = 0; t <= nc; ++t) {
                std::vector<double> v(n_paths);
                for (std::size_t k = 0; k < n_paths; ++k)
                    v[k] = results[k].y_powers[pi * static_cast<std::size_t>(nc + 1) + static_cast<std::size_t>(t)];
                auto m = estimate("y_moment_p" + std::to_string(ps[pi]), v);
                if (t == 0 || m.mean > best.mean) best = m;
            }
            rec.metrics.push_back(best);
        }
        report.per_epsilon.push_back(std::move(rec));
    }
    report.meta.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

namespace {

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace

std::vector<EmpiricalRate> empirical_rates(const ConvergenceReport& report) {
    std::vector<EmpiricalRate> out;
    if (report.per_epsilon.size() < 2) return out;
    for (const auto& m : report.per_epsilon.front().metrics) {
        std::vector<double> loge, logm;
        for (const auto& rec : report.per_epsilon) {
            const double mean = rec.metric(m.name).mean;
            if (!(mean > 0.0) || !std::isfinite(mean)) break;
            loge.push_back(std::log(rec.epsilon));
            logm.push_back(std::log(mean));
        }
        if (loge.size() == report.per_epsilon.size()) out.push_back({m.name, ols_slope(loge, logm)});
    }
    return out;
}

namespace {

// Per-path averages over all windows of each gap: out[path][gap].
struct GapStatistics {
    std::vector<std::vector<double>> level1;
    std::vector<std::vector<double>> level2;
};

}  // namespace

HolderScaling holder_scaling_from_lifts(const std::vector<GridRoughPath>& lifts, int p, double min_gap) {
    if (lifts.empty()) throw InsufficientData("no paths supplied for Holder scaling");
    const Eigen::Index n = lifts.front().steps();
    const double dt = lifts.front().base.dt;
    const int d = lifts.front().dim();
    std::vector<Eigen::Index> gaps;
    for (Eigen::Index g = 1; 2 * g <= n; g *= 2)
        if (static_cast<double>(g) * dt >= min_gap * (1.0 - 1e-12)) gaps.push_back(g);
    if (gaps.size() < 4)
        throw InsufficientData("Holder scaling needs 4 dyadic gaps, found " + std::to_string(gaps.size()));

    GapStatistics stats;
    stats.level1.resize(lifts.size());
    stats.level2.resize(lifts.size());
    parallel_for(lifts.size(), [&](std::size_t k) {
        const auto& rp = lifts[k];
        if (rp.steps() != n || rp.base.dt != dt) throw GridMismatch("Holder scaling lifts differ in grid");
        const auto& x = rp.base.values;
        // Prefix areas P_t = XX_{0,t}; XX_{s,t} = P_t - P_s - X_{0,s} (x) X_{s,t}.
        std::vector<Mat> prefix(static_cast<std::size_t>(n + 1), Mat::Zero(d, d));
        for (Eigen::Index t = 0; t < n; ++t)
            prefix[t + 1] = prefix[t] + rp.step_area(t) +
                            (x.row(t) - x.row(0)).transpose() * (x.row(t + 1) - x.row(t));
        for (Eigen::Index g : gaps) {
            double s1 = 0.0, s2 = 0.0;
            for (Eigen::Index s = 0; s + g <= n; ++s) {
                const auto inc = (x.row(s + g) - x.row(s)).eval();
                const Mat area = prefix[s + g] - prefix[s] - (x.row(s) - x.row(0)).transpose() * inc;
                s1 += std::pow(inc.norm(), p);
                s2 += std::pow(area.norm(), p);
            }
            const double windows = static_cast<double>(n - g + 1);
            stats.level1[k].push_back(s1 / windows);
            stats.level2[k].push_back(s2 / windows);
        }
    });

    HolderScaling out;
    out.p = p;
    std::vector<double> logh;
    for (Eigen::Index g : gaps) {
        out.gaps.push_back(static_cast<double>(g) * dt);
        logh.push_back(std::log(static_cast<double>(g) * dt));
    }
    auto slope_of = [&](const std::vector<std::vector<double>>& per_path, std::size_t begin, std::size_t end,
                        std::vector<double>* means) {
        std::vector<double> logm;
        for (std::size_t gi = 0; gi < gaps.size(); ++gi) {
            std::vector<double> v;
            for (std::size_t k = begin; k < end; ++k) v.push_back(per_path[k][gi]);
            const double m = pairwise_sum(v) / static_cast<double>(v.size());
            if (means) means->push_back(m);
            logm.push_back(std::log(m));
        }
        return ols_slope(logh, logm);
    };
    out.level1_slope = slope_of(stats.level1, 0, lifts.size(), &out.level1_moments);
    out.level2_slope = slope_of(stats.level2, 0, lifts.size(), &out.level2_moments);

    bool identical = true;
    for (std::size_t k = 1; k < lifts.size() && identical; ++k)
        identical = stats.level1[k] == stats.level1[0] && stats.level2[k] == stats.level2[0];
    out.degenerate = identical;

    const std::size_t batches = std::min<std::size_t>(10, lifts.size());
    if (!identical && batches >= 2) {
        std::vector<double> b1, b2;
        const std::size_t per = lifts.size() / batches;
        for (std::size_t b = 0; b < batches; ++b) {
            b1.push_back(slope_of(stats.level1, b * per, (b + 1) * per, nullptr));
            b2.push_back(slope_of(stats.level2, b * per, (b + 1) * per, nullptr));
        }
        out.level1_ci = 2.0 * estimate("", b1).standard_error;
        out.level2_ci = 2.0 * estimate("", b2).standard_error;
    }
    return out;
}

std::vector<HolderScaling> run_holder_scaling(const ExperimentConfig& config) {
    config.validate();
    const ModelSpec model = configured_model(config);
    std::vector<HolderScaling> out;
    for (std::size_t e = 0; e < config.epsilons.size(); ++e) {
        const double eps = config.epsilons[e];
        const GridPlan plan = plan_grid(config, eps);
        const auto lifts = run_paths<GridRoughPath>(eps, static_cast<std::size_t>(config.n_paths), [&](std::size_t k) {
            const NoiseBundle noise = path_noise(config, plan, model.dim, e, k);
            return ito_lift(simulate_fast_slow(model, eps, noise, config.scheme).x, config.coarsen);
        });
        const double min_gap = config.holder_min_gap > 0.0 ? config.holder_min_gap : 8.0 * eps * eps / model.lambda;
        for (int p : config.p_moments) {
            HolderScaling h = holder_scaling_from_lifts(lifts, p, min_gap);
            h.epsilon = eps;
            out.push_back(std::move(h));
        }
    }
    return out;
}

AveragingValidation run_averaging_validation(const ExperimentConfig& config, const ScalarObservableSpec& obs) {
    config.validate();
    const ModelSpec model = configured_model(config);
    obs.validate(model.dim);
    AveragingValidation out;
    for (std::size_t e = 0; e < config.epsilons.size(); ++e) {
        const double eps = config.epsilons[e];
        const GridPlan plan = plan_grid(config, eps);
        const auto errors = run_paths<double>(eps, static_cast<std::size_t>(config.n_paths), [&](std::size_t k) {
            const NoiseBundle noise = path_noise(config, plan, model.dim, e, k);
            const FastSlowPaths fs = simulate_fast_slow(model, eps, noise, config.scheme);
            return averaging_error(fs.x, fs.y, obs, model);
        });
        out.per_epsilon.push_back({eps, estimate("averaging_error", errors)});
    }
    out.decreasing = true;
    for (std::size_t e = 1; e < out.per_epsilon.size(); ++e)
        if (!(out.per_epsilon[e].error.mean < out.per_epsilon[e - 1].error.mean)) out.decreasing = false;
    return out;
}

}  // namespace roughsk
