#include "roughsk/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "roughsk/averaging.hpp"
#include "roughsk/config.hpp"
#include "roughsk/errors.hpp"
#include "roughsk/harness.hpp"
#include "roughsk/linalg.hpp"
#include "roughsk/models.hpp"
#include "roughsk/report.hpp"
#include "roughsk/rng.hpp"
#include "roughsk/sde.hpp"

namespace roughsk {

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string model;
    std::optional<double> eps;
    bool quiet = false;
};

void add_common(CLI::App* sub, CommonOptions& o) {
    sub->add_option("--config", o.config_path, "JSON experiment config");
    sub->add_option("--seed", o.seed, "override the config seed");
    sub->add_option("--out", o.out, "output file (default: stdout)");
    sub->add_option("--model", o.model, "override the model name");
    sub->add_option("--eps", o.eps, "run a single epsilon");
    sub->add_flag("--quiet", o.quiet, "suppress the summary on stderr");
}

ExperimentConfig resolve_config(const CommonOptions& o) {
    ExperimentConfig c = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
    if (o.seed) c.seed = *o.seed;
    if (!o.model.empty()) {
        builtin_model(o.model);  // UnknownModel early
        c.model_name = o.model;
    }
    if (o.eps) c.epsilons = {*o.eps};
    c.validate();
    return c;
}

class OutputError : public Error {
public:
    using Error::Error;
};

// Writes to --out, or to <outputs>/<default_name> when the config names an
// output directory, or to stdout.
template <class Fn>
void with_output(const CommonOptions& o, const ExperimentConfig& c, const std::string& default_name, Fn fn) {
    std::string path = o.out;
    if (path.empty() && !c.outputs.empty()) {
        std::filesystem::create_directories(c.outputs);
        path = (std::filesystem::path(c.outputs) / default_name).string();
    }
    if (path.empty()) {
        fn(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw OutputError("cannot open '" + path + "' for writing");
    fn(os);
    if (!os) throw OutputError("write to '" + path + "' failed");
}

int cmd_simulate(const CommonOptions& o) {
    const ExperimentConfig c = resolve_config(o);
    ModelSpec model = builtin_model(c.model_name);
    model.horizon = c.horizon;
    const double eps = c.epsilons.front();
    const GridPlan plan = plan_grid(c, eps);
    const NoiseBundle noise = sample_noise(plan.fine_steps, model.dim, plan.fine_dt, rng::stream_key(c.seed, 0, 0));
    const FastSlowPaths fs = simulate_fast_slow(model, eps, noise, c.scheme);
    with_output(o, c, "path.csv", [&](std::ostream& os) { write_path_csv(os, fs.x, &fs.y); });
    if (!o.quiet)
        std::fprintf(stderr, "simulated %s, eps=%g, %ld steps of %g\n", c.model_name.c_str(), eps, plan.fine_steps,
                     plan.fine_dt);
    return 0;
}

int cmd_converge(const CommonOptions& o) {
    const ExperimentConfig c = resolve_config(o);
    const ConvergenceReport r = run_convergence(c);
    with_output(o, c, "report.json", [&](std::ostream& os) { write_json(os, report_to_json(r)); });
    if (!c.outputs.empty()) {
        std::ofstream csv(std::filesystem::path(c.outputs) / "report.csv", std::ios::binary);
        if (!csv) throw OutputError("cannot write report.csv");
        write_report_csv(csv, r);
    }
    if (!o.quiet) {
        const std::string key = "rho_alpha_p" + std::to_string(c.p_moments.front());
        for (const auto& rec : r.per_epsilon) {
            const auto& m = rec.metric(key);
            std::fprintf(stderr, "eps=%-8g %s = %.6g +- %.2g\n", rec.epsilon, key.c_str(), m.mean, m.standard_error);
        }
        std::fprintf(stderr, "wall time %.2f s\n", r.meta.wall_time_seconds);
    }
    return 0;
}

int cmd_holder(const CommonOptions& o) {
    const ExperimentConfig c = resolve_config(o);
    const auto h = run_holder_scaling(c);
    with_output(o, c, "holder.json", [&](std::ostream& os) { write_json(os, holder_to_json(h)); });
    if (!o.quiet)
        for (const auto& s : h)
            std::fprintf(stderr, "eps=%-8g p=%d level1 %.4f +- %.3f, level2 %.4f +- %.3f%s\n", s.epsilon, s.p,
                         s.level1_slope, s.level1_ci, s.level2_slope, s.level2_ci, s.degenerate ? " (degenerate)" : "");
    return 0;
}

int cmd_average(const CommonOptions& o) {
    const ExperimentConfig c = resolve_config(o);
    const ScalarObservableSpec obs = c.observable.spec();
    const auto v = run_averaging_validation(c, obs);
    with_output(o, c, "averaging.json", [&](std::ostream& os) { write_json(os, averaging_to_json(v)); });
    if (!o.quiet) {
        for (const auto& r : v.per_epsilon)
            std::fprintf(stderr, "eps=%-8g error = %.6g +- %.2g\n", r.epsilon, r.error.mean, r.error.standard_error);
        std::fprintf(stderr, "decreasing: %s\n", v.decreasing ? "yes" : "no");
    }
    return 0;
}

struct CheckResult {
    std::string model;
    bool assumptions = false;
    double lyapunov = 0.0;
    double poisson = 0.0;
};

CheckResult check_model(const std::string& name, std::uint64_t seed) {
    const ModelSpec model = builtin_model(name);
    const int d = model.dim;
    const auto probes = probe_cloud(d, 200, -5.0, 5.0, seed);
    CheckResult r;
    r.model = name;
    r.assumptions = check_assumptions(model, probes, seed).passed;
    for (const auto& x : probes) {
        const Mat m = model.friction_at(x);
        r.lyapunov = std::max(r.lyapunov,
                              lyapunov_residual(m, covariance_J(m), Mat::Identity(d, d), LyapunovForm::MJ_JMt).norm());
    }
    std::vector<std::pair<Vec, Vec>> pairs;
    for (std::size_t n = 0; n < 100; ++n) {
        Vec y(d);
        rng::normal_row(rng::stream_key(seed, 1), n, std::span<double>(y.data(), static_cast<std::size_t>(d)));
        pairs.emplace_back(probes[n], y);
    }
    for (ObservableKind kind : {ObservableKind::XYY, ObservableKind::YY})
        for (int i = 0; i < d; ++i)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) {
                    if (kind == ObservableKind::YY && i > 0) continue;
                    ScalarObservableSpec obs = unit_observable(kind, i, k, l);
                    r.poisson = std::max(r.poisson, poisson_residual(obs, model, pairs));
                }
    return r;
}

int cmd_check(const CommonOptions& o) {
    std::vector<std::string> names;
    if (!o.model.empty())
        names.push_back(o.model);
    else
        names = builtin_model_names();
    const std::uint64_t seed = o.seed.value_or(0);
    bool ok = true;
    std::ostringstream text;
    for (const auto& name : names) {
        const CheckResult r = check_model(name, seed);
        const bool pass = r.assumptions && r.lyapunov <= 1e-10 && r.poisson <= 1e-7;
        ok = ok && pass;
        char line[256];
        std::snprintf(line, sizeof line, "%-12s assumptions %-4s lyapunov_residual %.3e poisson_residual %.3e %s\n",
                      name.c_str(), r.assumptions ? "ok" : "FAIL", r.lyapunov, r.poisson, pass ? "PASS" : "FAIL");
        text << line;
    }
    ExperimentConfig dummy;
    with_output(o, dummy, "check.txt", [&](std::ostream& os) { os << text.str(); });
    return ok ? 0 : 2;
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"Small-mass Langevin limits and rough-path lifts"};
    app.require_subcommand(1);
    CommonOptions opts;
    std::vector<std::pair<CLI::App*, int (*)(const CommonOptions&)>> commands = {
        {app.add_subcommand("simulate", "simulate one fast-slow path and dump it as CSV"), cmd_simulate},
        {app.add_subcommand("converge", "Monte Carlo convergence study"), cmd_converge},
        {app.add_subcommand("holder", "Holder scaling of lifted increments"), cmd_holder},
        {app.add_subcommand("average", "averaging-principle validation"), cmd_average},
        {app.add_subcommand("check", "assumption, Lyapunov and Poisson self-tests"), cmd_check},
    };
    for (auto& [sub, fn] : commands) add_common(sub, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        for (auto& [sub, fn] : commands)
            if (sub->parsed()) return fn(opts);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const UnknownModel& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

}  // namespace roughsk
