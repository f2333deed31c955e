#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "roughsk/averaging.hpp"
#include "roughsk/cli.hpp"
#include "roughsk/errors.hpp"
#include "roughsk/harness.hpp"
#include "roughsk/parallel.hpp"
#include "roughsk/report.hpp"
#include "roughsk/rng.hpp"
#include "roughsk/roughpath.hpp"

using namespace roughsk;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config(const std::string& model, int n_paths) {
    ExperimentConfig c;
    c.model_name = model;
    c.n_paths = n_paths;
    c.epsilons = {0.5, 0.25};
    return c;
}

std::string report_bytes(const ExperimentConfig& c) {
    std::ostringstream os;
    write_json(os, report_to_json(run_convergence(c)));
    return os.str();
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("roughsk_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "roughsk");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

SamplePath linear_path(const Vec& v, long n, double horizon) {
    SamplePath p;
    p.dt = horizon / n;
    p.values.resize(n + 1, v.size());
    for (long i = 0; i <= n; ++i) p.values.row(i) = (p.dt * i) * v.transpose();
    return p;
}

}  // namespace

TEST_CASE("estimate: mean and standard error") {
    const auto m = estimate("x", {1.0, 2.0, 3.0, 4.0});
    CHECK(m.mean == 2.5);
    CHECK(m.standard_error == Approx(std::sqrt(5.0 / 3.0 / 4.0)));
    CHECK(m.n == 4);
    CHECK(estimate("y", {7.0}).standard_error == 0.0);
    CHECK(estimate("z", {}).n == 0);
}

TEST_CASE("pairwise sum is exact on representable data and order-stable") {
    std::vector<double> v(1000);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.1 * static_cast<double>(i % 17);
    double naive = 0.0;
    for (double x : v) naive += x;
    CHECK(pairwise_sum(v) == Approx(naive).epsilon(1e-13));
    CHECK(pairwise_sum(v) == pairwise_sum(v));
}

TEST_CASE("parallel_for reports the lowest failing index") {
    std::vector<int> hit(50, 0);
    parallel_for(50, [&](std::size_t i) { hit[i] = 1; });
    CHECK(std::count(hit.begin(), hit.end(), 1) == 50);
    try {
        parallel_for(50, [](std::size_t i) {
            if (i == 7 || i == 30) throw std::runtime_error(std::to_string(i));
        });
        FAIL("no exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()) == "7");
    }
}

TEST_CASE("config validation") {
    ExperimentConfig c;
    CHECK_NOTHROW(c.validate());
    c.alpha = 0.6;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK_THROWS_AS(run_convergence(c), ConfigError);
    c = {};
    c.epsilons = {0.25, 0.5};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.n_paths = 1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.model_name = "nope";
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.observable.k = 3;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.fine_dt_rule.kind = FineDtRule::Kind::Fixed;
    c.fine_dt_rule.value = 0.3;  // larger than eps = 0.125
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("config JSON round trip and strictness") {
    const auto j = nlohmann::json::parse(R"({"model_name":"scalar_sin","epsilons":[0.5,0.25],
        "fine_dt_rule":{"kind":"fixed","dt":0.001},"coarsen":8,"horizon":2,"n_paths":10,"alpha":0.45,
        "p_moments":[2,4],"seed":9,"scheme":"euler_maruyama","observable":{"kind":"XYY","i":1,"k":1,"l":1}})");
    const auto c = config_from_json(j);
    CHECK(c.model_name == "scalar_sin");
    CHECK(c.fine_dt_rule.kind == FineDtRule::Kind::Fixed);
    CHECK(c.p_moments == std::vector<int>{2, 4});
    CHECK(c.scheme == Scheme::EulerMaruyama);
    CHECK(c.observable.kind == ObservableKind::XYY);
    const auto back = config_from_json(nlohmann::json::parse(config_to_json(c).dump()));
    CHECK(config_hash(back) == config_hash(c));
    CHECK(config_hash(back).size() == 16);

    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"colour":1})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"n_paths":"many"})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"alpha":0.6})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"scheme":"rk4"})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"([1,2])")), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);

    ExperimentConfig other = c;
    other.seed = 10;
    CHECK(config_hash(other) != config_hash(c));
}

TEST_CASE("grid plan tiles the horizon") {
    ExperimentConfig c;
    c.horizon = 1.0;
    c.coarsen = 16;
    const auto plan = plan_grid(c, 0.25);
    CHECK(plan.fine_steps == plan.coarse_steps * 16);
    CHECK(plan.fine_dt <= 0.05 * 0.0625 + 1e-15);
    CHECK(plan.fine_dt * plan.fine_steps == Approx(1.0));
}

TEST_CASE("identical configs give byte-identical reports") {
    const auto c = small_config("scalar_sin", 2);
    const std::string a = report_bytes(c);
    CHECK(a == report_bytes(c));
    auto other = c;
    other.seed = 1;
    CHECK(a != report_bytes(other));
}

TEST_CASE("report covers every epsilon with finite statistics") {
    auto c = small_config("diag_tanh", 8);
    c.p_moments = {1, 2};
    const auto r = run_convergence(c);
    REQUIRE(r.per_epsilon.size() == 2);
    for (const auto& rec : r.per_epsilon) {
        for (const auto& m : rec.metrics) {
            INFO(m.name);
            CHECK(std::isfinite(m.mean));
            CHECK(std::isfinite(m.standard_error));
            CHECK(m.n == 8);
        }
        for (const char* name : {"rho_alpha_p2", "holder_error_p1", "level2_error_p2", "sup_error_p2", "x_holder_p2",
                                 "y_moment_p2", "averaging_error", "ito_strat_gap", "ito_area_antisym_12",
                                 "limit_area_antisym_12"})
            CHECK_NOTHROW(rec.metric(name));
        CHECK_THROWS_AS(rec.metric("nope"), IndexError);
        // sup |e_t| <= T^alpha ||e||_alpha <= T^alpha rho_alpha, path by path
        for (int p : {1, 2})
            CHECK(rec.metric("rho_alpha_p" + std::to_string(p)).mean >=
                  rec.metric("sup_error_p" + std::to_string(p)).mean / std::pow(c.horizon, c.alpha * p));
    }
    const auto j = report_to_json(r);
    CHECK(j["meta"]["config_hash"] == config_hash(c));
    CHECK(j["per_epsilon"][1]["epsilon"] == 0.25);
    CHECK(j["empirical_rates"].contains("sup_error_p2"));
    std::ostringstream csv;
    write_report_csv(csv, r);
    CHECK(csv.str().rfind("epsilon,metric,mean,stderr,n\n", 0) == 0);
}

TEST_CASE("report numbers carry 17 significant digits") {
    ConvergenceReport r;
    r.meta.model = "m";
    EpsilonRecord rec;
    rec.epsilon = 0.1;
    rec.metrics.push_back(estimate("a", {1.0 / 3.0, 1.0 / 3.0}));
    r.per_epsilon.push_back(rec);
    std::ostringstream os;
    write_json(os, report_to_json(r));
    CHECK(os.str().find("\"epsilon\": 0.10000000000000001") != std::string::npos);
    CHECK(os.str().find("0.33333333333333331") != std::string::npos);
    CHECK(nlohmann::json::parse(os.str())["per_epsilon"][0]["metrics"]["a"]["n"] == 2);
}

TEST_CASE("empirical rates are log-log slopes") {
    ConvergenceReport r;
    for (double eps : {0.5, 0.25, 0.125}) {
        EpsilonRecord rec;
        rec.epsilon = eps;
        rec.metrics.push_back(estimate("quadratic", {eps * eps, eps * eps}));
        rec.metrics.push_back(estimate("signed", {eps - 0.3, eps - 0.3}));
        r.per_epsilon.push_back(rec);
    }
    const auto rates = empirical_rates(r);
    REQUIRE(rates.size() == 1);
    CHECK(rates[0].metric == "quadratic");
    CHECK(rates[0].slope == Approx(2.0).epsilon(1e-12));
    r.per_epsilon.resize(1);
    CHECK(empirical_rates(r).empty());
}

TEST_CASE("standard errors shrink like n^{-1/2}") {
    auto c = small_config("const_iso", 50);
    c.epsilons = {0.25};
    const double se50 = run_convergence(c).per_epsilon[0].metric("sup_error_p2").standard_error;
    c.n_paths = 200;
    const double se200 = run_convergence(c).per_epsilon[0].metric("sup_error_p2").standard_error;
    CHECK(se50 / se200 >= 1.0);
    CHECK(se50 / se200 <= 4.0);
}

TEST_CASE("identity friction: sup error decreases down the ladder") {
    auto c = small_config("const_iso", 100);
    c.epsilons = {0.5, 0.354, 0.25, 0.177, 0.125};
    const auto r = run_convergence(c);
    for (std::size_t e = 1; e < r.per_epsilon.size(); ++e)
        CHECK(r.per_epsilon[e].metric("sup_error_p2").mean < r.per_epsilon[e - 1].metric("sup_error_p2").mean);
}

TEST_CASE("a failing path aborts the run with its coordinates") {
    auto c = small_config("scalar_sin", 4);
    c.scheme = Scheme::EulerMaruyama;  // dt = 0.05 eps^2 breaks the explicit stability bound for |M| = 3
    try {
        run_convergence(c);
        FAIL("expected a failure");
    } catch (const PathFailure& e) {
        CHECK(e.epsilon == 0.5);
        CHECK(e.path == 0);
        CHECK(std::string(e.what()).find("Euler-Maruyama") != std::string::npos);
    }
}

TEST_CASE("Holder scaling of a Brownian surrogate") {
    // the limit path of the identity model is the driving Brownian motion
    const auto model = builtin_model("const_iso");
    std::vector<GridRoughPath> lifts;
    for (std::uint64_t k = 0; k < 300; ++k) {
        const auto noise = sample_noise(4096, 2, 1.0 / 1024, rng::stream_key(5, 0, k));
        lifts.push_back(ito_lift(simulate_limit(model, noise), 4));
    }
    const auto h = holder_scaling_from_lifts(lifts, 2, 0.0);
    CHECK(h.level1_slope == Approx(1.0).margin(0.1));
    CHECK(h.level2_slope == Approx(2.0).margin(0.2));
    CHECK_FALSE(h.degenerate);
    CHECK(h.level1_ci > 0.0);
}

TEST_CASE("Holder scaling of a deterministic linear path") {
    const auto lift = ito_lift(linear_path(Vec::Constant(2, 1.0), 256, 1.0), 2);
    const auto h = holder_scaling_from_lifts({lift, lift, lift}, 2, 0.0);
    CHECK(h.level1_slope == Approx(2.0).epsilon(1e-10));
    CHECK(h.degenerate);
    CHECK_THROWS_AS(holder_scaling_from_lifts({lift}, 2, 0.2), InsufficientData);
}

TEST_CASE("averaging validation on the identity model") {
    auto c = small_config("const_iso", 200);
    c.epsilons = {0.5, 0.25, 0.125};
    const auto diag = run_averaging_validation(c, unit_observable(ObservableKind::YY, 0, 0, 0));
    CHECK(diag.decreasing);
    // off-diagonal: the averaged integrand vanishes, the error is pure fluctuation
    const auto cross = run_averaging_validation(c, unit_observable(ObservableKind::YY, 0, 0, 1));
    CHECK(cross.decreasing);
}

TEST_CASE("velocity moments stay bounded as eps decreases") {
    for (const auto& name : builtin_model_names()) {
        const auto model = builtin_model(name);
        std::vector<double> sup_moment;
        for (double eps : {0.5, 0.25, 0.125}) {
            ExperimentConfig c;
            const auto plan = plan_grid(c, eps);
            const int n_paths = 2000;
            std::vector<std::vector<double>> y4(n_paths);
            parallel_for(n_paths, [&](std::size_t k) {
                const auto noise = sample_noise(plan.fine_steps, model.dim, plan.fine_dt, rng::stream_key(3, 0, k));
                const auto fs = simulate_fast_slow(model, eps, noise, Scheme::ExponentialEuler);
                for (long t = 0; t <= plan.coarse_steps; ++t)
                    y4[k].push_back(std::pow(fs.y.point(t * c.coarsen).norm(), 4));
            });
            double best = 0.0;
            for (long t = 0; t <= plan.coarse_steps; ++t) {
                double s = 0.0;
                for (const auto& row : y4) s += row[t];
                best = std::max(best, s / n_paths);
            }
            sup_moment.push_back(best);
        }
        INFO(name << " " << sup_moment[0] << " " << sup_moment[1] << " " << sup_moment[2]);
        const auto [lo, hi] = std::minmax_element(sup_moment.begin(), sup_moment.end());
        CHECK(*hi < 3.0 * *lo);
    }
}

TEST_CASE("Holder norms of the slow path stay below the limit level") {
    auto c = small_config("scalar_sin", 500);
    c.epsilons = {0.5, 0.354, 0.25, 0.177, 0.125};
    c.fine_dt_rule = {FineDtRule::Kind::Fixed, 0.05 * 0.125 * 0.125};
    c.coarsen = 32;
    const auto r = run_convergence(c);

    const auto model = builtin_model("scalar_sin");
    const auto plan = plan_grid(c, 0.125);
    std::vector<double> norms(c.n_paths);
    parallel_for(norms.size(), [&](std::size_t k) {
        const auto noise = sample_noise(plan.fine_steps, 1, plan.fine_dt, rng::stream_key(11, 0, k));
        norms[k] = std::pow(holder_norm(coarsen(simulate_limit(model, noise), c.coarsen), c.alpha), 2);
    });
    const double limit = pairwise_sum(norms) / c.n_paths;
    for (const auto& rec : r.per_epsilon) {
        INFO(rec.epsilon << " " << rec.metric("x_holder_p2").mean << " limit " << limit);
        CHECK(rec.metric("x_holder_p2").mean < 1.2 * limit);
    }
}

TEST_CASE("CLI exit codes") {
    const auto dir = scratch_dir("cli");
    CHECK(run_cli({"check", "--model", "const_iso", "--quiet", "--out", (dir / "check.txt").string()}) == 0);
    CHECK(slurp(dir / "check.txt").find("PASS") != std::string::npos);
    CHECK(run_cli({"converge", "--config", (dir / "missing.json").string()}) == 1);
    CHECK(run_cli({}) == 1);
    CHECK(run_cli({"frobnicate"}) == 1);
    CHECK(run_cli({"simulate", "--eps", "abc"}) == 1);
    CHECK(run_cli({"simulate", "--model", "nope"}) == 1);
    CHECK(run_cli({"simulate", "--eps", "2.0"}) == 1);
    {
        std::ofstream(dir / "bad.json") << "{ not json";
        std::ofstream(dir / "unknown.json") << R"({"model_name":"const_iso","colour":3})";
        std::ofstream(dir / "alpha.json") << R"({"alpha":0.6})";
    }
    for (const char* f : {"bad.json", "unknown.json", "alpha.json"})
        CHECK(run_cli({"converge", "--config", (dir / f).string()}) == 1);
    // runtime failure: explicit scheme with a step beyond its stability bound
    std::ofstream(dir / "unstable.json") << R"({"model_name":"scalar_sin","scheme":"euler_maruyama","n_paths":2,"epsilons":[0.5]})";
    CHECK(run_cli({"converge", "--quiet", "--config", (dir / "unstable.json").string(), "--out", (dir / "r.json").string()}) == 2);
    // unwritable output
    CHECK(run_cli({"simulate", "--quiet", "--out", (dir / "no/such/dir/p.csv").string()}) == 2);
}

TEST_CASE("CLI simulate is deterministic") {
    const auto dir = scratch_dir("simulate");
    const std::vector<std::string> args = {"simulate", "--model", "scalar_sin", "--eps", "0.25", "--seed", "7", "--quiet", "--out"};
    auto a = args, b = args;
    a.push_back((dir / "p1.csv").string());
    b.push_back((dir / "p2.csv").string());
    REQUIRE(run_cli(a) == 0);
    REQUIRE(run_cli(b) == 0);
    const auto text = slurp(dir / "p1.csv");
    CHECK(text == slurp(dir / "p2.csv"));
    CHECK(text.rfind("t,x1,y1\n", 0) == 0);
}

TEST_CASE("CLI converge, holder and average write JSON") {
    const auto dir = scratch_dir("runs");
    std::ofstream(dir / "c.json") << R"({"model_name":"const_iso","n_paths":4,"epsilons":[0.25,0.125],"horizon":16,"outputs":")"
                                   << (dir / "out").string() << R"("})";
    const auto cfg = (dir / "c.json").string();
    REQUIRE(run_cli({"converge", "--quiet", "--config", cfg}) == 0);
    CHECK(fs::exists(dir / "out" / "report.json"));
    CHECK(fs::exists(dir / "out" / "report.csv"));
    const auto first = slurp(dir / "out" / "report.json");
    REQUIRE(run_cli({"converge", "--quiet", "--config", cfg}) == 0);
    CHECK(first == slurp(dir / "out" / "report.json"));
    REQUIRE(run_cli({"holder", "--quiet", "--config", cfg}) == 0);
    CHECK(nlohmann::json::parse(slurp(dir / "out" / "holder.json")).size() == 2);
    REQUIRE(run_cli({"average", "--quiet", "--config", cfg, "--eps", "0.25"}) == 0);
    CHECK(nlohmann::json::parse(slurp(dir / "out" / "averaging.json"))["per_epsilon"].size() == 1);
}
