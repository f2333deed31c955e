#include "roughsk/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "roughsk/errors.hpp"

namespace roughsk {

double FineDtRule::target_dt(double epsilon) const {
    return kind == Kind::Fixed ? value : value * epsilon * epsilon;
}

ScalarObservableSpec ObservableConfig::spec() const {
    return unit_observable(kind, i - 1, k - 1, l - 1);
}

void ExperimentConfig::validate() const {
    try {
        (void)builtin_model(model_name);
    } catch (const UnknownModel& e) {
        throw ConfigError(e.what());
    }
    if (epsilons.empty()) throw ConfigError("epsilons must not be empty");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0 && epsilons[i] <= 1.0)) throw ConfigError("every epsilon must lie in (0, 1]");
        if (i > 0 && !(epsilons[i] < epsilons[i - 1])) throw ConfigError("epsilons must be strictly decreasing");
    }
    if (!(fine_dt_rule.value > 0.0) || !std::isfinite(fine_dt_rule.value))
        throw ConfigError("fine_dt_rule value must be positive");
    if (coarsen < 2) throw ConfigError("coarsen must be >= 2");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon must be positive");
    if (n_paths < 2) throw ConfigError("n_paths must be >= 2");
    if (!(alpha > 1.0 / 3.0 && alpha < 0.5)) throw ConfigError("alpha must lie in the open interval (1/3, 1/2)");
    if (p_moments.empty()) throw ConfigError("p_moments must not be empty");
    for (int p : p_moments)
        if (p < 1) throw ConfigError("p_moments entries must be >= 1");
    if (holder_min_gap < 0.0) throw ConfigError("holder_min_gap must be >= 0");
    const int d = builtin_model(model_name).dim;
    for (int idx : {observable.k, observable.l})
        if (idx < 1 || idx > d) throw ConfigError("observable index out of range");
    if (observable.kind == ObservableKind::XYY && (observable.i < 1 || observable.i > d))
        throw ConfigError("observable index out of range");
    for (double eps : epsilons) {
        const double dt = fine_dt_rule.target_dt(eps);
        if (scheme == Scheme::ExponentialEuler && dt > eps)
            throw ConfigError("fine dt exceeds epsilon for epsilon = " + std::to_string(eps));
    }
}

GridPlan plan_grid(const ExperimentConfig& config, double epsilon) {
    const double target = config.fine_dt_rule.target_dt(epsilon);
    GridPlan plan;
    plan.coarse_steps = std::max(1L, static_cast<long>(std::ceil(config.horizon / (target * config.coarsen) - 1e-9)));
    plan.fine_steps = plan.coarse_steps * config.coarsen;
    plan.fine_dt = config.horizon / static_cast<double>(plan.fine_steps);
    return plan;
}

std::string scheme_name(Scheme s) {
    return s == Scheme::EulerMaruyama ? "euler_maruyama" : "exponential_euler";
}

Scheme parse_scheme(const std::string& name) {
    if (name == "euler_maruyama") return Scheme::EulerMaruyama;
    if (name == "exponential_euler") return Scheme::ExponentialEuler;
    throw ConfigError("unknown scheme '" + name + "'");
}

namespace {

template <class T>
T get_as(const nlohmann::json& j, const char* key) {
    try {
        return j.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("config key '") + key + "' has the wrong type");
    }
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
    reject_unknown(j, {"model_name", "epsilons", "fine_dt_rule", "coarsen", "horizon", "n_paths", "alpha",
                       "p_moments", "seed", "scheme", "outputs", "observable", "holder_min_gap"},
                   "config");
    ExperimentConfig c;
    if (j.contains("model_name")) c.model_name = get_as<std::string>(j["model_name"], "model_name");
    if (j.contains("epsilons")) c.epsilons = get_as<std::vector<double>>(j["epsilons"], "epsilons");
    if (j.contains("fine_dt_rule")) {
        const auto& r = j["fine_dt_rule"];
        reject_unknown(r, {"kind", "c", "dt"}, "fine_dt_rule");
        const auto kind = r.contains("kind") ? get_as<std::string>(r["kind"], "fine_dt_rule.kind") : "eps_scaled";
        if (kind == "eps_scaled") {
            if (r.contains("dt")) throw ConfigError("fine_dt_rule 'eps_scaled' takes 'c', not 'dt'");
            c.fine_dt_rule.kind = FineDtRule::Kind::EpsScaled;
            c.fine_dt_rule.value = r.contains("c") ? get_as<double>(r["c"], "fine_dt_rule.c") : 0.05;
        } else if (kind == "fixed") {
            if (r.contains("c") || !r.contains("dt")) throw ConfigError("fine_dt_rule 'fixed' needs 'dt'");
            c.fine_dt_rule.kind = FineDtRule::Kind::Fixed;
            c.fine_dt_rule.value = get_as<double>(r["dt"], "fine_dt_rule.dt");
        } else {
            throw ConfigError("fine_dt_rule kind must be 'eps_scaled' or 'fixed'");
        }
    }
    if (j.contains("coarsen")) c.coarsen = get_as<int>(j["coarsen"], "coarsen");
    if (j.contains("horizon")) c.horizon = get_as<double>(j["horizon"], "horizon");
    if (j.contains("n_paths")) c.n_paths = get_as<int>(j["n_paths"], "n_paths");
    if (j.contains("alpha")) c.alpha = get_as<double>(j["alpha"], "alpha");
    if (j.contains("p_moments")) c.p_moments = get_as<std::vector<int>>(j["p_moments"], "p_moments");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("scheme")) c.scheme = parse_scheme(get_as<std::string>(j["scheme"], "scheme"));
    if (j.contains("outputs")) c.outputs = get_as<std::string>(j["outputs"], "outputs");
    if (j.contains("observable")) {
        const auto& o = j["observable"];
        reject_unknown(o, {"kind", "i", "k", "l"}, "observable");
        const auto kind = o.contains("kind") ? get_as<std::string>(o["kind"], "observable.kind") : "YY";
        if (kind == "XYY") c.observable.kind = ObservableKind::XYY;
        else if (kind == "YY") c.observable.kind = ObservableKind::YY;
        else throw ConfigError("observable kind must be 'XYY' or 'YY'");
        if (o.contains("i")) c.observable.i = get_as<int>(o["i"], "observable.i");
        if (o.contains("k")) c.observable.k = get_as<int>(o["k"], "observable.k");
        if (o.contains("l")) c.observable.l = get_as<int>(o["l"], "observable.l");
    }
    if (j.contains("holder_min_gap")) c.holder_min_gap = get_as<double>(j["holder_min_gap"], "holder_min_gap");
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
    nlohmann::ordered_json j;
    j["model_name"] = c.model_name;
    j["epsilons"] = c.epsilons;
    nlohmann::ordered_json rule;
    if (c.fine_dt_rule.kind == FineDtRule::Kind::EpsScaled) {
        rule["kind"] = "eps_scaled";
        rule["c"] = c.fine_dt_rule.value;
    } else {
        rule["kind"] = "fixed";
        rule["dt"] = c.fine_dt_rule.value;
    }
    j["fine_dt_rule"] = rule;
    j["coarsen"] = c.coarsen;
    j["horizon"] = c.horizon;
    j["n_paths"] = c.n_paths;
    j["alpha"] = c.alpha;
    j["p_moments"] = c.p_moments;
    j["seed"] = c.seed;
    j["scheme"] = scheme_name(c.scheme);
    j["outputs"] = c.outputs;
    nlohmann::ordered_json obs;
    obs["kind"] = c.observable.kind == ObservableKind::XYY ? "XYY" : "YY";
    obs["i"] = c.observable.i;
    obs["k"] = c.observable.k;
    obs["l"] = c.observable.l;
    j["observable"] = obs;
    j["holder_min_gap"] = c.holder_min_gap;
    return j;
}

std::string config_hash(const ExperimentConfig& config) {
    const std::string text = config_to_json(config).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace roughsk
