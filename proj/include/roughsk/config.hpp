#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "roughsk/models.hpp"
#include "roughsk/sde.hpp"

namespace roughsk {

/// Fine simulation step: fixed, or c * eps^2 so the cost per unit time stays
/// constant at fixed resolution of the fast scale.
struct FineDtRule {
    enum class Kind { Fixed, EpsScaled };
    Kind kind = Kind::EpsScaled;
    double value = 0.05;

    double target_dt(double epsilon) const;
};

/// Observable selectable from a config file: g == 1, indices 1-based.
struct ObservableConfig {
    ObservableKind kind = ObservableKind::YY;
    int i = 1;
    int k = 1;
    int l = 1;

    ScalarObservableSpec spec() const;
};

struct ExperimentConfig {
    std::string model_name = "const_iso";
    std::vector<double> epsilons = {0.5, 0.354, 0.25, 0.177, 0.125};
    FineDtRule fine_dt_rule;
    int coarsen = 16;
    double horizon = 1.0;
    int n_paths = 100;
    double alpha = 0.4;
    std::vector<int> p_moments = {2};
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::ExponentialEuler;
    std::string outputs;
    ObservableConfig observable;
    /// Smallest time gap in Holder-scaling regressions; 0 picks 8 eps^2 / lambda,
    /// where the ballistic correction to E|X_{s,t}|^2 is below about 12%.
    double holder_min_gap = 0.0;

    /// Throws ConfigError on any violated invariant.
    void validate() const;
};

/// Uniform grid for one epsilon: the fine step is shrunk from the rule's
/// target until [0, T] is tiled by whole coarse steps.
struct GridPlan {
    double fine_dt = 0.0;
    long fine_steps = 0;
    long coarse_steps = 0;
};
GridPlan plan_grid(const ExperimentConfig& config, double epsilon);

/// Parses a config object. Missing keys take defaults; unknown keys, wrong
/// types and invalid values raise ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::ordered_json config_to_json(const ExperimentConfig& config);

/// FNV-1a 64 of the canonical config JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

std::string scheme_name(Scheme s);
Scheme parse_scheme(const std::string& name);

}  // namespace roughsk
