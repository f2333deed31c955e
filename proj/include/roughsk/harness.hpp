#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "roughsk/config.hpp"
#include "roughsk/errors.hpp"
#include "roughsk/roughpath.hpp"

namespace roughsk {

/// A simulation error tagged with the (epsilon, path) that produced it.
class PathFailure : public Error {
public:
    PathFailure(double epsilon, std::size_t path, const std::string& what);
    double epsilon;
    std::size_t path;
};

struct MetricEstimate {
    std::string name;
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t n = 0;
};

/// Mean and standard error (sample sd / sqrt n) with pairwise summation.
MetricEstimate estimate(std::string name, const std::vector<double>& samples);

struct EpsilonRecord {
    double epsilon = 0.0;
    GridPlan grid;
    std::vector<MetricEstimate> metrics;

    const MetricEstimate& metric(const std::string& name) const;
};

struct ReportMeta {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string model;
    std::string scheme;
    double alpha = 0.0;
    double horizon = 0.0;
    int n_paths = 0;
    int coarsen = 0;
    double wall_time_seconds = 0.0;  ///< not serialised: reports stay byte-deterministic
};

/// Per-epsilon Monte Carlo estimates. Metric names (p from p_moments):
///   rho_alpha_p{p}        rho_alpha(X^eps lift, limit lift)^p
///   holder_error_p{p}     ||X^eps - X||_alpha^p
///   level2_error_p{p}     ||XX^eps - XX||_{2 alpha}^p
///   sup_error_p{p}        (max over coarse nodes |X^eps - X|)^p
///   x_holder_p{p}         ||X^eps||_alpha^p
///   y_moment_p{p}         sup_t E|Y^eps_t|^p over coarse nodes
///   averaging_error       |int f(X^eps, Y^eps) - fbar(X^eps) ds|
///   ito_strat_gap         |XX^eps_{0,T} - Strat(X)_{0,T}|
///   ito_area_antisym_{a}{b}, limit_area_antisym_{a}{b}   (a < b, 1-based)
///                         antisymmetric part of the level-2 increment over [0, T]
struct ConvergenceReport {
    ReportMeta meta;
    std::vector<EpsilonRecord> per_epsilon;
};

/// Path k of epsilon index e uses the noise stream rng::stream_key(seed, e, k).
/// The fast-slow system and the limit SDE share that noise. The epsilon path
/// gets the Ito lift, the limit path the corrected limit lift, both on the
/// grid coarsened by config.coarsen. Deterministic for a given config.
ConvergenceReport run_convergence(const ExperimentConfig& config);

struct EmpiricalRate {
    std::string metric;
    double slope = 0.0;  ///< least-squares slope of log(mean) against log(eps)
};

/// Fitted power of eps for every metric whose mean is positive on the whole
/// ladder. Descriptive only: no rate is asserted anywhere. Empty for fewer
/// than two epsilons.
std::vector<EmpiricalRate> empirical_rates(const ConvergenceReport& report);

struct HolderScaling {
    double epsilon = 0.0;
    int p = 2;
    std::vector<double> gaps;            ///< time gaps used in the fit
    std::vector<double> level1_moments;  ///< E|X_{s,s+h}|^p averaged over s
    std::vector<double> level2_moments;  ///< E|XX_{s,s+h}|^p averaged over s
    double level1_slope = 0.0;
    double level1_ci = 0.0;  ///< half-width, 2 batch standard errors
    double level2_slope = 0.0;
    double level2_ci = 0.0;
    bool degenerate = false;  ///< no variation between paths (deterministic input)
};

/// Log-log regression of the moments of level-1 and level-2 increments over
/// dyadic coarse gaps h >= min_gap with h <= T/2. Needs 4 gaps.
HolderScaling holder_scaling_from_lifts(const std::vector<GridRoughPath>& lifts, int p, double min_gap);

/// Holder scaling of the Ito-lifted fast-slow path for every configured
/// epsilon and every p in p_moments.
std::vector<HolderScaling> run_holder_scaling(const ExperimentConfig& config);

struct AveragingRecord {
    double epsilon = 0.0;
    MetricEstimate error;
};

struct AveragingValidation {
    std::vector<AveragingRecord> per_epsilon;
    bool decreasing = false;  ///< strictly decreasing mean error down the ladder
};

AveragingValidation run_averaging_validation(const ExperimentConfig& config,
                                             const ScalarObservableSpec& obs);

}  // namespace roughsk
