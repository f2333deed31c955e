#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "roughsk/types.hpp"

namespace roughsk {

using MatrixField = std::function<Mat(const Vec&)>;
using VectorField = std::function<Vec(const Vec&)>;
using ScalarField = std::function<double(const Vec&)>;
/// x -> (dM/dx_1, ..., dM/dx_d).
using MatrixGradientField = std::function<std::vector<Mat>(const Vec&)>;

/// Central-difference step used whenever a model derivative is synthesised.
inline constexpr double kGradientStep = 1e-5;

/// A Langevin problem instance: friction M(x), force F(x) and the bounds the
/// convergence theory assumes about them.
struct ModelSpec {
    std::string name;
    int dim = 1;
    MatrixField friction;
    MatrixGradientField friction_grad;  ///< empty: synthesised by central differences
    VectorField force;
    double lambda = 1.0;   ///< lower bound on the symmetric part of M
    double horizon = 1.0;  ///< T
    double force_bound = std::numeric_limits<double>::infinity();
    /// Declared Lipschitz constant shared by M, M^{-1}, dM^{-1} and F.
    double lipschitz_bound = std::numeric_limits<double>::infinity();
    /// Upper bound on the spectral norm of M; estimated at 0 when absent.
    std::optional<double> friction_norm_bound;
    /// M does not depend on x. Lets simulators skip per-step refactorisation.
    bool constant_friction = false;

    Mat friction_at(const Vec& x) const;
    Vec force_at(const Vec& x) const;
    /// dM/dx_j for j = 0..d-1, analytic when friction_grad is set.
    std::vector<Mat> friction_gradient(const Vec& x) const;
    /// d(M^{-1})/dx_j = -M^{-1} (dM/dx_j) M^{-1}.
    std::vector<Mat> inverse_friction_gradient(const Vec& x) const;
    /// Largest-eigenvalue estimate of M used by the explicit stability guard.
    double friction_norm_estimate() const;
};

enum class ObservableKind { XYY, YY };

/// f(x, y) = x_i y_k y_l g(x) (XYY) or y_k y_l g(x) (YY). Indices are 0-based.
struct ScalarObservableSpec {
    ObservableKind kind = ObservableKind::YY;
    int i = 0;
    int k = 0;
    int l = 0;
    ScalarField g;
    VectorField g_grad;

    double g_at(const Vec& x) const;
    double prefactor(const Vec& x) const;  ///< x_i g(x) or g(x)
    double value(const Vec& x, const Vec& y) const;
    void validate(int dim) const;
};

/// g == 1 observable of the given kind and indices.
ScalarObservableSpec unit_observable(ObservableKind kind, int i, int k, int l);

struct AssumptionCheck {
    std::string name;
    bool passed = true;
    double value = 0.0;  ///< worst observed quantity
    double bound = 0.0;
    Vec witness;         ///< probe (or first probe of the pair) attaining `value`
};

struct AssumptionReport {
    bool passed = true;
    double min_sym_eigenvalue = std::numeric_limits<double>::infinity();
    Vec min_eigen_witness;
    std::vector<AssumptionCheck> checks;

    const AssumptionCheck& check(const std::string& name) const;
};

/// Verifies (A1)-(A4) on a finite probe set. Global Lipschitz bounds cannot be
/// established from samples, so a pass is a necessary condition only. Lipschitz
/// quotients use all probe pairs when there are at most 4096 of them, otherwise
/// 4096 pairs drawn from `rng_seed`.
AssumptionReport check_assumptions(const ModelSpec& model, const std::vector<Vec>& probes,
                                   std::uint64_t rng_seed);

/// Uniform probe cloud in [lo, hi]^dim.
std::vector<Vec> probe_cloud(int dim, std::size_t n, double lo, double hi, std::uint64_t seed);

/// Registry: const_iso, const_rot2, scalar_sin, diag_tanh.
ModelSpec builtin_model(const std::string& name);
std::vector<std::string> builtin_model_names();

}  // namespace roughsk
