#include "roughsk/roughpath.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "roughsk/errors.hpp"
#include "roughsk/linalg.hpp"

namespace roughsk {

Mat GridRoughPath::step_area(Eigen::Index i) const {
    const int d = dim();
    if (i < 0 || i >= steps()) throw IndexError("step_area index out of range");
    return Eigen::Map<const RowMat>(step_areas.data() + i * d * d, d, d);
}

SamplePath coarsen(const SamplePath& path, int refinement) {
    if (refinement < 1) throw GridMismatch("refinement must be >= 1");
    const Eigen::Index n = path.steps();
    if (n % refinement != 0)
        throw GridMismatch("path with " + std::to_string(n) + " steps cannot be coarsened by " +
                           std::to_string(refinement));
    SamplePath out;
    out.t0 = path.t0;
    out.dt = path.dt * refinement;
    out.values.resize(n / refinement + 1, path.dim());
    for (Eigen::Index c = 0; c <= n / refinement; ++c) out.values.row(c) = path.values.row(c * refinement);
    return out;
}

namespace {

enum class Weight { Left, Mid };

GridRoughPath lift_impl(const SamplePath& fine, int refinement, Weight weight,
                        LiftConvention convention, const ModelSpec* model) {
    if (fine.steps() < 1) throw InsufficientData("a lift needs at least two grid points");
    GridRoughPath rp;
    rp.base = coarsen(fine, refinement);
    rp.convention = convention;
    const int d = fine.dim();
    const Eigen::Index nc = rp.base.steps();
    rp.step_areas.assign(static_cast<std::size_t>(nc * d * d), 0.0);
    const auto& v = fine.values;

    Mat correction;
    if (model && model->constant_friction) correction = area_correction_integrand(*model, fine.point(0));

    for (Eigen::Index c = 0; c < nc; ++c) {
        double* area = rp.step_areas.data() + c * d * d;
        const Eigen::Index s = c * refinement;
        for (Eigen::Index i = s; i < s + refinement; ++i) {
            for (int a = 0; a < d; ++a) {
                const double base = weight == Weight::Left ? v(i, a) - v(s, a)
                                                           : 0.5 * (v(i, a) + v(i + 1, a)) - v(s, a);
                for (int b = 0; b < d; ++b) area[a * d + b] += base * (v(i + 1, b) - v(i, b));
            }
            if (model) {
                const Mat corr = model->constant_friction
                                     ? correction
                                     : area_correction_integrand(*model, fine.point(i));
                for (int a = 0; a < d; ++a)
                    for (int b = 0; b < d; ++b) area[a * d + b] += corr(a, b) * fine.dt;
            }
        }
    }
    return rp;
}

}  // namespace

GridRoughPath ito_lift(const SamplePath& fine, int refinement) {
    return lift_impl(fine, refinement, Weight::Left, LiftConvention::Ito, nullptr);
}

GridRoughPath stratonovich_lift(const SamplePath& fine, int refinement) {
    return lift_impl(fine, refinement, Weight::Mid, LiftConvention::Stratonovich, nullptr);
}

GridRoughPath limit_lift(const SamplePath& fine, const ModelSpec& model, int refinement) {
    if (fine.dim() != model.dim) throw GridMismatch("limit_lift: path and model dimensions differ");
    return lift_impl(fine, refinement, Weight::Mid, LiftConvention::LimitLift, &model);
}

Mat chen_area(const GridRoughPath& rp, Eigen::Index i, Eigen::Index j) {
    if (i < 0 || j <= i || j > rp.steps())
        throw IndexError("chen_area needs 0 <= i < j <= " + std::to_string(rp.steps()));
    const auto& x = rp.base.values;
    Mat area = rp.step_area(i);
    for (Eigen::Index t = i + 1; t < j; ++t)
        area += (x.row(t) - x.row(i)).transpose() * (x.row(t + 1) - x.row(t)) + rp.step_area(t);
    return area;
}

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
}

std::vector<double> gap_powers(Eigen::Index n, double dt, double exponent) {
    std::vector<double> p(static_cast<std::size_t>(n + 1), 0.0);
    for (Eigen::Index g = 1; g <= n; ++g) p[g] = std::pow(static_cast<double>(g) * dt, exponent);
    return p;
}

double level1_scan(const RowMat& x, const RowMat* y, double dt, double alpha) {
    const Eigen::Index n = x.rows() - 1;
    const int d = static_cast<int>(x.cols());
    const auto pw = gap_powers(n, dt, alpha);
    auto incr2 = [&](Eigen::Index i, Eigen::Index j) {
        double s = 0.0;
        for (int a = 0; a < d; ++a) {
            double v = x(j, a) - x(i, a);
            if (y) v -= (*y)(j, a) - (*y)(i, a);
            s += v * v;
        }
        return s;
    };
    double best = 0.0;
    if (n <= kExhaustivePairLimit) {
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j <= n; ++j) best = std::max(best, std::sqrt(incr2(i, j)) / pw[j - i]);
    } else {
        for (Eigen::Index g = 1; g <= n; g *= 2)
            for (Eigen::Index i = 0; i + g <= n; ++i) best = std::max(best, std::sqrt(incr2(i, i + g)) / pw[g]);
    }
    return best;
}

// Prefix areas P_t = XX_{0,t} (flattened row-major), used for the dyadic scan:
// XX_{s,t} = P_t - P_s - X_{0,s} (x) X_{s,t}.
std::vector<double> prefix_areas(const GridRoughPath& rp) {
    const int d = rp.dim();
    const Eigen::Index n = rp.steps();
    const auto& x = rp.base.values;
    std::vector<double> p(static_cast<std::size_t>((n + 1) * d * d), 0.0);
    for (Eigen::Index t = 0; t < n; ++t) {
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                p[(t + 1) * d * d + a * d + b] = p[t * d * d + a * d + b] +
                                                 rp.step_areas[t * d * d + a * d + b] +
                                                 (x(t, a) - x(0, a)) * (x(t + 1, b) - x(t, b));
    }
    return p;
}

double level2_scan(const GridRoughPath& a, const GridRoughPath* b, double alpha) {
    const Eigen::Index n = a.steps();
    const int d = a.dim();
    const std::size_t dd = static_cast<std::size_t>(d) * d;
    const auto pw = gap_powers(n, a.base.dt, 2.0 * alpha);
    const auto& xa = a.base.values;
    double best = 0.0;

    if (n <= kExhaustivePairLimit) {
        std::vector<double> acc_a(dd), acc_b(dd);
        for (Eigen::Index i = 0; i < n; ++i) {
            std::fill(acc_a.begin(), acc_a.end(), 0.0);
            std::fill(acc_b.begin(), acc_b.end(), 0.0);
            for (Eigen::Index j = i; j < n; ++j) {
                // acc <- XX_{i,j+1} = XX_{i,j} + XX_{j,j+1} + X_{i,j} (x) X_{j,j+1}
                double s = 0.0;
                for (int p = 0; p < d; ++p)
                    for (int q = 0; q < d; ++q) {
                        const std::size_t k = static_cast<std::size_t>(p * d + q);
                        acc_a[k] += a.step_areas[j * dd + k] +
                                    (xa(j, p) - xa(i, p)) * (xa(j + 1, q) - xa(j, q));
                        double diff = acc_a[k];
                        if (b) {
                            const auto& xb = b->base.values;
                            acc_b[k] += b->step_areas[j * dd + k] +
                                        (xb(j, p) - xb(i, p)) * (xb(j + 1, q) - xb(j, q));
                            diff -= acc_b[k];
                        }
                        s += diff * diff;
                    }
                best = std::max(best, std::sqrt(s) / pw[j + 1 - i]);
            }
        }
        return best;
    }

    const auto pa = prefix_areas(a);
    std::vector<double> pb;
    if (b) pb = prefix_areas(*b);
    auto area = [&](const std::vector<double>& p, const RowMat& x, Eigen::Index s, Eigen::Index t,
                    int r, int c) {
        return p[t * dd + r * d + c] - p[s * dd + r * d + c] - (x(s, r) - x(0, r)) * (x(t, c) - x(s, c));
    };
    for (Eigen::Index g = 1; g <= n; g *= 2)
        for (Eigen::Index i = 0; i + g <= n; ++i) {
            double s = 0.0;
            for (int r = 0; r < d; ++r)
                for (int c = 0; c < d; ++c) {
                    double diff = area(pa, xa, i, i + g, r, c);
                    if (b) diff -= area(pb, b->base.values, i, i + g, r, c);
                    s += diff * diff;
                }
            best = std::max(best, std::sqrt(s) / pw[g]);
        }
    return best;
}

void check_shared_grid(const GridRoughPath& a, const GridRoughPath& b) {
    if (a.steps() != b.steps() || a.dim() != b.dim() || a.base.dt != b.base.dt || a.base.t0 != b.base.t0)
        throw GridMismatch("rough paths do not share a grid");
}

}  // namespace

double holder_norm(const SamplePath& path, double alpha) {
    check_alpha(alpha);
    if (path.steps() < 1) return 0.0;
    return level1_scan(path.values, nullptr, path.dt, alpha);
}

double level2_norm(const GridRoughPath& rp, double alpha) {
    check_alpha(alpha);
    if (rp.steps() < 1) return 0.0;
    return level2_scan(rp, nullptr, alpha);
}

RoughDistance rough_distance(const GridRoughPath& a, const GridRoughPath& b, double alpha) {
    check_alpha(alpha);
    check_shared_grid(a, b);
    if (a.steps() < 1) return {};
    return {level1_scan(a.base.values, &b.base.values, a.base.dt, alpha), level2_scan(a, &b, alpha)};
}

double rho_alpha(const GridRoughPath& a, const GridRoughPath& b, double alpha) {
    return rough_distance(a, b, alpha).total();
}

void write_lift_csv(std::ostream& os, const GridRoughPath& rp, Eigen::Index max_gap) {
    const int d = rp.dim();
    os << "i,j";
    for (int a = 1; a <= d; ++a)
        for (int b = 1; b <= d; ++b) os << ",a" << a << b;
    os << '\n';
    char buf[40];
    const Eigen::Index n = rp.steps();
    for (Eigen::Index i = 0; i < n; ++i) {
        Mat area = Mat::Zero(d, d);
        const auto& x = rp.base.values;
        for (Eigen::Index j = i + 1; j <= n && (max_gap == 0 || j - i <= max_gap); ++j) {
            area += (x.row(j - 1) - x.row(i)).transpose() * (x.row(j) - x.row(j - 1)) + rp.step_area(j - 1);
            os << i << ',' << j;
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) {
                    std::snprintf(buf, sizeof buf, "%.17g", area(a, b));
                    os << ',' << buf;
                }
            os << '\n';
        }
    }
}

}  // namespace roughsk
