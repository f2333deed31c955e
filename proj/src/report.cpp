#include "roughsk/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace roughsk {

namespace {

nlohmann::ordered_json metric_json(const MetricEstimate& m) {
    nlohmann::ordered_json j;
    j["mean"] = m.mean;
    j["stderr"] = m.standard_error;
    j["n"] = m.n;
    return j;
}

std::string g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

nlohmann::ordered_json report_to_json(const ConvergenceReport& report) {
    nlohmann::ordered_json meta;
    meta["config_hash"] = report.meta.config_hash;
    meta["seed"] = report.meta.seed;
    meta["model"] = report.meta.model;
    meta["scheme"] = report.meta.scheme;
    meta["alpha"] = report.meta.alpha;
    meta["horizon"] = report.meta.horizon;
    meta["n_paths"] = report.meta.n_paths;
    meta["coarsen"] = report.meta.coarsen;

    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& rec : report.per_epsilon) {
        nlohmann::ordered_json row;
        row["epsilon"] = rec.epsilon;
        row["fine_dt"] = rec.grid.fine_dt;
        row["fine_steps"] = rec.grid.fine_steps;
        row["coarse_steps"] = rec.grid.coarse_steps;
        nlohmann::ordered_json metrics;
        for (const auto& m : rec.metrics) metrics[m.name] = metric_json(m);
        row["metrics"] = std::move(metrics);
        rows.push_back(std::move(row));
    }
    nlohmann::ordered_json j;
    j["meta"] = std::move(meta);
    j["per_epsilon"] = std::move(rows);
    nlohmann::ordered_json rates = nlohmann::ordered_json::object();
    for (const auto& r : empirical_rates(report)) rates[r.metric] = r.slope;
    j["empirical_rates"] = std::move(rates);
    return j;
}

nlohmann::ordered_json holder_to_json(const std::vector<HolderScaling>& scaling) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& h : scaling) {
        nlohmann::ordered_json j;
        j["epsilon"] = h.epsilon;
        j["p"] = h.p;
        j["gaps"] = h.gaps;
        j["level1_moments"] = h.level1_moments;
        j["level2_moments"] = h.level2_moments;
        j["level1_slope"] = h.level1_slope;
        j["level1_ci"] = h.level1_ci;
        j["level2_slope"] = h.level2_slope;
        j["level2_ci"] = h.level2_ci;
        j["degenerate"] = h.degenerate;
        arr.push_back(std::move(j));
    }
    return arr;
}

nlohmann::ordered_json averaging_to_json(const AveragingValidation& validation) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : validation.per_epsilon) {
        nlohmann::ordered_json row;
        row["epsilon"] = r.epsilon;
        row["error"] = metric_json(r.error);
        rows.push_back(std::move(row));
    }
    nlohmann::ordered_json j;
    j["per_epsilon"] = std::move(rows);
    j["decreasing"] = validation.decreasing;
    return j;
}

void write_report_csv(std::ostream& os, const ConvergenceReport& report) {
    os << "epsilon,metric,mean,stderr,n\n";
    for (const auto& rec : report.per_epsilon)
        for (const auto& m : rec.metrics)
            os << g17(rec.epsilon) << ',' << m.name << ',' << g17(m.mean) << ',' << g17(m.standard_error) << ','
               << m.n << '\n';
}

namespace {

// nlohmann prints the shortest round-trip form; reports use a fixed 17 digits.
void emit(std::ostream& os, const nlohmann::ordered_json& j, int indent) {
    const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
    const std::string close(static_cast<std::size_t>(indent), ' ');
    if (j.is_object()) {
        if (j.empty()) {
            os << "{}";
            return;
        }
        os << "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) os << ",\n";
            first = false;
            os << pad << nlohmann::ordered_json(it.key()).dump() << ": ";
            emit(os, it.value(), indent + 2);
        }
        os << '\n' << close << '}';
    } else if (j.is_array()) {
        if (j.empty()) {
            os << "[]";
            return;
        }
        os << "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) os << ",\n";
            os << pad;
            emit(os, j[i], indent + 2);
        }
        os << '\n' << close << ']';
    } else if (j.is_number_float()) {
        const double v = j.get<double>();
        if (std::isfinite(v))
            os << g17(v);
        else
            os << "null";
    } else {
        os << j.dump();
    }
}

}  // namespace

void write_json(std::ostream& os, const nlohmann::ordered_json& j) {
    emit(os, j, 0);
    os << '\n';
}

}  // namespace roughsk
