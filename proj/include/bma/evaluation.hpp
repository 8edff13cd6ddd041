#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bma/errors.hpp"
#include "bma/estimator.hpp"
#include "bma/trace.hpp"
#include "bma/units.hpp"

namespace bma::evaluation {

struct TimeWindow {
    double t0 = 0.0;
    double t1 = 0.0;
    bool contains(double t) const noexcept { return t >= t0 && t <= t1; }
};

/// RMSE of force and indentation over modeled samples, and of predicted vs
/// measured pressure over the no-contact samples (zero true force and
/// indentation). Ranges are spans of the measured quantities.
struct Metrics {
    std::size_t n = 0;
    double rmse_F = std::numeric_limits<double>::quiet_NaN();
    double rmse_h2 = std::numeric_limits<double>::quiet_NaN();
    std::size_t n_no_contact = 0;
    double rmse_p = std::numeric_limits<double>::quiet_NaN();
    double range_F = 0.0;
    double range_h2 = 0.0;
    double range_p = 0.0;
};

struct Report {
    std::size_t samples = 0;
    std::size_t modeled = 0;
    Metrics overall;
    std::optional<TimeWindow> window;
    Metrics in_window;
};

namespace detail {

inline double span(const std::vector<double>& v) {
    if (v.empty())
        return 0.0;
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
}

template <class Keep>
Metrics collect(const std::vector<trace::TraceRecord>& records, const std::vector<estimator::StateEstimate>& est,
                Keep keep) {
    std::vector<double> F, F_true, h2, h2_true, p_hat, p_meas, p_all;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        const auto& e = est[i];
        if (!e.modeled() || !keep(r))
            continue;
        F.push_back(e.F);
        F_true.push_back(*r.F_true);
        h2.push_back(e.h2);
        h2_true.push_back(*r.h2_true);
        p_all.push_back(r.p);
        if (*r.F_true == 0.0 && *r.h2_true == 0.0) {
            p_hat.push_back(e.p_hat);
            p_meas.push_back(r.p);
        }
    }
    Metrics m;
    m.n = F.size();
    if (m.n > 0) {
        m.rmse_F = estimator::rmse(F, F_true);
        m.rmse_h2 = estimator::rmse(h2, h2_true);
    }
    m.n_no_contact = p_hat.size();
    if (m.n_no_contact > 0)
        m.rmse_p = estimator::rmse(p_hat, p_meas);
    m.range_F = span(F_true);
    m.range_h2 = span(h2_true);
    m.range_p = span(p_all);
    return m;
}

inline std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

inline std::string percent(double err, double range) {
    if (!(range > 0.0) || !std::isfinite(err))
        return "";
    return "  (" + fmt("%.2f", 100.0 * err / range) + "% of measured range)";
}

inline std::string block(const Metrics& m) {
    std::string s;
    s += "  compared samples   : " + std::to_string(m.n) + "\n";
    s += "  RMSE_F             : " + fmt("%.6g", m.rmse_F) + " N" + percent(m.rmse_F, m.range_F) + "\n";
    s += "  RMSE_h2            : " + fmt("%.6g", units::to_mm(m.rmse_h2)) + " mm" + percent(m.rmse_h2, m.range_h2) +
         "\n";
    s += "  no-contact samples : " + std::to_string(m.n_no_contact) + "\n";
    if (m.n_no_contact > 0)
        s += "  RMSE_p             : " + fmt("%.6g", m.rmse_p) + " Pa" + percent(m.rmse_p, m.range_p) + "\n";
    else
        s += "  RMSE_p             : n/a\n";
    return s;
}

inline nlohmann::json metrics_json(const Metrics& m) {
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    return {{"n", m.n},
            {"rmse_f_n", num(m.rmse_F)},
            {"rmse_h2_mm", num(units::to_mm(m.rmse_h2))},
            {"n_no_contact", m.n_no_contact},
            {"rmse_p_pa", num(m.rmse_p)},
            {"range_f_n", m.range_F},
            {"range_h2_mm", units::to_mm(m.range_h2)},
            {"range_p_pa", m.range_p}};
}

} // namespace detail

/// Errors of precomputed estimates against the ground truth in `records`.
inline Report score(const std::vector<trace::TraceRecord>& records,
                    const std::vector<estimator::StateEstimate>& estimates,
                    std::optional<TimeWindow> window = std::nullopt) {
    if (records.size() != estimates.size())
        throw LengthMismatch("evaluate: estimates and records differ in length");
    for (const auto& r : records)
        if (!r.has_truth())
            throw MissingGroundTruth("evaluate: trace lacks force_n/indent_mm ground truth");
    Report rep;
    rep.samples = records.size();
    rep.modeled = static_cast<std::size_t>(
        std::count_if(estimates.begin(), estimates.end(), [](const auto& e) { return e.modeled(); }));
    rep.overall = detail::collect(records, estimates, [](const auto&) { return true; });
    if (window) {
        rep.window = window;
        rep.in_window = detail::collect(records, estimates, [&](const auto& r) { return window->contains(r.t); });
    }
    return rep;
}

/// Runs the estimator over a ground-truth trace and scores it.
inline Report evaluate(const std::vector<trace::TraceRecord>& records, const estimator::EstimatorConfig& cfg,
                       std::optional<TimeWindow> window = std::nullopt) {
    for (const auto& r : records)
        if (!r.has_truth())
            throw MissingGroundTruth("evaluate: trace lacks force_n/indent_mm ground truth");
    std::vector<estimator::Sample> samples;
    samples.reserve(records.size());
    for (const auto& r : records)
        samples.push_back({r.t, r.v_fluid, r.p});
    return score(records, estimator::run(samples, cfg), window);
}

inline std::string to_text(const Report& rep) {
    std::string s = "samples: " + std::to_string(rep.samples) + " (modeled " + std::to_string(rep.modeled) +
                    ", skipped " + std::to_string(rep.samples - rep.modeled) + ")\n";
    s += "full trace:\n" + detail::block(rep.overall);
    if (rep.window) {
        s += "window [" + detail::fmt("%g", rep.window->t0) + ", " + detail::fmt("%g", rep.window->t1) + "] s:\n";
        s += detail::block(rep.in_window);
    }
    return s;
}

inline nlohmann::json to_json(const Report& rep) {
    nlohmann::json j = {{"samples", rep.samples}, {"modeled", rep.modeled}, {"overall", detail::metrics_json(rep.overall)}};
    if (rep.window) {
        j["window"] = {{"t0_s", rep.window->t0}, {"t1_s", rep.window->t1}};
        j["in_window"] = detail::metrics_json(rep.in_window);
    }
    return j;
}

} // namespace bma::evaluation
