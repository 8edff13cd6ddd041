#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "bma/errors.hpp"
#include "bma/estimator.hpp"
#include "bma/fixed_point.hpp"
#include "bma/trace.hpp"
#include "bma/units.hpp"

/// Synthetic traces generated by running the estimator's own model forward.
/// This is an internal-consistency oracle, not an independent membrane
/// mechanics simulation.
namespace bma::simulator {

struct Segment {
    double v_fluid = 0.0; ///< target injected volume [m^3]
    double force = 0.0;   ///< applied planar force [N]
    double hold = 0.0;    ///< [s]
};

struct SimScript {
    std::vector<Segment> segments;
    double sample_period = 0.01; ///< [s]
    double noise = 0.0;          ///< pressure noise standard deviation [Pa]

    void validate() const {
        if (!(sample_period > 0.0))
            throw InvalidArgument("script: sample period must be positive");
        if (!(noise >= 0.0))
            throw InvalidArgument("script: noise amplitude must be nonnegative");
        if (segments.empty())
            throw InvalidArgument("script: no segments");
        for (const auto& s : segments) {
            if (!(s.hold > 0.0))
                throw InvalidArgument("script: hold durations must be positive");
            if (!(s.v_fluid >= 0.0) || !std::isfinite(s.force))
                throw InvalidArgument("script: invalid segment");
        }
    }
};

/// {"sample_period_s": .., "noise_pa": .., "segments": [{"volume_ml": .., "force_n": .., "hold_s": ..}]}
inline SimScript script_from_json(const nlohmann::json& j) {
    try {
        SimScript s;
        s.sample_period = j.at("sample_period_s").get<double>();
        s.noise = j.value("noise_pa", 0.0);
        for (const auto& seg : j.at("segments"))
            s.segments.push_back({units::ml(seg.at("volume_ml").get<double>()), seg.value("force_n", 0.0),
                                  seg.at("hold_s").get<double>()});
        s.validate();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed script: ") + e.what());
    }
}

inline SimScript load_script(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open script '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument("script '" + path + "' is not valid JSON: " + e.what());
    }
    return script_from_json(j);
}

struct Equilibrium {
    double h2 = 0.0; ///< converged total indentation [m]
    double p = 0.0;  ///< chamber pressure consistent with the applied force [Pa]
    std::size_t iterations = 0;
};

inline constexpr double equilibrium_tolerance = 1e-13; // [m]
inline constexpr std::size_t equilibrium_max_iterations = 100;

namespace detail {

inline double pressure_for_force(const estimator::ModelPoint& m, double force) {
    return (m.v_fm.value * m.stretch.W + force * m.deformed.h3) / m.v_fluid;
}

} // namespace detail

/// Indentation and pressure that hold force `force` at volume `v_fluid` in
/// equilibrium under the estimator's update, iterated from `h2_start`.
inline Equilibrium equilibrium(double v_fluid, double force, const estimator::EstimatorConfig& cfg,
                               double h2_start = 0.0) {
    estimator::require_modeled_volume(v_fluid, cfg);
    if (force == 0.0)
        return {0.0, estimator::predict_pressure(v_fluid, cfg), 0};

    const double h1 = calibration::evaluate_height(cfg.fit, v_fluid);
    auto map = [&](double h2) {
        const auto m = estimator::evaluate_model(v_fluid, h2, cfg);
        const double p = detail::pressure_for_force(m, force);
        if (!(p > 0.0))
            throw InvalidArgument("simulate: scripted force yields non-positive pressure");
        const auto s = estimator::slice_indentation(m.shape.ellipsoid.a, m.shape.ellipsoid.c, p, force);
        if (s.saturated)
            throw InvalidArgument("simulate: scripted force exceeds pi a^2 p");
        return s.h4 + m.deformed.c_c;
    };
    const double start = h2_start >= 0.0 && h2_start < h1 ? h2_start : 0.0;
    const auto r = fixed_point::solve(map, start, {equilibrium_tolerance, equilibrium_max_iterations, 0.0, h1});
    if (!r.converged)
        throw NoConvergence("simulate: indentation fixed point did not converge at V_f = " +
                            std::to_string(units::to_ml(v_fluid)) + " ml, F = " + std::to_string(force) + " N");
    const auto m = estimator::evaluate_model(v_fluid, r.x, cfg);
    return {r.x, detail::pressure_for_force(m, force), r.iterations};
}

/// Samples every segment at the script's period. Each sample is an
/// equilibrium warm-started from the previous one, plus seeded Gaussian
/// pressure noise; the converged indentation and scripted force are
/// recorded as ground truth.
inline std::vector<trace::TraceRecord> simulate_trace(const SimScript& script, const estimator::EstimatorConfig& cfg,
                                                      std::uint64_t seed) {
    script.validate();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);

    std::vector<trace::TraceRecord> out;
    double t = 0.0;
    double h2 = 0.0;
    for (const auto& seg : script.segments) {
        const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(seg.hold / script.sample_period)));
        for (std::size_t i = 0; i < n; ++i) {
            const auto eq = equilibrium(seg.v_fluid, seg.force, cfg, h2);
            h2 = eq.h2;
            trace::TraceRecord r;
            r.t = t;
            r.v_fluid = seg.v_fluid;
            r.p = eq.p + (script.noise > 0.0 ? script.noise * noise(rng) : 0.0);
            r.F_true = seg.force;
            r.h2_true = eq.h2;
            out.push_back(r);
            t += script.sample_period;
        }
    }
    return out;
}

} // namespace bma::simulator
