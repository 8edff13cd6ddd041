#pragma once

#include <array>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bma/calibration.hpp"
#include "bma/errors.hpp"
#include "bma/estimator.hpp"
#include "bma/geometry.hpp"
#include "bma/material.hpp"
#include "bma/units.hpp"

/// JSON configuration document (comments allowed). Lengths are stored in
/// mm, volumes in ml, coefficients in Pa; everything is SI once loaded.
///
/// {
///   "ring":      {"radius_mm": 5.0, "thickness_mm": 0.5},
///   "material":  {"yeoh_c_pa": [C1, C2, C3, C4, C5, C6]},
///   "height_fit": {"coeffs_mm": [...], "v_min_ml": .., "v_max_ml": .., "v_scale_ml": ..},
///   "estimator": {"v_min_model_ml": 0.1, "quad_tolerance": 1e-10, "clamp": "project",
///                 "pressure_filter_tau_s": 0.0, "inner_iterations": 1,
///                 "inner_tolerance_mm": 1e-9}
/// }
namespace bma::config {

using json = nlohmann::json;

struct EstimatorSettings {
    double v_min_model = units::ml(0.1);
    double quad_tolerance = 1e-10;
    estimator::ClampMode clamp = estimator::ClampMode::project;
    double pressure_filter_tau = 0.0;
    std::size_t inner_iterations = 1;
    double inner_tolerance = 1e-12;
};

struct Config {
    geometry::RingSpec ring{units::mm(5.0), units::mm(0.5)};
    material::YeohCoeffs coeffs;
    std::optional<calibration::HeightFit> fit;
    EstimatorSettings estimator;

    /// Fails when no height fit has been calibrated yet.
    estimator::EstimatorConfig estimator_config() const {
        if (!fit)
            throw ConfigError("config has no height_fit; run 'calibrate' first");
        if (!coeffs.usable())
            throw ConfigError("all Yeoh coefficients are zero");
        return {ring,
                coeffs,
                *fit,
                estimator.v_min_model,
                estimator.quad_tolerance,
                estimator.clamp,
                estimator.pressure_filter_tau,
                estimator.inner_iterations,
                estimator.inner_tolerance};
    }
};

/// Placeholder material: the magnitudes are plausible for a soft silicone but
/// were not identified from any tensile test. Replace before physical use.
inline material::YeohCoeffs placeholder_coeffs() {
    return material::YeohCoeffs({2.0e4, 1.0e3, 50.0, 0.0, 0.0, 0.0});
}

inline Config default_config() {
    Config c;
    c.coeffs = placeholder_coeffs();
    return c;
}

namespace detail {

template <class T>
T get(const json& j, const char* key, T fallback) {
    if (!j.contains(key))
        return fallback;
    return j.at(key).get<T>();
}

inline std::vector<double> scaled(std::vector<double> v, double s) {
    for (double& x : v)
        x *= s;
    return v;
}

} // namespace detail

inline Config from_json(const json& j) {
    try {
        Config c = default_config();
        if (j.contains("ring")) {
            const auto& r = j.at("ring");
            c.ring = geometry::RingSpec(units::mm(r.at("radius_mm").get<double>()),
                                        units::mm(r.at("thickness_mm").get<double>()));
        }
        if (j.contains("material")) {
            const auto v = j.at("material").at("yeoh_c_pa").get<std::vector<double>>();
            if (v.size() != material::YeohCoeffs::order)
                throw ConfigError("material.yeoh_c_pa must list C1..C6");
            std::array<double, material::YeohCoeffs::order> a{};
            std::copy(v.begin(), v.end(), a.begin());
            c.coeffs = material::YeohCoeffs(a);
        }
        if (j.contains("height_fit") && !j.at("height_fit").is_null()) {
            const auto& f = j.at("height_fit");
            c.fit.emplace(detail::scaled(f.at("coeffs_mm").get<std::vector<double>>(), 1e-3),
                          units::ml(f.at("v_min_ml").get<double>()), units::ml(f.at("v_max_ml").get<double>()),
                          units::ml(f.at("v_scale_ml").get<double>()));
        }
        if (j.contains("estimator")) {
            const auto& e = j.at("estimator");
            auto& s = c.estimator;
            s.v_min_model = units::ml(detail::get(e, "v_min_model_ml", units::to_ml(s.v_min_model)));
            s.quad_tolerance = detail::get(e, "quad_tolerance", s.quad_tolerance);
            const auto clamp = detail::get<std::string>(e, "clamp", "project");
            if (clamp == "project")
                s.clamp = estimator::ClampMode::project;
            else if (clamp == "off")
                s.clamp = estimator::ClampMode::off;
            else
                throw ConfigError("estimator.clamp must be 'project' or 'off'");
            s.pressure_filter_tau = detail::get(e, "pressure_filter_tau_s", s.pressure_filter_tau);
            const auto iters = detail::get<long long>(e, "inner_iterations", 1);
            if (iters < 1)
                throw ConfigError("estimator.inner_iterations must be >= 1");
            s.inner_iterations = static_cast<std::size_t>(iters);
            s.inner_tolerance = units::mm(detail::get(e, "inner_tolerance_mm", units::to_mm(s.inner_tolerance)));
            if (!(s.v_min_model >= 0.0) || !(s.quad_tolerance > 0.0) || !(s.inner_tolerance > 0.0) ||
                !(s.pressure_filter_tau >= 0.0))
                throw ConfigError("estimator thresholds out of range");
        }
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
}

inline json to_json(const Config& c) {
    json j;
    j["ring"] = {{"radius_mm", units::to_mm(c.ring.radius())}, {"thickness_mm", units::to_mm(c.ring.thickness())}};
    const auto& cv = c.coeffs.values();
    j["material"] = {{"yeoh_c_pa", std::vector<double>(cv.begin(), cv.end())}};
    if (c.fit) {
        j["height_fit"] = {{"degree", c.fit->degree()},
                           {"coeffs_mm", detail::scaled(c.fit->coeffs(), 1e3)},
                           {"v_min_ml", units::to_ml(c.fit->v_min())},
                           {"v_max_ml", units::to_ml(c.fit->v_max())},
                           {"v_scale_ml", units::to_ml(c.fit->v_scale())}};
    } else {
        j["height_fit"] = nullptr;
    }
    const auto& s = c.estimator;
    j["estimator"] = {{"v_min_model_ml", units::to_ml(s.v_min_model)},
                      {"quad_tolerance", s.quad_tolerance},
                      {"clamp", s.clamp == estimator::ClampMode::project ? "project" : "off"},
                      {"pressure_filter_tau_s", s.pressure_filter_tau},
                      {"inner_iterations", s.inner_iterations},
                      {"inner_tolerance_mm", units::to_mm(s.inner_tolerance)}};
    return j;
}

inline Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config '" + path + "'");
    json j;
    try {
        j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return from_json(j);
}

inline void save(const std::string& path, const Config& c) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write config '" + path + "'");
    out << to_json(c).dump(2) << '\n';
    if (!out)
        throw IoError("write to config '" + path + "' failed");
}

/// Explicit path wins; otherwise BMA_CONFIG; otherwise nothing.
inline std::optional<std::string> resolve_path(const std::string& explicit_path) {
    if (!explicit_path.empty())
        return explicit_path;
    if (const char* env = std::getenv("BMA_CONFIG"); env && *env)
        return std::string(env);
    return std::nullopt;
}

} // namespace bma::config
