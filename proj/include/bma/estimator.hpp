#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bma/calibration.hpp"
#include "bma/errors.hpp"
#include "bma/fixed_point.hpp"
#include "bma/geometry.hpp"
#include "bma/material.hpp"
#include "bma/units.hpp"

/// Quasi-static state estimation from injected volume and chamber pressure.
///
/// Each sample reconstructs the unindented ellipsoid from the height fit,
/// the deformed ellipsoid from the previous total indentation, evaluates the
/// membrane stretch energy over the free region, and balances it against
/// the pressure work to obtain the planar contact force and the next
/// indentation depth.
namespace bma::estimator {

using calibration::HeightFit;
using geometry::DeformedShape;
using geometry::RingSpec;
using geometry::UnindentedShape;
using material::StretchState;
using material::YeohCoeffs;
using units::pi;

enum class ClampMode {
    project, ///< h2 projected onto [0, h1]
    off,     ///< raw update, flags only
};

struct EstimatorConfig {
    RingSpec ring;
    YeohCoeffs coeffs;
    HeightFit fit;
    double v_min_model = units::ml(0.1); ///< samples below this volume are not modeled [m^3]
    double quad_tolerance = 1e-10;
    ClampMode clamp = ClampMode::project;
    double pressure_filter_tau = 0.0; ///< first-order low-pass on p [s]; 0 disables
    /// 1 applies a single indentation update per sample. Larger values solve
    /// the per-sample fixed point with at most this many accelerated iterations.
    std::size_t inner_iterations = 1;
    double inner_tolerance = 1e-12; ///< [m]
};

struct EstimatorState {
    double h2_prev = 0.0; ///< total indentation from the previous step [m]
    std::size_t step_index = 0;
};

enum class Flag : std::uint32_t {
    below_model_range = 1u << 0,
    clamped_low = 1u << 1,
    clamped_high = 1u << 2,
    negative_discriminant = 1u << 3,
    free_volume_clamped = 1u << 4,
    nonpositive_pressure = 1u << 5,
    not_converged = 1u << 6,
    step_failed = 1u << 7,
    indentation_reset = 1u << 8,
};

class Flags {
public:
    void set(Flag f) noexcept { bits_ |= static_cast<std::uint32_t>(f); }
    bool has(Flag f) const noexcept { return (bits_ & static_cast<std::uint32_t>(f)) != 0; }
    bool empty() const noexcept { return bits_ == 0; }
    std::uint32_t bits() const noexcept { return bits_; }

    /// '|'-joined names, empty string when no flag is set.
    std::string str() const {
        static constexpr std::pair<Flag, const char*> names[] = {
            {Flag::below_model_range, "below-model-range"},
            {Flag::clamped_low, "clamped-low"},
            {Flag::clamped_high, "clamped-high"},
            {Flag::negative_discriminant, "negative-discriminant"},
            {Flag::free_volume_clamped, "free-volume-clamped"},
            {Flag::nonpositive_pressure, "nonpositive-pressure"},
            {Flag::not_converged, "not-converged"},
            {Flag::step_failed, "step-failed"},
            {Flag::indentation_reset, "indentation-reset"},
        };
        std::string out;
        for (const auto& [f, name] : names)
            if (has(f)) {
                if (!out.empty())
                    out += '|';
                out += name;
            }
        return out;
    }

private:
    std::uint32_t bits_ = 0;
};

struct StateEstimate {
    double h1 = 0.0;     ///< unindented height [m]
    double h2 = 0.0;     ///< total indentation [m]
    double h3 = 0.0;     ///< deformed height [m]
    double h4 = 0.0;     ///< slice-induced indentation [m]
    double F = 0.0;      ///< planar contact force [N]
    double p = 0.0;      ///< pressure fed to the model [Pa]
    double p_hat = 0.0;  ///< no-contact pressure prediction [Pa]
    double lambda = 0.0; ///< principal stretch
    UnindentedShape shape;
    DeformedShape deformed;
    Flags flags;

    /// False for samples that were not modeled (below range or failed).
    bool modeled() const noexcept {
        return !flags.has(Flag::below_model_range) && !flags.has(Flag::step_failed);
    }
};

/// Geometry and energy at one (volume, previous indentation) pair.
struct ModelPoint {
    double v_fluid = 0.0;
    double v_m = 0.0;
    UnindentedShape shape;
    DeformedShape deformed;
    StretchState stretch;
    material::FreeVolume v_fm;
};

inline ModelPoint evaluate_model(double v_fluid, double h2_prev, const EstimatorConfig& cfg) {
    ModelPoint m;
    m.v_fluid = v_fluid;
    m.v_m = geometry::membrane_volume(cfg.ring);
    const double h1 = calibration::evaluate_height(cfg.fit, v_fluid);
    m.shape = geometry::reconstruct_unindented(geometry::actuator_volume(v_fluid, cfg.ring), h1, cfg.ring);
    m.deformed = geometry::reconstruct_deformed(m.shape, h2_prev, cfg.ring);
    m.stretch = material::evaluate_stretch(m.deformed, cfg.ring, cfg.coeffs, cfg.quad_tolerance);
    m.v_fm = material::free_membrane_volume(m.v_m, m.deformed.k, m.stretch.t_m);
    return m;
}

inline void require_modeled_volume(double v_fluid, const EstimatorConfig& cfg) {
    if (!std::isfinite(v_fluid) || v_fluid < cfg.v_min_model)
        throw OutOfRange("injected volume below the modeled range");
}

/// Pressure of the free (contact-less) membrane at injected volume v_fluid.
inline double predict_pressure(double v_fluid, const EstimatorConfig& cfg) {
    require_modeled_volume(v_fluid, cfg);
    const ModelPoint m = evaluate_model(v_fluid, 0.0, cfg);
    return m.v_fm.value * m.stretch.W / v_fluid;
}

/// Contact force from the energy balance: (V_f p - V_fm W) / h3.
inline double estimate_force(double v_fluid, double p, double v_fm, double W, double h3) {
    if (!(h3 > 0.0))
        throw DegenerateGeometry("estimate_force: deformed height must be positive");
    return (v_fluid * p - v_fm * W) / h3;
}

struct SliceResult {
    double h4 = 0.0;
    bool saturated = false; ///< force beyond pi a^2 p; h4 pinned at c
};

/// Indentation from flattening the ellipsoid (a, c) under force F at pressure p.
inline SliceResult slice_indentation(double a, double c, double p, double F) {
    if (!(p > 0.0))
        throw InvalidArgument("slice_indentation: pressure must be positive");
    // With q = pi a p the radicand pi^2 a^2 p^2 - pi F p is q^2 - pi F p, and
    // h4 = -(c sqrt(.) - pi a c p) / (pi a p) = c (q - sqrt(.)) / q.
    const double q = pi * a * p;
    const double disc = q * q - pi * F * p;
    if (disc < 0.0)
        return {c, true};
    return {c * (q - std::sqrt(disc)) / q, false};
}

struct StepResult {
    StateEstimate estimate;
    EstimatorState next;
};

namespace detail {

struct Update {
    ModelPoint point;
    double F = 0.0;
    double h4 = 0.0;
    double h2 = 0.0;
    Flags flags;
};

inline Update indentation_update(double v_fluid, double p, double h2_prev, const EstimatorConfig& cfg) {
    Update u;
    u.point = evaluate_model(v_fluid, h2_prev, cfg);
    const auto& m = u.point;
    if (m.v_fm.clamped)
        u.flags.set(Flag::free_volume_clamped);
    u.F = estimate_force(v_fluid, p, m.v_fm.value, m.stretch.W, m.deformed.h3);
    if (p > 0.0) {
        const auto s = slice_indentation(m.shape.ellipsoid.a, m.shape.ellipsoid.c, p, u.F);
        u.h4 = s.h4;
        if (s.saturated)
            u.flags.set(Flag::negative_discriminant);
    } else {
        u.flags.set(Flag::nonpositive_pressure);
        u.h4 = 0.0;
    }
    const double raw = u.h4 + m.deformed.c_c;
    const double h1 = m.shape.h1;
    u.h2 = raw;
    if (raw < 0.0) {
        u.flags.set(Flag::clamped_low);
        if (cfg.clamp == ClampMode::project)
            u.h2 = 0.0;
    } else if (raw > h1) {
        u.flags.set(Flag::clamped_high);
        if (cfg.clamp == ClampMode::project)
            u.h2 = h1;
    }
    return u;
}

} // namespace detail

inline StateEstimate null_estimate(double p, Flag why) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    StateEstimate e;
    e.h1 = e.h2 = e.h3 = e.h4 = e.F = e.p_hat = e.lambda = nan;
    e.p = p;
    e.flags.set(why);
    return e;
}

/// One sample of the estimator. The returned state carries h2 forward; on
/// error the caller's state is untouched.
inline StepResult step(const EstimatorState& state, double v_fluid, double p, const EstimatorConfig& cfg) {
    if (!std::isfinite(p))
        throw InvalidArgument("step: pressure is not finite");
    if (!std::isfinite(v_fluid))
        throw InvalidArgument("step: volume is not finite");

    EstimatorState next = state;
    next.step_index = state.step_index + 1;
    if (v_fluid < cfg.v_min_model)
        return {null_estimate(p, Flag::below_model_range), next};

    Flags extra;
    double h_start = state.h2_prev;
    const double h1 = calibration::evaluate_height(cfg.fit, v_fluid);
    // A fully collapsed previous state leaves no deformed height to reconstruct.
    if (!(h_start < h1) || h_start < 0.0) {
        extra.set(Flag::indentation_reset);
        h_start = 0.0;
    }

    detail::Update u;
    if (cfg.inner_iterations <= 1) {
        u = detail::indentation_update(v_fluid, p, h_start, cfg);
    } else {
        detail::Update last;
        auto map = [&](double h) {
            last = detail::indentation_update(v_fluid, p, h, cfg);
            return last.h2;
        };
        const auto r = fixed_point::solve(
            map, h_start, {cfg.inner_tolerance, cfg.inner_iterations, 0.0, h1});
        if (r.left_domain) {
            u = last;
        } else {
            u = detail::indentation_update(v_fluid, p, r.x, cfg);
            if (!r.converged)
                u.flags.set(Flag::not_converged);
        }
    }

    StateEstimate e;
    const auto& m = u.point;
    e.h1 = m.shape.h1;
    e.h2 = u.h2;
    e.h3 = m.deformed.h3;
    e.h4 = u.h4;
    e.F = u.F;
    e.p = p;
    e.lambda = m.stretch.lambda;
    e.shape = m.shape;
    e.deformed = m.deformed;
    e.flags = u.flags;
    if (extra.has(Flag::indentation_reset))
        e.flags.set(Flag::indentation_reset);
    e.p_hat = m.deformed.k == 0.0 && m.deformed.c_c == 0.0 ? m.v_fm.value * m.stretch.W / v_fluid
                                                            : predict_pressure(v_fluid, cfg);
    next.h2_prev = u.h2;
    return {e, next};
}

/// First-order low-pass y += dt / (tau + dt) (x - y); passes x through when tau <= 0.
class PressureFilter {
public:
    explicit PressureFilter(double tau) : tau_(tau) {}

    double operator()(double t, double p) {
        if (!(tau_ > 0.0) || !primed_) {
            primed_ = true;
            t_ = t;
            y_ = p;
            return p;
        }
        const double dt = t - t_;
        t_ = t;
        y_ += dt / (tau_ + dt) * (p - y_);
        return y_;
    }

private:
    double tau_;
    bool primed_ = false;
    double t_ = 0.0;
    double y_ = 0.0;
};

struct Sample {
    double t = 0.0;
    double v_fluid = 0.0;
    double p = 0.0;
};

/// Runs the estimator over a whole trace. A sample whose step fails is
/// emitted with Flag::step_failed and the previous indentation; the trace
/// always runs to completion.
inline std::vector<StateEstimate> run(std::span<const Sample> samples, const EstimatorConfig& cfg,
                                      EstimatorState state = {}) {
    std::vector<StateEstimate> out;
    out.reserve(samples.size());
    PressureFilter filter(cfg.pressure_filter_tau);
    for (const auto& s : samples) {
        const double p = filter(s.t, s.p);
        try {
            auto r = step(state, s.v_fluid, p, cfg);
            out.push_back(r.estimate);
            state = r.next;
        } catch (const Error&) {
            auto e = null_estimate(p, Flag::step_failed);
            e.h2 = state.h2_prev;
            out.push_back(e);
        }
    }
    return out;
}

/// Root-mean-square difference between two equally long series.
inline double rmse(std::span<const double> estimate, std::span<const double> truth) {
    if (estimate.size() != truth.size())
        throw LengthMismatch("rmse: series lengths differ");
    if (estimate.empty())
        throw LengthMismatch("rmse: empty series");
    double acc = 0.0;
    for (std::size_t i = 0; i < estimate.size(); ++i) {
        const double d = estimate[i] - truth[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(estimate.size()));
}

} // namespace bma::estimator
