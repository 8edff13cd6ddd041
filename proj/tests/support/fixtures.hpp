#pragma once

#include <cmath>
#include <vector>

#include "bma/bma.hpp"

namespace fixture {

using namespace bma;

inline geometry::RingSpec ring() { return {units::mm(5.0), units::mm(0.5)}; }

/// Synthetic unindented-height law used to generate calibration data:
/// h = 10 mm * (V_BMA / 1039.27 mm^3)^0.55.
inline double height_law(double v_fluid) {
    const double v_bma = geometry::actuator_volume(v_fluid, ring());
    return units::mm(10.0) * std::pow(v_bma / units::mm3(1039.27), 0.55);
}

/// Inflate/deflate samples 0..2 ml with +-0.1 mm hysteresis around the law.
inline std::vector<calibration::Sample> calibration_samples() {
    std::vector<calibration::Sample> s;
    for (int i = 0; i <= 40; ++i) {
        const double v = units::ml(0.05 * i);
        s.push_back({v, height_law(v) + units::mm(0.1), calibration::Phase::inflate});
        s.push_back({v, height_law(v) - units::mm(0.1), calibration::Phase::deflate});
    }
    return s;
}

inline const calibration::HeightFit& height_fit() {
    static const calibration::HeightFit fit = calibration::fit_height_poly(calibration_samples());
    return fit;
}

inline estimator::EstimatorConfig config(std::size_t inner_iterations = 1) {
    estimator::EstimatorConfig cfg{ring(), config::placeholder_coeffs(), height_fit()};
    cfg.inner_iterations = inner_iterations;
    return cfg;
}

} // namespace fixture
