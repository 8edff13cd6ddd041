#pragma once

#include <numbers>

// Everything inside the library is SI (m, m^3, Pa, N). These helpers convert
// at the I/O boundary only.
namespace bma::units {

inline constexpr double pi = std::numbers::pi;

constexpr double mm(double v) { return v * 1e-3; }
constexpr double ml(double v) { return v * 1e-6; }
constexpr double mm3(double v) { return v * 1e-9; }

constexpr double to_mm(double m) { return m * 1e3; }
constexpr double to_ml(double m3) { return m3 * 1e6; }
constexpr double to_mm3(double m3) { return m3 * 1e9; }

} // namespace bma::units
