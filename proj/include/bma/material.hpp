#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "bma/errors.hpp"
#include "bma/geometry.hpp"
#include "bma/quadrature.hpp"
#include "bma/units.hpp"

/// Membrane kinematics along the meridian and the Yeoh energy term.
namespace bma::material {

using geometry::RingSpec;
using units::pi;

/// Yeoh coefficients C_1..C_6 [Pa]. C_0 never contributes and is not stored.
class YeohCoeffs {
public:
    static constexpr std::size_t order = 6;

    YeohCoeffs() = default;
    explicit YeohCoeffs(const std::array<double, order>& c) : c_(c) {}

    /// n in [1, 6]
    double operator[](std::size_t n) const { return c_.at(n - 1); }
    const std::array<double, order>& values() const noexcept { return c_; }

    bool usable() const noexcept {
        for (double v : c_)
            if (v != 0.0)
                return true;
        return false;
    }

    YeohCoeffs scaled(double s) const {
        auto c = c_;
        for (double& v : c)
            v *= s;
        return YeohCoeffs(c);
    }

private:
    std::array<double, order> c_{};
};

struct StretchState {
    double theta1 = 0.0; ///< integration bound [rad]
    double L = 0.0;      ///< meridian arc length [m]
    double lambda = 0.0; ///< principal stretch
    double I1 = 0.0;     ///< first invariant
    double t_m = 0.0;    ///< inflated thickness [m]
    double W = 0.0;      ///< energy-density term [Pa]
};

/// arctan(r / |h3 - c_d|), pi/2 when the ring plane passes through the center.
inline double integration_angle(double r, double h3, double c_d) {
    const double gap = std::abs(h3 - c_d);
    if (gap == 0.0)
        return pi / 2.0;
    return std::atan(r / gap);
}

/// Meridian arc length of the deformed ellipse from the apex over the bound
/// selected by whether the center lies above the ring plane.
inline double perimeter(double a_d, double c_d, double h3, double theta1, double rel_tol = 1e-10) {
    if (!(a_d > 0.0) || !(c_d > 0.0))
        throw InvalidArgument("perimeter: semi-axes must be positive");
    if (!(theta1 >= 0.0) || theta1 > pi / 2.0)
        throw InvalidArgument("perimeter: theta1 outside [0, pi/2]");
    const double upper = h3 > c_d ? pi - theta1 : theta1;
    const double a2 = a_d * a_d;
    const double c2 = c_d * c_d;
    auto integrand = [a2, c2](double t) {
        const double s = std::sin(t);
        const double co = std::cos(t);
        return std::sqrt(a2 * s * s + c2 * co * co);
    };
    return quadrature::integrate(integrand, 0.0, upper, {rel_tol, 0.0, 256}).value;
}

inline double stretch(double L, const RingSpec& ring) { return L / ring.radius(); }

inline double invariant_I1(double lambda) { return lambda * lambda + 2.0 / lambda; }

/// Sum over n of 2 (lambda - lambda^-2) n C_n (I1 - 3)^(n-1), evaluated as printed.
inline double yeoh_energy_density(double lambda, const YeohCoeffs& coeffs) {
    const double shape = 2.0 * (lambda - 1.0 / (lambda * lambda));
    const double x = invariant_I1(lambda) - 3.0;
    double sum = 0.0;
    double power = 1.0; // (I1 - 3)^(n-1)
    for (std::size_t n = 1; n <= YeohCoeffs::order; ++n) {
        sum += static_cast<double>(n) * coeffs[n] * power;
        power *= x;
    }
    return shape * sum;
}

inline double inflated_thickness(const RingSpec& ring, double L) {
    const double r = ring.radius();
    return ring.thickness() * r * r / (L * L);
}

struct FreeVolume {
    double value = 0.0;
    bool clamped = false; ///< raw value was negative
};

/// Membrane volume outside the contact patch of radius k.
inline FreeVolume free_membrane_volume(double v_m, double k, double t_m) {
    const double raw = v_m - k * k * pi * t_m;
    if (raw < 0.0)
        return {0.0, true};
    return {raw, false};
}

/// Full kinematic chain for a deformed shape.
inline StretchState evaluate_stretch(const geometry::DeformedShape& d, const RingSpec& ring,
                                     const YeohCoeffs& coeffs, double rel_tol = 1e-10) {
    StretchState s;
    s.theta1 = integration_angle(ring.radius(), d.h3, d.c_d);
    s.L = perimeter(d.a_d, d.c_d, d.h3, s.theta1, rel_tol);
    s.lambda = stretch(s.L, ring);
    s.I1 = invariant_I1(s.lambda);
    s.t_m = inflated_thickness(ring, s.L);
    s.W = yeoh_energy_density(s.lambda, coeffs);
    return s;
}

} // namespace bma::material
