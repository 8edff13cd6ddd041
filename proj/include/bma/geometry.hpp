#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "bma/errors.hpp"
#include "bma/units.hpp"

/// Ellipsoid reconstruction of a ballooning membrane clamped in a retainer ring.
///
/// Axisymmetric convention used throughout: z is the height above the ring
/// plane, x the radial coordinate. The fitted ellipsoid has equatorial
/// semi-axis `a` (radial) and polar semi-axis `c` (along z). The part of the
/// ellipsoid below the ring plane is the virtual cap.
namespace bma::geometry {

using units::pi;

/// Retainer ring inner radius and initial (uniform) membrane thickness, SI.
class RingSpec {
public:
    RingSpec(double radius, double thickness) : radius_(radius), thickness_(thickness) {
        if (!(radius > 0.0) || !std::isfinite(radius))
            throw InvalidArgument("RingSpec: radius must be positive and finite");
        if (!(thickness > 0.0) || !std::isfinite(thickness))
            throw InvalidArgument("RingSpec: thickness must be positive and finite");
    }

    double radius() const noexcept { return radius_; }
    double thickness() const noexcept { return thickness_; }
    /// Initial membrane area spanned by the ring.
    double area() const noexcept { return pi * radius_ * radius_; }

private:
    double radius_;
    double thickness_;
};

struct Ellipsoid {
    double a = 0.0; ///< equatorial semi-axis [m]
    double c = 0.0; ///< polar semi-axis [m]

    double volume() const noexcept { return 4.0 / 3.0 * pi * a * a * c; }
};

struct UnindentedShape {
    Ellipsoid ellipsoid;
    double h1 = 0.0;    ///< apex height above the ring plane [m]
    double h_b = 0.0;   ///< virtual cap height, 2c - h1 [m]
    double v_bma = 0.0; ///< actuator volume [m^3]
};

struct DeformedShape {
    double a_d = 0.0; ///< deformed equatorial semi-axis [m]
    double c_d = 0.0; ///< deformed polar semi-axis [m]
    double h3 = 0.0;  ///< deformed apex height [m]
    double c_c = 0.0; ///< center shift c - c_d [m]
    double k = 0.0;   ///< contact radius [m]
};

struct Point2 {
    double x = 0.0;
    double z = 0.0;
};

inline double membrane_volume(const RingSpec& ring) {
    return ring.radius() * ring.radius() * pi * ring.thickness();
}

inline double actuator_volume(double v_fluid, const RingSpec& ring) {
    if (!(v_fluid >= 0.0))
        throw InvalidArgument("actuator_volume: injected volume must be nonnegative");
    return v_fluid + membrane_volume(ring);
}

/// Volume of the cap of height h_b cut from one pole of the ellipsoid.
inline double cap_volume(const Ellipsoid& e, double h_b) {
    if (!(h_b >= 0.0) || h_b > 2.0 * e.c)
        throw InvalidArgument("cap_volume: cap height outside [0, 2c]");
    return e.a * e.a * (3.0 * e.c - h_b) * h_b * h_b * pi / (3.0 * e.c * e.c);
}

/// Ellipsoid volume above the ring plane for apex height h.
inline double volume_above_ring(const Ellipsoid& e, double h) {
    return e.volume() - cap_volume(e, 2.0 * e.c - h);
}

/// Closed-form rearrangement of the volume and ring-area identity as
/// printed: a = sqrt(3) c sqrt(V / (pi (3c - h))) / h.
inline double equatorial_axis_from_volume(double v_bma, double h, double c) {
    return std::sqrt(3.0) * c * std::sqrt(v_bma / (pi * (3.0 * c - h))) / h;
}

/// Ring boundary area a^2 (1 - (1 - h_b/c)^2) pi spanned by the ellipsoid at the ring plane.
inline double ring_area(const Ellipsoid& e, double h_b) {
    const double s = 1.0 - h_b / e.c;
    return e.a * e.a * (1.0 - s * s) * pi;
}

/// Solve for the ellipsoid that holds volume `v_bma` above the ring with apex
/// height `h` while passing through the ring edge. Serves both the unindented
/// (h = h1) and the deformed (h = h3) reconstruction.
inline Ellipsoid solve_axes(double v_bma, double h, const RingSpec& ring) {
    if (!(h > 0.0) || !std::isfinite(h))
        throw DegenerateGeometry("solve_axes: apex height must be positive");
    if (!(v_bma > 0.0) || !std::isfinite(v_bma))
        throw DegenerateGeometry("solve_axes: actuator volume must be positive");

    const double hA = h * ring.area(); // h pi r^2
    const double denom = 3.0 * hA - 6.0 * v_bma;
    if (std::abs(denom) < 1e-12 * (3.0 * hA + 6.0 * v_bma))
        throw DegenerateGeometry("solve_axes: singular height/volume pair (3 h pi r^2 = 6 V)");

    const double radicand = -(hA - 2.0 * v_bma) / (h * pi);
    if (radicand < 0.0)
        throw DegenerateGeometry("solve_axes: negative radicand, membrane too flat for its volume");

    const double c = (h * hA - 3.0 * v_bma * h) / denom;
    const double a = std::sqrt(radicand) * (std::sqrt(3.0) * hA - 3.0 * std::sqrt(3.0) * v_bma) / denom;
    if (!(a > 0.0) || !(c > 0.0) || !std::isfinite(a) || !std::isfinite(c))
        throw DegenerateGeometry("solve_axes: non-positive semi-axis");
    return {a, c};
}

inline UnindentedShape reconstruct_unindented(double v_bma, double h1, const RingSpec& ring) {
    const Ellipsoid e = solve_axes(v_bma, h1, ring);
    return {e, h1, 2.0 * e.c - h1, v_bma};
}

inline double center_shift(double c, double c_d) { return c - c_d; }

/// Radius of the patch cut from the unindented ellipsoid at depth h2_prev - c_c below its apex.
inline double contact_radius(const UnindentedShape& u, double h2_prev, double c_c) {
    const double a = u.ellipsoid.a;
    const double c = u.ellipsoid.c;
    const double d = h2_prev - c_c;
    if (!(d > 0.0))
        return 0.0;
    if (d > 2.0 * c)
        throw DegenerateGeometry("contact_radius: slice lies below the ellipsoid");
    return std::min(a, a * std::sqrt(2.0 * c * d - d * d) / c);
}

/// Deformed reconstruction at apex height h1 - h2_prev with the same actuator volume.
inline DeformedShape reconstruct_deformed(const UnindentedShape& u, double h2_prev, const RingSpec& ring) {
    const double h3 = u.h1 - h2_prev;
    const Ellipsoid d = solve_axes(u.v_bma, h3, ring);
    const double c_c = center_shift(u.ellipsoid.c, d.c);
    return {d.a, d.c, h3, c_c, contact_radius(u, h2_prev, c_c)};
}

struct SphereCap {
    double radius = 0.0; ///< sphere radius [m]
    double height = 0.0; ///< cap height above the ring [m]
};

/// Spherical cap over the ring holding the same volume; comparison baseline only.
inline SphereCap sphere_baseline(double v_bma, const RingSpec& ring) {
    if (!(v_bma > 0.0))
        throw InvalidArgument("sphere_baseline: volume must be positive");
    // h^3 + 3 r^2 h - 6 V / pi = 0 has exactly one real root; trigonometric-hyperbolic form avoids
    // the cancellation of Cardano's formula at small volumes.
    const double r = ring.radius();
    const double p = 3.0 * r * r;
    const double q = -6.0 * v_bma / pi;
    const double m = 2.0 * std::sqrt(p / 3.0);
    const double h = -m * std::sinh(std::asinh(1.5 * q / p * std::sqrt(3.0 / p)) / 3.0);
    return {(r * r + h * h) / (2.0 * h), h};
}

namespace detail {

// Half-arc of an ellipse centered at height z0 from the apex (phi = 0) to the ring plane.
inline double ring_angle(double c, double z0) {
    return std::acos(std::clamp(-z0 / c, -1.0, 1.0));
}

inline std::vector<Point2> arc(double a, double c, double z0, double phi_lo, double phi_hi, std::size_t n) {
    std::vector<Point2> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        const double phi = phi_lo + (phi_hi - phi_lo) * t;
        pts.push_back({a * std::sin(phi), z0 + c * std::cos(phi)});
    }
    return pts;
}

inline void anchor_ends(std::vector<Point2>& pts, double r) {
    pts.front() = {-r, 0.0};
    pts.back() = {r, 0.0};
}

} // namespace detail

/// Cross-section of the membrane above the ring plane, from (-r, 0) to (r, 0).
inline std::vector<Point2> profile_polyline(const UnindentedShape& u, const RingSpec& ring, std::size_t n_points) {
    if (n_points < 2)
        throw InvalidArgument("profile_polyline: need at least two points");
    const double a = u.ellipsoid.a;
    const double c = u.ellipsoid.c;
    const double z0 = u.h1 - c;
    const double phi = detail::ring_angle(c, z0);
    auto pts = detail::arc(a, c, z0, -phi, phi, n_points);
    detail::anchor_ends(pts, ring.radius());
    return pts;
}

/// Deformed cross-section, flattened at the apex over the contact half-width k.
/// Each flank gets n_points / 2 samples; the flat segment joins them.
inline std::vector<Point2> profile_polyline(const DeformedShape& d, const RingSpec& ring, std::size_t n_points) {
    if (n_points < 2)
        throw InvalidArgument("profile_polyline: need at least two points");
    const double z0 = d.h3 - d.c_d;
    const double phi_ring = detail::ring_angle(d.c_d, z0);
    if (!(d.k > 0.0)) {
        auto pts = detail::arc(d.a_d, d.c_d, z0, -phi_ring, phi_ring, n_points);
        detail::anchor_ends(pts, ring.radius());
        return pts;
    }
    const double phi_k = std::min(std::asin(std::min(1.0, d.k / d.a_d)), phi_ring);
    const double z_cut = z0 + d.c_d * std::cos(phi_k);
    const std::size_t flank = std::max<std::size_t>(2, n_points / 2);
    auto left = detail::arc(d.a_d, d.c_d, z0, -phi_ring, -phi_k, flank);
    auto right = detail::arc(d.a_d, d.c_d, z0, phi_k, phi_ring, flank);
    left.back() = {-d.k, z_cut};
    right.front() = {d.k, z_cut};
    left.insert(left.end(), right.begin(), right.end());
    detail::anchor_ends(left, ring.radius());
    return left;
}

} // namespace bma::geometry
