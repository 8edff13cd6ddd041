#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bma/geometry.hpp"
#include "bma/units.hpp"

/// Cross-section export: CSV polylines and an SVG overlay of ring, ellipsoid
/// profile, same-volume sphere cap and contact slice.
namespace bma::shape_export {

using geometry::Point2;

inline void write_csv(std::ostream& out, const std::vector<Point2>& pts) {
    out << "x_mm,z_mm\n";
    char buf[64];
    for (const auto& p : pts) {
        std::snprintf(buf, sizeof buf, "%.6f,%.6f\n", units::to_mm(p.x), units::to_mm(p.z));
        out << buf;
    }
}

/// Spherical cap profile over the ring, from (-r, 0) to (r, 0).
inline std::vector<Point2> sphere_profile(const geometry::SphereCap& cap, const geometry::RingSpec& ring,
                                          std::size_t n_points) {
    const double R = cap.radius;
    const double z0 = cap.height - R;
    const double phi = std::acos(std::clamp(-z0 / R, -1.0, 1.0));
    std::vector<Point2> pts;
    for (std::size_t i = 0; i < n_points; ++i) {
        const double t = -phi + 2.0 * phi * static_cast<double>(i) / static_cast<double>(n_points - 1);
        pts.push_back({R * std::sin(t), z0 + R * std::cos(t)});
    }
    pts.front() = {-ring.radius(), 0.0};
    pts.back() = {ring.radius(), 0.0};
    return pts;
}

struct Scene {
    double ring_radius = 0.0;
    std::vector<Point2> membrane;               ///< ellipsoid profile (deformed when indented)
    std::vector<Point2> sphere;                 ///< baseline overlay
    std::optional<std::vector<Point2>> unindented; ///< reference profile when indented
    std::optional<double> contact_z;            ///< contact plane height
    double contact_half_width = 0.0;
};

namespace detail {

inline std::string path_data(const std::vector<Point2>& pts, double scale, double ox, double oy) {
    std::string d;
    char buf[64];
    for (std::size_t i = 0; i < pts.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s%.3f %.3f", i == 0 ? "M" : " L", ox + pts[i].x * scale,
                      oy - pts[i].z * scale);
        d += buf;
    }
    return d;
}

} // namespace detail

/// SVG 1.1 document; 1 mm maps to `px_per_mm` user units.
inline void write_svg(std::ostream& out, const Scene& s, double px_per_mm = 20.0) {
    double x_max = s.ring_radius, z_max = 0.0;
    auto grow = [&](const std::vector<Point2>& pts) {
        for (const auto& p : pts) {
            x_max = std::max(x_max, std::abs(p.x));
            z_max = std::max(z_max, p.z);
        }
    };
    grow(s.membrane);
    grow(s.sphere);
    if (s.unindented)
        grow(*s.unindented);

    const double scale = px_per_mm * 1e3; // px per metre
    const double margin = 20.0;
    const double width = 2.0 * (x_max * 1.25 * scale + margin);
    const double height = z_max * 1.15 * scale + 2.0 * margin;
    const double ox = width / 2.0;
    const double oy = height - margin;

    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"%.1f\" height=\"%.1f\" "
                  "viewBox=\"0 0 %.1f %.1f\">\n",
                  width, height, width, height);
    out << buf;
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<line id=\"ring\" x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\" stroke=\"black\" "
                  "stroke-width=\"2\"/>\n",
                  ox - x_max * 1.2 * scale, oy, ox + x_max * 1.2 * scale, oy);
    out << buf;
    out << "<path id=\"sphere\" d=\"" << detail::path_data(s.sphere, scale, ox, oy)
        << "\" fill=\"none\" stroke=\"green\" stroke-width=\"1.5\" stroke-dasharray=\"6 3\"/>\n";
    if (s.unindented)
        out << "<path id=\"unindented\" d=\"" << detail::path_data(*s.unindented, scale, ox, oy)
            << "\" fill=\"none\" stroke=\"gray\" stroke-width=\"1\" stroke-dasharray=\"2 2\"/>\n";
    out << "<path id=\"ellipsoid\" d=\"" << detail::path_data(s.membrane, scale, ox, oy)
        << "\" fill=\"none\" stroke=\"blue\" stroke-width=\"2\"/>\n";
    if (s.contact_z) {
        const double y = oy - *s.contact_z * scale;
        const double half = std::max(s.contact_half_width, 0.5 * s.ring_radius) * 1.3 * scale;
        std::snprintf(buf, sizeof buf,
                      "<line id=\"contact\" x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\" stroke=\"red\" "
                      "stroke-width=\"1.5\"/>\n",
                      ox - half, y, ox + half, y);
        out << buf;
    }
    out << "</svg>\n";
}

} // namespace bma::shape_export
