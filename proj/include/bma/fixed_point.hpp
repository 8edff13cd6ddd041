#pragma once

#include <cmath>
#include <cstddef>

namespace bma::fixed_point {

struct Options {
    double tolerance = 1e-10;
    std::size_t max_iterations = 100;
    double lo = 0.0; ///< iterates must stay in [lo, hi)
    double hi = INFINITY;
};

struct Result {
    double x = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    bool left_domain = false; ///< the map produced a value outside [lo, hi); x holds it
};

/// Steffensen-accelerated iteration of x = T(x). Each round applies T twice
/// and tries the Aitken extrapolation; the extrapolated point is kept only if
/// it stays in the domain and its residual |T(x) - x| beats the plain step,
/// otherwise the round continues from the second iterate.
template <class Map>
Result solve(Map&& T, double x0, const Options& opt = {}) {
    auto inside = [&](double v) { return std::isfinite(v) && v >= opt.lo && v < opt.hi; };
    double x = x0;
    double fx = T(x);
    for (std::size_t i = 1; i <= opt.max_iterations; ++i) {
        const double x1 = fx;
        if (!inside(x1))
            return {x1, i, false, true};
        if (std::abs(x1 - x) <= opt.tolerance)
            return {x1, i, true, false};
        const double x2 = T(x1);
        if (!inside(x2))
            return {x2, i, false, true};
        if (std::abs(x2 - x1) <= opt.tolerance)
            return {x2, i, true, false};
        const double den = x2 - 2.0 * x1 + x;
        const double xa = den != 0.0 ? x - (x1 - x) * (x1 - x) / den : x2;
        if (xa != x2 && inside(xa)) {
            const double fa = T(xa);
            if (inside(fa) && std::abs(fa - xa) < std::abs(x2 - x1)) {
                x = xa;
                fx = fa;
                continue;
            }
        }
        x = x2;
        fx = T(x2);
    }
    return {x, opt.max_iterations, false, false};
}

} // namespace bma::fixed_point
