#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <vector>

namespace bma::quadrature {

struct Result {
    double value = 0.0;
    double error = 0.0;      ///< estimated absolute error
    std::size_t intervals = 0;
    bool converged = false;
};

struct Options {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    std::size_t max_intervals = 256;
};

namespace detail {

// 15-point Kronrod abscissae/weights with the embedded 7-point Gauss weights.
inline constexpr std::array<double, 8> xk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> wk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double lo, hi, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(F& f, double lo, double hi) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double fc = f(center);
    double kronrod = fc * wk[7];
    double gauss = fc * wg[3];
    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = half * xk[j];
        const double fsum = f(center - dx) + f(center + dx);
        kronrod += wk[j] * fsum;
        if (j % 2 == 1)
            gauss += wg[j / 2] * fsum;
    }
    return {lo, hi, kronrod * half, std::abs((kronrod - gauss) * half)};
}

} // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) integration of f over [lo, hi].
/// Bisects the interval with the largest error estimate until the summed
/// error meets max(abs_tol, rel_tol * |I|) or the interval cap is hit.
/// Evaluation order is fixed, so results are reproducible bit for bit.
template <class F>
Result integrate(F&& f, double lo, double hi, const Options& opt = {}) {
    if (lo == hi)
        return {0.0, 0.0, 0, true};
    std::priority_queue<detail::Segment> heap;
    heap.push(detail::gk15(f, lo, hi));
    double total = heap.top().value;
    double err = heap.top().error;
    while (true) {
        const double target = std::max(opt.abs_tol, opt.rel_tol * std::abs(total));
        if (err <= target || err <= 50.0 * std::numeric_limits<double>::epsilon() * std::abs(total))
            return {total, err, heap.size(), true};
        if (heap.size() >= opt.max_intervals)
            return {total, err, heap.size(), false};
        const detail::Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        const auto left = detail::gk15(f, worst.lo, mid);
        const auto right = detail::gk15(f, mid, worst.hi);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
}

} // namespace bma::quadrature
