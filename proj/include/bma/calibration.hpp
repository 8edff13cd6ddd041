#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "bma/errors.hpp"

/// Injected-volume to unindented-height map fitted from measured heights.
namespace bma::calibration {

enum class Phase { inflate, deflate };

struct Sample {
    double volume = 0.0; ///< injected volume [m^3]
    double height = 0.0; ///< measured apex height [m]
    Phase phase = Phase::inflate;
};

/// Polynomial in raw powers of V / v_scale, valid on [v_min, v_max] only.
class HeightFit {
public:
    /// Validates the parts and rejects polynomials that are not strictly positive on the range.
    HeightFit(std::vector<double> coeffs, double v_min, double v_max, double v_scale)
        : coeffs_(std::move(coeffs)), v_min_(v_min), v_max_(v_max), v_scale_(v_scale) {
        if (coeffs_.empty())
            throw InvalidArgument("HeightFit: no coefficients");
        for (double c : coeffs_)
            if (!std::isfinite(c))
                throw InvalidArgument("HeightFit: non-finite coefficient");
        if (!(v_scale_ > 0.0) || !std::isfinite(v_scale_))
            throw InvalidArgument("HeightFit: v_scale must be positive");
        if (!(v_min_ >= 0.0) || !(v_max_ >= v_min_) || !std::isfinite(v_max_))
            throw InvalidArgument("HeightFit: invalid validity range");
        constexpr int probes = 2000;
        for (int i = 0; i <= probes; ++i) {
            const double v = v_min_ + (v_max_ - v_min_) * i / probes;
            if (!(raw(v) > 0.0))
                throw NonPositiveFit("HeightFit: fitted height is not positive over the validity range");
        }
    }

    std::size_t degree() const noexcept { return coeffs_.size() - 1; }
    const std::vector<double>& coeffs() const noexcept { return coeffs_; }
    double v_min() const noexcept { return v_min_; }
    double v_max() const noexcept { return v_max_; }
    double v_scale() const noexcept { return v_scale_; }

    bool in_range(double v) const noexcept {
        const double slack = 1e-12 * std::max(v_max_, v_scale_);
        return v >= v_min_ - slack && v <= v_max_ + slack;
    }

    /// Unindented height [m] at injected volume v [m^3]; never extrapolates.
    double operator()(double v) const {
        if (!in_range(v))
            throw OutOfRange("height fit evaluated outside its calibrated volume range");
        return raw(v);
    }

private:
    double raw(double v) const noexcept {
        const double x = v / v_scale_;
        double acc = 0.0;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it)
            acc = acc * x + *it;
        return acc;
    }

    std::vector<double> coeffs_;
    double v_min_;
    double v_max_;
    double v_scale_;
};

inline double evaluate_height(const HeightFit& fit, double v_fluid) { return fit(v_fluid); }

struct FitOptions {
    std::size_t degree = 7;
    /// Inflate/deflate samples closer than this fraction of the volume span are paired.
    double pair_tolerance = 0.01;
    /// Upper bound on cond(A^T A) for the normalized Vandermonde matrix.
    double max_condition = 1e14;
};

struct MeanPoint {
    double volume = 0.0;
    double height = 0.0;
};

/// Averages the inflation and deflation branches: nearest-volume pairs within
/// tolerance become their mean, unpaired samples pass through unchanged.
inline std::vector<MeanPoint> pair_hysteresis(const std::vector<Sample>& samples, double pair_tolerance) {
    if (samples.empty())
        return {};
    double lo = samples.front().volume, hi = lo;
    for (const auto& s : samples) {
        lo = std::min(lo, s.volume);
        hi = std::max(hi, s.volume);
    }
    const double tol = pair_tolerance * (hi - lo);

    std::vector<std::size_t> up, down;
    for (std::size_t i = 0; i < samples.size(); ++i)
        (samples[i].phase == Phase::inflate ? up : down).push_back(i);

    std::vector<std::tuple<double, std::size_t, std::size_t>> candidates;
    for (std::size_t i : up)
        for (std::size_t j : down) {
            const double d = std::abs(samples[i].volume - samples[j].volume);
            if (d <= tol)
                candidates.emplace_back(d, i, j);
        }
    std::sort(candidates.begin(), candidates.end());

    std::vector<bool> used(samples.size(), false);
    std::vector<MeanPoint> points;
    for (const auto& [d, i, j] : candidates) {
        if (used[i] || used[j])
            continue;
        used[i] = used[j] = true;
        points.push_back({(samples[i].volume + samples[j].volume) / 2.0,
                          (samples[i].height + samples[j].height) / 2.0});
    }
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (!used[i])
            points.push_back({samples[i].volume, samples[i].height});
    std::sort(points.begin(), points.end(),
              [](const MeanPoint& a, const MeanPoint& b) { return a.volume < b.volume; });
    return points;
}

/// Least-squares polynomial fit of the mean height curve over normalized volume.
inline HeightFit fit_height_poly(const std::vector<Sample>& samples, const FitOptions& opt = {}) {
    for (const auto& s : samples) {
        if (!(s.volume >= 0.0) || !std::isfinite(s.volume))
            throw InvalidArgument("fit_height_poly: volumes must be finite and nonnegative");
        if (!std::isfinite(s.height))
            throw InvalidArgument("fit_height_poly: non-finite height");
    }
    const auto points = pair_hysteresis(samples, opt.pair_tolerance);
    const std::size_t n_coeffs = opt.degree + 1;

    std::size_t distinct = 0;
    for (std::size_t i = 0; i < points.size(); ++i)
        if (i == 0 || points[i].volume != points[i - 1].volume)
            ++distinct;
    if (distinct < n_coeffs)
        throw InsufficientData("fit_height_poly: need at least " + std::to_string(n_coeffs) +
                               " distinct volumes, got " + std::to_string(distinct));

    const double v_min = points.front().volume;
    const double v_max = points.back().volume;
    const double v_scale = v_max;
    if (!(v_scale > 0.0))
        throw InsufficientData("fit_height_poly: all volumes are zero");

    const auto rows = static_cast<Eigen::Index>(points.size());
    const auto cols = static_cast<Eigen::Index>(n_coeffs);
    Eigen::MatrixXd A(rows, cols);
    Eigen::VectorXd b(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const double x = points[static_cast<std::size_t>(i)].volume / v_scale;
        double p = 1.0;
        for (Eigen::Index j = 0; j < cols; ++j) {
            A(i, j) = p;
            p *= x;
        }
        b(i) = points[static_cast<std::size_t>(i)].height;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cond = sv(cols - 1) > 0.0 ? (sv(0) / sv(cols - 1)) * (sv(0) / sv(cols - 1))
                                           : std::numeric_limits<double>::infinity();
    if (!(cond <= opt.max_condition))
        throw IllConditioned("fit_height_poly: normal-equations condition " + std::to_string(cond) +
                             " exceeds limit; reduce the degree");

    const Eigen::VectorXd x = svd.solve(b);
    return HeightFit(std::vector<double>(x.data(), x.data() + x.size()), v_min, v_max, v_scale);
}

/// Root-mean-square residual of a fit against the paired mean points.
inline double fit_residual(const HeightFit& fit, const std::vector<MeanPoint>& points) {
    double acc = 0.0;
    for (const auto& p : points) {
        const double e = fit(p.volume) - p.height;
        acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(points.size()));
}

} // namespace bma::calibration
