#include <cmath>
#include <random>

#include <boost/math/special_functions/ellint_2.hpp>
#include <gtest/gtest.h>

#include "bma/material.hpp"
#include "bma/quadrature.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace bma;
using namespace bma::material;
using units::mm;
using units::pi;

namespace {


double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

YeohCoeffs only(std::size_t n, double value) {
    std::array<double, 6> c{};
    c.at(n - 1) = value;
    return YeohCoeffs(c);
}

} // namespace

TEST(Quadrature, PolynomialAndTranscendental) {
    auto r = quadrature::integrate([](double x) { return x * x * x; }, 0.0, 2.0);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.value, 4.0, 1e-14);
    r = quadrature::integrate([](double x) { return std::exp(-x * x); }, -3.0, 3.0, {1e-13, 0.0, 256});
    EXPECT_NEAR(r.value, std::sqrt(pi) * std::erf(3.0), 1e-13);
    EXPECT_EQ(quadrature::integrate([](double) { return 1.0; }, 1.0, 1.0).value, 0.0);
}

TEST(Quadrature, SubdividesNearSingularBehaviour) {
    const auto r = quadrature::integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0, {1e-10, 0.0, 256});
    EXPECT_TRUE(r.converged);
    EXPECT_GT(r.intervals, 1u);
    EXPECT_NEAR(r.value, 2.0 / 3.0, 1e-10);
}

TEST(IntegrationAngle, Examples) {
    EXPECT_EQ(integration_angle(mm(5.0), mm(4.0), mm(4.0)), pi / 2.0);
    EXPECT_NEAR(integration_angle(mm(5.0), mm(6.0), mm(4.0)), 1.19028994968253173, 1e-15);
    EXPECT_NEAR(integration_angle(1e-300, mm(6.0), mm(4.0)), 0.0, 1e-250);
}

TEST(Perimeter, Examples) {
    const double R = 0.7;
    EXPECT_NEAR(perimeter(R, R, R, pi / 2.0), pi * R / 2.0, 1e-14);
    EXPECT_NEAR(perimeter(2.0, 1.0, 0.5, pi / 2.0), 2.42211205513691905, 1e-12);
    EXPECT_NEAR(perimeter(2.0, 1.0, 0.5, pi / 2.0), 2.0 * boost::math::ellint_2(std::sqrt(0.75)), 1e-12);
    EXPECT_NEAR(perimeter(R, R, 2.0 * R, pi / 4.0), 3.0 * pi * R / 4.0, 1e-14);
    EXPECT_THROW(perimeter(0.0, 1.0, 1.0, 0.5), InvalidArgument);
    EXPECT_THROW(perimeter(1.0, 1.0, 1.0, 2.0), InvalidArgument);
}

TEST(Perimeter, MatchesHighPrecisionOracleOnBothBranches) {
    for (int i = 1; i <= 8; ++i)
        for (int j = 1; j <= 8; ++j)
            for (int k = 0; k <= 8; ++k) {
                const double a = mm(1.5 * i);
                const double c = mm(1.2 * j);
                const double theta = pi / 2.0 * k / 8.0;
                // h3 > c_d selects the long arc, h3 <= c_d the short one
                EXPECT_LT(rel(perimeter(a, c, c + mm(1.0), theta), oracle::arc_length(a, c, pi - theta)), 1e-8);
                if (k > 0) {
                    EXPECT_LT(rel(perimeter(a, c, c - mm(1.0), theta), oracle::arc_length(a, c, theta)), 1e-8);
                }
            }
}

TEST(Perimeter, CircleReducesToRadiusTimesAngle) {
    for (double theta : {0.1, 0.5, 1.0, 1.5}) {
        EXPECT_LT(rel(perimeter(0.3, 0.3, 0.1, theta), 0.3 * theta), 1e-12);
        EXPECT_LT(rel(perimeter(0.3, 0.3, 0.5, theta), 0.3 * (pi - theta)), 1e-12);
    }
}

TEST(Stretch, Examples) {
    const auto ring = fixture::ring();
    EXPECT_EQ(stretch(ring.radius(), ring), 1.0);
    EXPECT_NEAR(stretch(pi * ring.radius() / 2.0, ring), pi / 2.0, 1e-15);
    EXPECT_NEAR(stretch(mm(10.0), ring), 2.0, 1e-15);
}

TEST(InvariantI1, Examples) {
    EXPECT_EQ(invariant_I1(1.0), 3.0);
    EXPECT_EQ(invariant_I1(2.0), 5.0);
    EXPECT_NEAR(invariant_I1(pi / 2.0), 3.74064064500750234, 1e-6);
}

TEST(InvariantI1, MinimumThreeAtUnitStretch) {
    for (int i = 0; i <= 3500; ++i) {
        const double lambda = 0.5 + i * 0.001;
        const double I1 = invariant_I1(lambda);
        if (i == 500)
            EXPECT_EQ(I1, 3.0);
        else
            EXPECT_GT(I1, 3.0) << lambda;
    }
}

TEST(YeohEnergyDensity, Examples) {
    EXPECT_EQ(yeoh_energy_density(1.0, fixture::config().coeffs), 0.0);
    EXPECT_NEAR(yeoh_energy_density(1.2, only(1, 1e5)), 101111.111111111111, 1e-8);
    EXPECT_EQ(yeoh_energy_density(1.0, only(2, 1e5)), 0.0);
}

TEST(YeohEnergyDensity, MatchesTermBySummation) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> coeff(-1e4, 1e5), stretch(0.6, 4.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::array<double, 6> c{};
        for (double& v : c)
            v = coeff(rng);
        const double lambda = stretch(rng);
        const double x = lambda * lambda + 2.0 / lambda - 3.0;
        double want = 0.0;
        for (int n = 1; n <= 6; ++n)
            want += 2.0 * (lambda - std::pow(lambda, -2.0)) * n * c[n - 1] * std::pow(x, n - 1);
        EXPECT_NEAR(yeoh_energy_density(lambda, YeohCoeffs(c)), want, 1e-9 * std::max(1.0, std::abs(want)));
    }
}

TEST(YeohEnergyDensity, ZeroAtUnitStretchAndContinuous) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> coeff(-1e6, 1e6);
    for (int trial = 0; trial < 100; ++trial) {
        std::array<double, 6> c{};
        for (double& v : c)
            v = coeff(rng);
        const YeohCoeffs y(c);
        EXPECT_EQ(yeoh_energy_density(1.0, y), 0.0);
        for (double lambda : {0.8, 1.0, 1.7, 3.0}) {
            const double w = yeoh_energy_density(lambda, y);
            const double step = 1e-7;
            EXPECT_NEAR(yeoh_energy_density(lambda + step, y), w, 1e-3 * std::max(1e6, std::abs(w)));
        }
    }
}

TEST(YeohEnergyDensity, LinearInCoefficients) {
    const auto c = fixture::config().coeffs;
    EXPECT_DOUBLE_EQ(yeoh_energy_density(2.3, c.scaled(2.0)), 2.0 * yeoh_energy_density(2.3, c));
}

TEST(InflatedThickness, Examples) {
    const auto ring = fixture::ring();
    EXPECT_EQ(inflated_thickness(ring, ring.radius()), ring.thickness());
    EXPECT_NEAR(inflated_thickness(ring, mm(10.0)), mm(0.125), 1e-18);
    EXPECT_LT(inflated_thickness(ring, 1e6), 1e-15);
}

TEST(InflatedThickness, IncompressibilityIdentity) {
    const auto ring = fixture::ring();
    for (int i = 0; i < 100; ++i) {
        const double L = ring.radius() * (1.0 + 0.05 * i);
        const double lambda = stretch(L, ring);
        EXPECT_LT(rel(inflated_thickness(ring, L) * lambda * lambda, ring.thickness()), 1e-12);
        EXPECT_LE(inflated_thickness(ring, L), ring.thickness());
    }
}

TEST(FreeMembraneVolume, Examples) {
    const double v_m = units::mm3(39.27);
    const auto none = free_membrane_volume(v_m, 0.0, mm(0.125));
    EXPECT_EQ(none.value, v_m);
    EXPECT_FALSE(none.clamped);
    const auto some = free_membrane_volume(v_m, mm(2.307), mm(0.125));
    EXPECT_NEAR(units::to_mm3(some.value), 37.17995770512805, 1e-9);
    EXPECT_FALSE(some.clamped);
    const auto over = free_membrane_volume(v_m, mm(20.0), mm(0.125));
    EXPECT_EQ(over.value, 0.0);
    EXPECT_TRUE(over.clamped);
}

TEST(StretchState, HemisphereChain) {
    const auto ring = fixture::ring();
    const double r = ring.radius();
    const geometry::DeformedShape d{r, r, r, 0.0, 0.0};
    const auto s = evaluate_stretch(d, ring, fixture::config().coeffs);
    EXPECT_EQ(s.theta1, pi / 2.0);
    EXPECT_NEAR(s.L, pi * r / 2.0, 1e-15);
    EXPECT_NEAR(s.lambda, pi / 2.0, 1e-12);
    EXPECT_NEAR(s.I1, invariant_I1(pi / 2.0), 1e-12);
    EXPECT_NEAR(s.t_m * s.lambda * s.lambda, ring.thickness(), 1e-15);
}
